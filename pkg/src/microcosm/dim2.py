"""Analytic treatment of two-dimensional microcosms in Alekseevsky form.

Parameters: ``p = [[A+B, C], [C, A-B]]`` and ``w`` with
``omega = [[0, -w], [w, 0]]``.  A constant solution of

    S^2 - [w, S] + p - w^2 = 0

is written ``S = [[s + u0, t], [t, s - u0]]``.  Writing ``Sigma = S - s + w``
(a trace-free split quaternion), the Grassmannian curve and the
conjugate-point condition have closed forms in ``s`` and the scalar
``Sigma^2``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .efuncs import eval_matrix, eval_scalar
from .errors import InvalidInputError

__all__ = [
    "Dim2Params",
    "Dim2Solution",
    "Dim2Family",
    "SolutionList",
    "SplitQuaternion",
    "RealityClass",
    "Classification",
    "constant_solutions_2x2",
    "reality_classify",
    "quadratic_roots_xy",
    "orbit_coeffs_2x2",
    "orbit_h_2x2",
    "conjugate_condition",
    "find_conjugate_points",
    "existence_predicates",
    "SAMPLES_PER_UNIT",
]

SAMPLES_PER_UNIT = 10_000
_REAL_TOL = 1e-9


@dataclass(frozen=True)
class Dim2Params:
    a_: float
    b_: float
    c_: float
    w: float

    def __post_init__(self):
        vals = (self.a_, self.b_, self.c_, self.w)
        if not all(np.isfinite(v) and np.isreal(v) for v in vals):
            raise InvalidInputError("A, B, C and w must be finite real numbers")

    @property
    def p(self):
        return np.array([[self.a_ + self.b_, self.c_], [self.c_, self.a_ - self.b_]], dtype=float)

    @property
    def omega(self):
        return np.array([[0.0, -self.w], [self.w, 0.0]])

    @property
    def det_p(self):
        return self.a_**2 - self.b_**2 - self.c_**2

    @property
    def p_tilde_sq(self):
        """``B^2 + C^2``, the scalar square of the trace-free part of ``p``."""
        return self.b_**2 + self.c_**2

    @property
    def f_disc(self):
        return 4 * self.w**4 + 4 * self.a_ * self.w**2 + self.p_tilde_sq

    @property
    def energy_scalar(self):
        """``A + w^2`` (``P - omega^2`` with ``omega^2 = -w^2``)."""
        return self.a_ + self.w**2

    @property
    def conformally_trivial(self):
        return self.b_ == 0 and self.c_ == 0


@dataclass(frozen=True)
class Dim2Solution:
    s: complex
    t: complex
    u0: complex
    z: complex = None
    """``s^2 + w^2`` (the denominator in the formulas for ``t`` and ``u0``)."""

    def matrix(self):
        return np.array([[self.s + self.u0, self.t], [self.t, self.s - self.u0]], dtype=complex)

    def x(self):
        """``Sigma_o^2 = t^2 + u0^2``."""
        return self.t**2 + self.u0**2

    def y(self):
        """``s^2 - omega^2 = s^2 + w^2``, the same number as ``z``."""
        return self.z

    def sigma(self, params):
        """``Sigma = S - s + omega`` as a split quaternion."""
        return SplitQuaternion(0.0, params.w, self.u0, self.t)

    def equations(self, params):
        a_, b_, c_, w = params.a_, params.b_, params.c_, params.w
        s, t, u = self.s, self.t, self.u0
        return (
            b_ + 2 * s * u + 2 * w * t,
            c_ + 2 * s * t - 2 * w * u,
            a_ + s**2 + w**2 + t**2 + u**2,
        )

    def matrix_residual(self, params):
        s = self.matrix()
        om = params.omega
        return s @ s - (om @ s - s @ om) + params.p - om @ om

    def is_real(self, tol=_REAL_TOL):
        scale = max(1.0, abs(self.s), abs(self.t), abs(self.u0))
        return all(abs(np.imag(v)) <= tol * scale for v in (self.s, self.t, self.u0))


@dataclass(frozen=True)
class Dim2Family:
    """A one-parameter family of solutions (conformally trivial cases).

    ``member(x, branch)`` returns a solution for the parameter ``x``;
    ``branch`` is ``+1`` or ``-1``.
    """

    description: str
    _member: object = field(repr=False)

    def member(self, x, branch=1):
        return self._member(x, branch)


class SolutionList(list):
    """Isolated constant solutions, with an optional infinite ``family``."""

    def __init__(self, items=(), family=None):
        super().__init__(items)
        self.family = family


@dataclass(frozen=True)
class SplitQuaternion:
    """``a + b J + c K + d JK`` with ``J^2 = -1``, ``K^2 = 1``, ``JK = -KJ``."""

    a: complex
    b: complex
    c: complex
    d: complex

    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    K = np.array([[1.0, 0.0], [0.0, -1.0]])
    JK = np.array([[0.0, 1.0], [1.0, 0.0]])

    def matrix(self):
        return self.a * np.eye(2) + self.b * self.J + self.c * self.K + self.d * self.JK

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m)
        return cls(
            (m[0, 0] + m[1, 1]) / 2,
            (m[1, 0] - m[0, 1]) / 2,
            (m[0, 0] - m[1, 1]) / 2,
            (m[0, 1] + m[1, 0]) / 2,
        )

    def __mul__(self, other):
        return SplitQuaternion.from_matrix(self.matrix() @ other.matrix())

    @property
    def trace_free(self):
        return self.a == 0

    def square_scalar(self):
        """``X^2`` for trace-free ``X``: ``-b^2 + c^2 + d^2``."""
        if not self.trace_free:
            raise InvalidInputError("square_scalar needs a trace-free quaternion")
        return -self.b**2 + self.c**2 + self.d**2


def _csqrt(z):
    return np.sqrt(complex(z))


def _dedupe(sols, tol=1e-9):
    out = []
    for sol in sols:
        if not any(
            abs(sol.s - o.s) + abs(sol.t - o.t) + abs(sol.u0 - o.u0) <= tol * max(1.0, abs(sol.s)) for o in out
        ):
            out.append(sol)
    return out


def constant_solutions_2x2(params):
    """All constant solutions of the Alekseevsky Sachs equation for ``n = 2``.

    For ``(B, C) != 0`` the quartic in ``s`` is solved through the
    quadratic in ``s^2`` and ``t, u0`` follow linearly (one to four
    solutions).  For ``B = C = 0`` the isolated solutions are returned and
    any infinite family is attached as ``.family``.
    """
    a_, b_, c_, w = params.a_, params.b_, params.c_, params.w
    if not params.conformally_trivial:
        root = _csqrt(params.det_p)
        sols = []
        for r in ((-(a_ + 2 * w**2) + root) / 2, (-(a_ + 2 * w**2) - root) / 2):
            for sgn in (1, -1):
                s = sgn * _csqrt(r)
                z = s**2 + w**2
                t = -(b_ * w + c_ * s) / (2 * z)
                u0 = (-b_ * s + c_ * w) / (2 * z)
                sols.append(Dim2Solution(_clean(s), _clean(t), _clean(u0), _clean(z)))
        return SolutionList(_dedupe(sols))
    if a_ != 0 and w != 0:
        s = _clean(_csqrt(-(a_ + w**2)))
        z = _clean(-a_)
        return SolutionList(_dedupe([Dim2Solution(s, 0j, 0j, z), Dim2Solution(-s, 0j, 0j, z)]))
    if w == 0 and a_ != 0:
        rad = _csqrt(-a_)
        fam = Dim2Family(
            "s = 0, t^2 + u0^2 = -A: (0, sqrt(-A) cos x, sqrt(-A) sin x)",
            lambda x, branch: Dim2Solution(0j, _clean(rad * np.cos(x)), _clean(branch * rad * np.sin(x)), 0j),
        )
        isolated = [Dim2Solution(_clean(rad), 0j, 0j, _clean(-a_)), Dim2Solution(_clean(-rad), 0j, 0j, _clean(-a_))]
        return SolutionList(_dedupe(isolated), family=fam)
    if a_ == 0 and w != 0:
        fam = Dim2Family(
            "s = +-i w, t = -s u0 / w: (+-i w, -+i x, x)",
            lambda x, branch: Dim2Solution(branch * 1j * w, -branch * 1j * x, complex(x), 0j),
        )
        return SolutionList([], family=fam)
    fam = Dim2Family(
        "s = 0, t = +-i u0: (0, +-i x, x)",
        lambda x, branch: Dim2Solution(0j, branch * 1j * x, complex(x), 0j),
    )
    return SolutionList([], family=fam)


def _clean(v):
    v = complex(v)
    scale = max(1.0, abs(v))
    re = 0.0 if abs(v.real) <= 1e-15 * scale else v.real
    im = 0.0 if abs(v.imag) <= 1e-15 * scale else v.imag
    return complex(re, im)


class RealityClass(enum.Enum):
    ALL_REAL = "all-real"
    ALL_NONREAL = "all-nonreal"
    MIXED = "mixed"


@dataclass(frozen=True)
class Classification:
    kind: RealityClass
    witnesses: dict
    flags: tuple


def reality_classify(params):
    """Classify the constant solutions as all real, all non-real or mixed.

    The class is read off the explicit roots.  All roots are real iff
    ``|p| >= 0`` and ``A + 2 w^2 <= -sqrt|p|``; this is reported together
    with the alternative criterion ``|p| >= 0, F >= 0, A >= w^2``, and
    ``flags`` lists every criterion that disagrees with the roots.
    """
    if params.conformally_trivial:
        raise InvalidInputError("reality_classify needs (B, C) != (0, 0)")
    sols = constant_solutions_2x2(params)
    real = [sol.is_real() for sol in sols]
    if all(real):
        kind = RealityClass.ALL_REAL
    elif not any(real):
        kind = RealityClass.ALL_NONREAL
    else:
        kind = RealityClass.MIXED
    dp = params.det_p
    a_, w = params.a_, params.w
    sqrt_dp = np.sqrt(dp) if dp >= 0 else np.nan
    witnesses = {
        "det_p": dp,
        "F": params.f_disc,
        "A_plus_2w2": a_ + 2 * w**2,
        "minus_sqrt_det_p": -sqrt_dp,
        "real_iff": bool(dp >= 0 and a_ + 2 * w**2 <= -sqrt_dp),
        "real_alternative": bool(dp >= 0 and params.f_disc >= 0 and a_ >= w**2),
        "nonreal_if_det_negative": bool(dp < 0),
        "roots": [(sol.s, sol.t, sol.u0) for sol in sols],
    }
    flags = []
    if witnesses["real_iff"] != (kind is RealityClass.ALL_REAL):
        flags.append("criterion A + 2w^2 <= -sqrt|p| disagrees with the roots")
    if witnesses["real_alternative"] != (kind is RealityClass.ALL_REAL):
        flags.append("criterion |p| >= 0, F >= 0, A >= w^2 disagrees with the roots")
    if witnesses["nonreal_if_det_negative"] != (kind is RealityClass.ALL_NONREAL):
        flags.append("all roots non-real although |p| >= 0")
    return Classification(kind=kind, witnesses=witnesses, flags=tuple(flags))


def quadratic_roots_xy(params):
    """Roots ``(x, y)`` of ``z^2 + A z + (B^2 + C^2)/4 = 0``.

    ``x`` is the root that vanishes when ``B = C = 0`` (for ``A != 0``), so
    that case gives ``(0, -A)``.  ``(x - y)^2 = |p|``.
    """
    a_ = params.a_
    root = _csqrt(params.det_p)
    if a_ != 0 and abs(-a_ - root) < abs(-a_ + root):
        root = -root
    return _clean((-a_ + root) / 2), _clean((-a_ - root) / 2)


def _orbit_raw(s, q, u):
    a = 2 * s
    kmat = np.array([[0, 1, 0], [0, 0, 1], [0, 4 * q, 0]], dtype=complex)
    ph = u * eval_matrix("E", u * (kmat - a * np.eye(3)))[:, 2] * np.exp(a * u)
    z_g2, z_s, z_c = ph
    coef_a = 0.5 * (z_c + u * eval_scalar("E", a * u))
    return coef_a, 2 * z_g2, z_s


def orbit_coeffs_2x2(s, sigma, u):
    """Entire coefficients ``(coefA, coefB, coefC)`` of the orbit curve.

    ``H(u) = exp(-2 s u) (coefA + coefB Sigma J Sigma J + coefC [Sigma, J] J)``
    solves ``H' = exp(-u (s + Sigma)) exp(-u (s + Sigma)^T)`` with
    ``H(0) = 0``.  With ``a = 2s`` and ``b^2 = 4 Sigma^2`` the coefficients
    are ``exp(a u) int_0^u exp(-a v) f(v) dv`` for
    ``f = cosh^2(v Sigma)``, ``(cosh(b v) - 1) / (2 Sigma^2)`` and
    ``sinh(b v) / b``, evaluated together as one 3x3 matrix function.
    """
    if not sigma.trace_free:
        raise InvalidInputError("sigma must be trace-free")
    return tuple(complex(v) for v in _orbit_raw(complex(s), complex(sigma.square_scalar()), float(u)))


def orbit_h_2x2(s, sigma, u):
    """Assemble ``H(u)`` from :func:`orbit_coeffs_2x2`."""
    ca, cb, cc = orbit_coeffs_2x2(s, sigma, u)
    sm = sigma.matrix()
    j = SplitQuaternion.J
    h = ca * np.eye(2) + cb * (sm @ j @ sm @ j) + cc * ((sm @ j - j @ sm) @ j)
    return np.exp(-2 * s * u) * h


def _gam(z):
    """``Gamma(z) = gamma(sqrt z) = 2 (cosh sqrt z - 1) / z``, vectorised."""
    return eval_scalar("gamma", np.sqrt(np.asarray(z, dtype=complex)))


def _dgam(z):
    """Derivative of ``Gamma``: ``(sigma(sqrt z) - Gamma(z)) / z``, series near 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) <= 1.0
    zs = np.where(small, 2.0, z)
    closed = (eval_scalar("sigma", np.sqrt(zs)) - _gam(zs)) / zs
    series = np.zeros_like(z)
    fact = 1.0
    for k in range(1, 25):
        # 2 k z^{k-1} / (2k+2)!
        fact = float(np.prod(np.arange(1, 2 * k + 3, dtype=float)))
        series = series + 2 * k * z ** (k - 1) / fact
    return np.where(small, series, closed)


def conjugate_condition(s, sigma2, omega2, u, confluence_tol=1e-6):
    """Exactly divided conjugate-point function.

    Returns ``(g(s^2) - g(Sigma^2)) / (s^2 - Sigma^2)`` with
    ``g(r) = (r - omega^2) Gamma(4 u^2 r)`` and ``Gamma(z) = gamma(sqrt z)``.
    When the two arguments are within ``confluence_tol`` (relative) the
    derivative ``g'`` at their midpoint is used.  The value is 1 at
    ``u = 0``.  ``s`` may be complex; ``u`` may be an array.
    """
    r1 = complex(s) ** 2
    r2 = complex(sigma2)
    w2 = complex(omega2)
    return _divided(r1, r2, w2, u, confluence_tol)


def _divided(r1, r2, w2, u, confluence_tol=1e-6):
    u = np.asarray(u, dtype=float)
    uu = 4 * u * u
    scale = max(1.0, abs(r1), abs(r2))
    if abs(r1 - r2) <= confluence_tol * scale:
        m = (r1 + r2) / 2
        return _gam(uu * m) + (m - w2) * uu * _dgam(uu * m)
    g1 = (r1 - w2) * _gam(uu * r1)
    g2 = (r2 - w2) * _gam(uu * r2)
    return (g1 - g2) / (r1 - r2)


def _condition_for(params):
    x, y = quadratic_roots_xy(params)
    w2 = -params.w**2
    # Sigma^2 = x + omega^2 and s^2 = y + omega^2; the divided difference is symmetric
    r1, r2 = y + w2, x + w2

    def f(u):
        return _divided(r1, r2, w2, u)

    return f


def find_conjugate_points(params, u_max, samples_per_unit=SAMPLES_PER_UNIT, verify=True, u_min=0.0):
    """Points in ``(u_min, u_max]`` conjugate to ``u = 0``.

    These are the real zeros of the conjugate-point condition.  The
    condition is sampled densely; sign changes are refined with
    Brent's method, and local minima of ``|f|`` (double zeros, e.g. the
    ``sin^2`` pattern of conformally trivial waves) are refined with a
    bounded minimisation and accepted when ``|f|`` there is below
    ``1e-6`` times its neighbours.  With ``verify=True`` (the default) the
    result is compared against the ODE oracle and ``ConsistencyError`` is
    raised on disagreement beyond 1e-6.
    """
    if not u_max > max(u_min, 0.0):
        raise InvalidInputError("u_max must be positive and exceed u_min")
    f = _condition_for(params)
    count = int(np.ceil((u_max - u_min) * samples_per_unit))
    grid = np.linspace(u_min, u_max, count + 1)
    # the exact value is real (conjugate roots enter symmetrically)
    fr = np.asarray(f(grid)).real

    def freal(x):
        return float(np.real(f(x)))

    roots = []
    sign = np.sign(fr)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        roots.append(brentq(freal, grid[i], grid[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps))
    for i in np.nonzero(fr == 0)[0]:
        roots.append(float(grid[i]))
    absf = np.abs(fr)
    inner = np.arange(1, len(grid) - 1)
    is_min = (absf[inner] < absf[inner - 1]) & (absf[inner] <= absf[inner + 1])
    for i in inner[is_min]:
        if sign[i - 1] * sign[i + 1] < 0 or sign[i] * sign[i - 1] < 0 or sign[i] * sign[i + 1] < 0:
            continue
        c = grid[i]
        res = minimize_scalar(
            lambda d: abs(freal(c + d)),
            bounds=(grid[i - 1] - c, grid[i + 1] - c),
            method="bounded",
            options={"xatol": 1e-13},
        )
        neighbour = max(absf[i - 1], absf[i + 1])
        if res.fun <= 1e-6 * neighbour:
            roots.append(float(c + res.x))
    roots = sorted(r for r in roots if u_min < r <= u_max and r > 1e-9)
    out = []
    for r in roots:
        if not out or r - out[-1] > 1e-8:
            out.append(r)
    if verify:
        from .errors import ConsistencyError
        from .oracle import conjugate_points

        ref = [v for v in conjugate_points(params.omega, params.p, u_max) if v > u_min]
        if len(ref) != len(out) or (out and np.max(np.abs(np.array(ref) - np.array(out))) > 1e-6):
            raise ConsistencyError(f"analytic conjugate points {out} disagree with the oracle {ref}")
    return out


def existence_predicates(params):
    """Which theorems guarantee or exclude conjugate points.

    Returns ``{"exists": True | False | None, "reasons": [...]}``; ``None``
    means no theorem applies and :func:`find_conjugate_points` decides.
    """
    reasons = []
    exists = None
    evals = np.linalg.eigvalsh(params.p)
    energy = params.energy_scalar
    if params.conformally_trivial:
        if energy > 0:
            reasons.append("conformally trivial with E = A + w^2 > 0")
            exists = True
        else:
            reasons.append("conformally trivial with E = A + w^2 <= 0: no conjugate points")
            exists = False
        return {"exists": exists, "reasons": reasons}
    if params.det_p < 0:
        reasons.append("|p| < 0")
        exists = True
    if energy > 0:
        reasons.append("E = A + w^2 > 0")
        exists = True
    if evals[-1] > 0:
        reasons.append("p has a positive eigenvalue")
        exists = True
    return {"exists": exists, "reasons": reasons}
