"""Microcosm data in Brinkmann and Alekseevsky form, Rosen conversion and bounds.

Brinkmann form has tidal matrix ``p_B(u) = exp(-w u) p_B exp(w u)``;
Alekseevsky form has constant potential ``p_A = p_B + w^2`` and Jacobi
equation ``X'' - 2 w X' + p_A X = 0``.  Brinkmann fields are
``J = exp(-w u) X``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .errors import InvalidInputError, PoleError
from .matcore import check_skew, check_symmetric, mat_exp
from .oracle import frame_degeneracy, jacobi_matrix

__all__ = [
    "Form",
    "MicrocosmSpec",
    "RosenData",
    "GrassmannCurve",
    "make_spec",
    "dim2_spec",
    "convert_form",
    "tidal_at",
    "symplectic_form_eval",
    "alekseevsky_to_rosen",
    "rosen_from_h",
    "grassmann_curve",
    "raychaudhuri_bound",
    "DEFAULT_DENSITY",
]

DEFAULT_DENSITY = 512


class Form(enum.Enum):
    BRINKMANN = "brinkmann"
    ALEKSEEVSKY = "alekseevsky"

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidInputError(f"unknown form {value!r}; use 'brinkmann' or 'alekseevsky'") from None


@dataclass(frozen=True)
class MicrocosmSpec:
    """Constant ``(omega, p)`` of a homogeneous plane wave with a form tag."""

    n: int
    omega: np.ndarray
    p: np.ndarray
    form: Form

    @property
    def p_brinkmann(self):
        return self.p if self.form is Form.BRINKMANN else self.p - self.omega @ self.omega

    @property
    def p_alekseevsky(self):
        return self.p if self.form is Form.ALEKSEEVSKY else self.p + self.omega @ self.omega

    @property
    def energy_trace(self):
        """``tr(p_A - w^2) = tr(p_B)``, the scalar in the Raychaudhuri equation."""
        return float(np.trace(self.p_brinkmann).real)

    @property
    def energy_scalar_dim2(self):
        """``A + w^2`` for ``n = 2``, i.e. half of :attr:`energy_trace`."""
        if self.n != 2:
            raise InvalidInputError("energy_scalar_dim2 is only defined for n = 2")
        return self.energy_trace / 2


def make_spec(omega, p, form="brinkmann"):
    """Validate real ``omega`` (skew) and ``p`` (symmetric) and build a spec."""
    omega = check_skew(omega, "omega")
    p = check_symmetric(p, "p")
    if omega.shape != p.shape:
        raise InvalidInputError("omega and p must have the same shape")
    if np.any(np.abs(omega.imag) > 0) or np.any(np.abs(p.imag) > 0):
        raise InvalidInputError("omega and p must be real")
    return MicrocosmSpec(n=p.shape[0], omega=omega.real.copy(), p=p.real.copy(), form=Form.coerce(form))


def dim2_spec(a_, b_, c_, w, form="alekseevsky"):
    """``p = [[A+B, C], [C, A-B]]`` and ``omega = [[0, -w], [w, 0]]``."""
    p = np.array([[a_ + b_, c_], [c_, a_ - b_]], dtype=float)
    omega = np.array([[0.0, -w], [w, 0.0]])
    return make_spec(omega, p, form)


def convert_form(spec, target):
    """Switch between Brinkmann (``p``) and Alekseevsky (``p + w^2``) data."""
    target = Form.coerce(target)
    if target is spec.form:
        return spec
    w2 = spec.omega @ spec.omega
    p = spec.p + w2 if target is Form.ALEKSEEVSKY else spec.p - w2
    return MicrocosmSpec(n=spec.n, omega=spec.omega, p=p, form=target)


def tidal_at(spec, u):
    """Brinkmann tidal matrix ``exp(-u w) p exp(u w)``."""
    if spec.form is not Form.BRINKMANN:
        raise InvalidInputError("tidal_at expects a Brinkmann-form spec")
    rot = mat_exp(u * spec.omega).real
    return rot.T @ spec.p @ rot


def symplectic_form_eval(x, xdot, y, ydot, omega):
    """``x^T ydot - y^T xdot - 2 x^T w y`` for Alekseevsky Jacobi data."""
    x, xdot, y, ydot = (np.asarray(v) for v in (x, xdot, y, ydot))
    omega = np.asarray(omega)
    return x.T @ ydot - y.T @ xdot - 2 * x.T @ omega @ y


@dataclass(frozen=True)
class RosenData:
    """Rosen metric ``h = L^T L`` sampled on ``grid``.

    ``blowup`` records where the generating Sachs solution became
    singular when the grid had to be truncated.
    """

    grid: np.ndarray
    h: np.ndarray
    l: np.ndarray
    blowup: float = None
    ldot: np.ndarray = field(default=None, repr=False)


def alekseevsky_to_rosen(spec, s_init, grid):
    """Rosen form from a Sachs solution of an Alekseevsky microcosm.

    Solves ``S' + S^2 - [w, S] + p - w^2 = 0``, ``L' = (S + w) L`` with
    ``S(0) = s_init`` and ``L(0) = I``.  ``L`` obeys the Jacobi equation,
    so ``[L; L'] = exp(u Q) [I; s_init + w]`` exactly.  If ``L`` becomes
    singular inside the grid, the output stops before that point and the
    singular point is stored in ``blowup``.
    """
    if spec.form is not Form.ALEKSEEVSKY:
        raise InvalidInputError("alekseevsky_to_rosen expects an Alekseevsky-form spec")
    s_init = check_symmetric(s_init, "s_init")
    if np.any(s_init.imag != 0):
        raise InvalidInputError("s_init must be real for a real Rosen metric")
    s_init = s_init.real
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise InvalidInputError("grid must be strictly increasing")
    n = spec.n
    q = jacobi_matrix(spec.omega, spec.p).real
    z0 = np.vstack([np.eye(n), s_init + spec.omega])

    def state(u):
        return mat_exp(u * q).real @ z0

    states = np.array([state(u) for u in grid])
    deg = frame_degeneracy(states)
    dets = np.linalg.det(states[:, :n])
    blowup = None
    stop = len(grid)
    for k in range(1, len(grid)):
        sign_flip = dets[k] * dets[k - 1] <= 0
        is_min = k + 1 < len(grid) and deg[k] <= deg[k - 1] and deg[k] <= deg[k + 1] and deg[k] < 1e-2
        if sign_flip or is_min:
            lo, hi = grid[k - 1], grid[min(k + 1, len(grid) - 1)]
            res = minimize_scalar(
                lambda d: frame_degeneracy(state(grid[k] + d)[None])[0],
                bounds=(lo - grid[k], hi - grid[k]),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if res.fun < 1e-6:
                blowup = float(grid[k] + res.x)
                stop = int(np.searchsorted(grid, blowup))
                break
    if stop == 0:
        raise PoleError("Sachs solution is singular at the start of the grid", location=grid[0])
    l = states[:stop, :n]
    ldot = states[:stop, n:]
    h = np.einsum("kji,kjl->kil", l, l)
    return RosenData(grid=grid[:stop], h=h, l=l, blowup=blowup, ldot=ldot)


def rosen_from_h(grid, h):
    """Rosen data from sampled positive-definite ``h``; ``L`` is the Cholesky factor."""
    grid = np.asarray(grid, dtype=float)
    h = np.asarray(h, dtype=float)
    try:
        c = np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        raise InvalidInputError("h violates positive definiteness") from None
    return RosenData(grid=grid, h=h, l=np.swapaxes(c, 1, 2))


class GrassmannCurve:
    """``u -> H(u) - H(u0)`` with ``H' = h^{-1}``.

    Values on the grid come from composite Simpson quadrature; off-grid
    points use a cubic spline through them.
    """

    def __init__(self, grid, values, u0):
        self.grid = grid
        self.values = values
        self.u0 = u0
        self._spline = CubicSpline(grid, values, axis=0)

    def __call__(self, u):
        if u < self.grid[0] - 1e-12 or u > self.grid[-1] + 1e-12:
            raise InvalidInputError(f"u={u} outside the sampled range")
        k = np.searchsorted(self.grid, u)
        if k < len(self.grid) and abs(self.grid[k] - u) < 1e-14:
            return self.values[k]
        return self._spline(u)


def grassmann_curve(rosen, u0):
    """Curve in the Lagrangian Grassmannian whose degenerations mark points conjugate to ``u0``."""
    grid = rosen.grid
    if not grid[0] - 1e-12 <= u0 <= grid[-1] + 1e-12:
        raise InvalidInputError("u0 must lie in the grid range")
    conds = np.linalg.cond(rosen.h)
    bad = np.nonzero(~np.isfinite(conds) | (conds > 1e12))[0]
    if bad.size:
        raise PoleError(f"h is singular at u={grid[bad[0]]}", location=float(grid[bad[0]]))
    hinv = np.linalg.inv(rosen.h)
    cum = cumulative_simpson(hinv, x=grid, axis=0, initial=0)
    base = CubicSpline(grid, cum, axis=0)(u0)
    k = np.searchsorted(grid, u0)
    if k < len(grid) and abs(grid[k] - u0) < 1e-14:
        base = cum[k]
    return GrassmannCurve(grid, cum - base, u0)


def raychaudhuri_bound(e_min, n=1):
    """Horizon ``pi / sqrt(e_min / n)`` for a guaranteed conjugate point.

    ``e_min`` bounds the trace energy ``tr p_B`` from below.  The
    expansion ``theta = tr S`` obeys
    ``theta' + theta^2 / n + tr(shear^2) + tr p = 0``, so ``theta``
    blows up within ``pi sqrt(n / e_min)``.  The default ``n = 1`` gives
    ``pi / sqrt(e_min)``, which is only guaranteed in one transverse
    dimension.
    """
    if not e_min > 0:
        raise InvalidInputError("e_min must be positive")
    if n < 1:
        raise InvalidInputError("n must be a positive dimension")
    return float(np.pi / np.sqrt(e_min / n))
