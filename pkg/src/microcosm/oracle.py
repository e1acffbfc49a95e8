"""Independent numerical ground truth for the closed forms.

Everything here is plain fixed-step classical Runge-Kutta (RK4) with a
Richardson error estimate from a second run at twice the step.  No matrix
functions are used, so agreement with :mod:`microcosm.sachs_flow` and
:mod:`microcosm.orbit` is a genuine cross-check.

Jacobi fields are integrated in the Alekseevsky frame, where the equation
``X'' - 2 w X' + p X = 0`` has constant coefficients.  A Brinkmann field is
``J = exp(-w u) X`` for the Alekseevsky potential ``p_B + w^2``.

Conjugate points on long intervals can need more than double precision:
when the frame of fields vanishing at ``u0`` keeps a decaying direction
next to a growing one, rounding errors in the decaying direction are
amplified like ``exp(2 a u)`` with ``a`` the largest real part of the
spectrum.  :func:`conjugate_points` then runs the same RK4 propagation in
``mpmath`` arithmetic with enough digits to absorb that growth.
"""

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from .errors import AccuracyError, InvalidInputError
from .matcore import check_skew, check_square, check_symmetric

__all__ = [
    "DEFAULT_STEP",
    "BLOWUP_NORM",
    "OdeRun",
    "jacobi_matrix",
    "uniform_grid",
    "integrate_jacobi",
    "integrate_sachs",
    "frame_degeneracy",
    "detect_conjugate",
    "conjugate_points",
    "precision_needed",
    "symplectic_pairing",
]

DEFAULT_STEP = 1e-3
BLOWUP_NORM = 1e8


@dataclass
class OdeRun:
    """Result of an integration.

    ``states[k]`` is the state at ``grid[k]``.  ``blowup`` holds the
    located singularity when the run stopped early.  ``system`` is the
    constant generator ``Q`` of a linear run and is used for
    re-integration during root refinement.
    """

    grid: np.ndarray
    states: np.ndarray
    max_step_error_estimate: float
    blowup: float = None
    system: np.ndarray = field(default=None, repr=False)
    step: float = DEFAULT_STEP


def uniform_grid(u_min, u_max, step=DEFAULT_STEP):
    """Grid from ``u_min`` to ``u_max`` with spacing at most ``step``."""
    if not u_max > u_min:
        raise InvalidInputError("u_max must exceed u_min")
    count = int(np.ceil((u_max - u_min) / step - 1e-9))
    return np.linspace(u_min, u_max, count + 1)


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise InvalidInputError("grid needs at least two points")
    if np.any(np.diff(grid) <= 0):
        raise InvalidInputError("grid must be strictly increasing")
    return grid


def jacobi_matrix(omega, p):
    """First-order generator ``Q = [[0, I], [-p, 2 w]]`` (Alekseevsky form)."""
    omega = check_skew(omega)
    p = check_symmetric(p, "p")
    n = p.shape[0]
    return np.block([[np.zeros((n, n)), np.eye(n)], [-p, 2 * omega]])


def _rk4_propagator(q, h):
    hq = h * q
    out = np.eye(q.shape[0], dtype=complex)
    term = np.eye(q.shape[0], dtype=complex)
    for k in range(1, 5):
        term = term @ hq / k
        out = out + term
    return out


def _substeps(delta, step):
    # an even count so that the half-resolution run lands on the same points
    m = 2 * int(np.ceil(delta / (2 * step) - 1e-12))
    return max(m, 2)


def _interval_plan(grid, step):
    """Substep counts and propagator cache keys for every grid interval."""
    delta = np.diff(np.asarray(grid, dtype=float))
    m = np.maximum(2 * np.ceil(delta / (2 * step) - 1e-12).astype(int), 2)
    h = np.round(delta / m, 15)
    return [(float(d), int(k), (float(hk), int(k))) for d, k, hk in zip(delta, m, h)]


def _linear_run(q, z0, grid, step):
    fine = [z0]
    coarse = [z0]
    zf = z0
    zc = z0
    cache = {}
    for delta, m, key in _interval_plan(grid, step):
        if key not in cache:
            h = delta / m
            pf = _rk4_propagator(q, h)
            pc = _rk4_propagator(q, 2 * h)
            cache[key] = (np.linalg.matrix_power(pf, m), np.linalg.matrix_power(pc, m // 2))
        pf_m, pc_m = cache[key]
        zf = pf_m @ zf
        zc = pc_m @ zc
        fine.append(zf)
        coarse.append(zc)
    return np.array(fine), np.array(coarse)


def _fx_orthonormal(cols, bits):
    """Modified Gram-Schmidt on fixed-point integer columns (scale ``2**bits``)."""
    out = []
    for c in cols:
        v = list(c)
        for e in out:
            proj = sum(ei * vi for ei, vi in zip(e, v)) >> bits
            v = [vi - ((proj * ei) >> bits) for vi, ei in zip(v, e)]
        norm = math.isqrt(sum(vi * vi for vi in v))
        out.append([(vi << bits) // norm for vi in v])
    return out


def _fx_apply(rows, cols, bits):
    return [[sum(rij * cj for rij, cj in zip(r, c)) >> bits for r in rows] for c in cols]


def _fx_to_float(cols, bits):
    shift = bits - 60
    return np.array([[float(v >> shift) / 2.0**60 for v in c] for c in cols]).T


def _mp_rk4_rows(q, h, m, bits):
    """Fixed-point rows of the ``m``-step RK4 propagator ``(sum_k (hQ)^k / k!)^m``."""
    qm = mpmath.matrix(np.asarray(q).real.tolist())
    size = qm.rows
    term = mpmath.eye(size)
    step = mpmath.eye(size)
    for k in range(1, 5):
        term = term * (qm * h) / k
        step = step + term
    prop = step**m if m > 1 else step
    scale = mpmath.mpf(2) ** bits
    return [[int(mpmath.nint(prop[i, j] * scale)) for j in range(size)] for i in range(size)]


def _mp_subspace_run(q, z0, grid, step, dps):
    """RK4 frames carried with ``dps`` significant digits, returned as orthonormal bases.

    The propagator is formed once in extended precision; the frames are
    then propagated in fixed-point integer arithmetic with the same number
    of bits.  Only the spanned subspaces are kept: the frame is
    re-orthonormalised at every grid point, which leaves the span of a
    linear flow unchanged.  The coarse run (double step) is propagated
    alongside for the Richardson estimate.
    """
    z0 = np.asarray(z0).real
    bits = max(64, int(np.ceil(dps * np.log2(10))))
    fine, coarse = [], []
    with mpmath.workdps(dps + 10):
        zf = _fx_orthonormal([[int(mpmath.nint(mpmath.mpf(float(v)) * 2**bits)) for v in col] for col in z0.T], bits)
        zc = zf
        cache = {}
        fine.append(_fx_to_float(zf, bits))
        coarse.append(_fx_to_float(zc, bits))
        for delta, m, key in _interval_plan(grid, step):
            if key not in cache:
                h = mpmath.mpf(delta) / m
                cache[key] = (_mp_rk4_rows(q, h, m, bits), _mp_rk4_rows(q, 2 * h, m // 2, bits))
            pf, pc = cache[key]
            zf = _fx_orthonormal(_fx_apply(pf, zf, bits), bits)
            zc = _fx_orthonormal(_fx_apply(pc, zc, bits), bits)
            fine.append(_fx_to_float(zf, bits))
            coarse.append(_fx_to_float(zc, bits))
    return np.array(fine), np.array(coarse)


def _subspace_richardson(fine, coarse):
    worst = 0.0
    for a, b in zip(fine, coarse):
        # projector distance between two orthonormal bases
        worst = max(worst, float(np.linalg.norm(a @ a.T - b @ b.T, 2)))
    return worst / 15


def _richardson(fine, coarse):
    diff = np.linalg.norm((fine - coarse).reshape(len(fine), -1), axis=1) / 15
    scale = np.maximum(1.0, np.linalg.norm(fine.reshape(len(fine), -1), axis=1))
    return float(np.max(diff / scale))


def integrate_jacobi(omega, p, l0, ldot0, grid, step=DEFAULT_STEP, tol=1e-8):
    """Integrate ``X'' - 2 w X' + p X = 0`` for a matrix of initial data.

    Parameters
    ----------
    omega, p : array_like
        Alekseevsky-form data (``p`` here is ``p_B + w^2``).
    l0, ldot0 : array_like
        ``X(grid[0])`` and ``X'(grid[0])``, both ``n x k``.
    grid : array_like
        Output points.  Each interval is subdivided into RK4 steps of at
        most ``step``.
    tol : float
        Upper bound for the relative Richardson error estimate.

    Returns
    -------
    OdeRun
        ``states`` has shape ``(len(grid), 2n, k)`` holding ``[X; X']``.
    """
    q = jacobi_matrix(omega, p)
    n = q.shape[0] // 2
    l0 = np.asarray(l0, dtype=complex).reshape(n, -1)
    ldot0 = np.asarray(ldot0, dtype=complex).reshape(n, -1)
    if l0.shape != ldot0.shape:
        raise InvalidInputError("l0 and ldot0 must have the same shape")
    grid = _check_grid(grid)
    fine, coarse = _linear_run(q, np.vstack([l0, ldot0]), grid, step)
    est = _richardson(fine, coarse)
    if not np.all(np.isfinite(fine)) or est > tol:
        raise AccuracyError(f"RK4 error estimate {est:.3g} exceeds {tol:.3g}; reduce the step")
    return OdeRun(grid=grid, states=fine, max_step_error_estimate=est, system=q, step=step)


def _rk4_sachs_step(tidal, u, s, h):
    def f(v, x):
        return -(x @ x) - tidal(v)

    k1 = f(u, s)
    k2 = f(u + h / 2, s + h / 2 * k1)
    k3 = f(u + h / 2, s + h / 2 * k2)
    k4 = f(u + h, s + h * k3)
    return s + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _advance_sachs(tidal, u, s, b, m):
    h = (b - u) / m
    for k in range(m):
        s = _rk4_sachs_step(tidal, u + k * h, s, h)
        if not np.all(np.isfinite(s)) or np.linalg.norm(s) > BLOWUP_NORM:
            return s, False
    return s, True


def _rk4_linear_tidal(tidal, u, z, h, n):
    def f(v, y):
        return np.vstack([y[n:], -tidal(v) @ y[:n]])

    k1 = f(u, z)
    k2 = f(u + h / 2, z + h / 2 * k1)
    k3 = f(u + h / 2, z + h / 2 * k2)
    k4 = f(u + h, z + h * k3)
    return z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _locate_pole(tidal, u_start, s_start, u_limit, step):
    """First zero of det L for L' = S L, L(u_start) = I, located to ~1e-9."""
    n = s_start.shape[0]
    z0 = np.vstack([np.eye(n), s_start]).astype(complex)
    h = step / 4

    def state(x):
        m = max(4, int(np.ceil((x - u_start) / h)))
        hx = (x - u_start) / m
        z = z0
        for k in range(m):
            z = _rk4_linear_tidal(tidal, u_start + k * hx, z, hx, n)
        return z

    # march until the degeneracy measure passes its minimum
    u, z = u_start, z0
    best_u, best_g = u_start, _degeneracy(z0, n)
    while u < u_limit:
        hh = min(h, u_limit - u)
        z = _rk4_linear_tidal(tidal, u, z, hh, n)
        u += hh
        g = _degeneracy(z, n)
        if g > best_g:
            break
        best_u, best_g = u, g
    res = minimize_scalar(
        lambda d: _degeneracy(state(best_u + d), n),
        bounds=(max(u_start, best_u - 2 * h) - best_u, 2 * h),
        method="bounded",
        options={"xatol": 1e-11},
    )
    return float(best_u + res.x)


def integrate_sachs(tidal, s0, grid, step=DEFAULT_STEP):
    """Integrate ``S' + S^2 + p(u) = 0`` from ``S(grid[0]) = s0``.

    ``tidal`` is a callable returning the symmetric matrix ``p(u)``.  The
    run stops when ``|S| > 1e8``; the singularity is then located from the
    linearisation ``L' = S L`` (it is a zero of ``det L``) and stored in
    ``blowup``.  ``states`` then only covers the grid before the pole.
    """
    s0 = check_square(s0, "s0")
    grid = _check_grid(grid)
    fine = [s0]
    coarse = [s0]
    sf = s0
    sc = s0
    blowup = None
    for a, b in zip(grid[:-1], grid[1:]):
        m = _substeps(b - a, step)
        sf_new, ok_f = _advance_sachs(tidal, a, sf, b, m)
        sc_new, ok_c = _advance_sachs(tidal, a, sc, b, m // 2)
        if not ok_f:
            # restart the localisation from the last point with modest |S|
            idx = len(fine) - 1
            while idx > 0 and np.linalg.norm(fine[idx]) > 1e3:
                idx -= 1
            blowup = _locate_pole(tidal, grid[idx], fine[idx], b + step, step)
            break
        sf, sc = sf_new, sc_new
        fine.append(sf)
        coarse.append(sc)
    fine = np.array(fine)
    coarse = np.array(coarse)
    # error estimate over the part of the run with moderate norm
    mask = np.linalg.norm(fine.reshape(len(fine), -1), axis=1) < 1e4
    est = _richardson(fine[mask], coarse[mask]) if mask.any() else np.inf
    return OdeRun(
        grid=grid[: len(fine)],
        states=fine,
        max_step_error_estimate=est,
        blowup=blowup,
        step=step,
    )


def _degeneracy(z, n):
    q, _ = np.linalg.qr(z)
    return float(np.linalg.svd(q[:n], compute_uv=False)[-1])


def frame_degeneracy(states):
    """Smallest singular value of the top block of the orthonormalised frame.

    For a Lagrangian frame ``[L; L']`` this is 0 exactly where ``L`` is
    singular and is scale-free otherwise.
    """
    states = np.asarray(states)
    n = states.shape[1] // 2
    q, _ = np.linalg.qr(states)
    return np.linalg.svd(q[:, :n, :], compute_uv=False)[:, -1]


def _reintegrate(run, idx, u):
    """State at ``u`` by RK4 from the stored state ``idx``, step <= step/10."""
    q = run.system
    u0 = run.grid[idx]
    z = run.states[idx]
    if u == u0:
        return z
    m = max(2, int(np.ceil(abs(u - u0) / (run.step / 10))))
    return np.linalg.matrix_power(_rk4_propagator(q, (u - u0) / m), m) @ z


def detect_conjugate(run, threshold=1e-6, skip=None):
    """Points ``u > grid[0]`` where the Jacobi frame of ``run`` is singular.

    Local minima of :func:`frame_degeneracy` on the grid are refined with a
    bounded Brent search on re-integrated states (accuracy ~1e-10 in ``u``);
    a minimum counts as a conjugate point when the degeneracy there is
    below ``threshold``.  Sign changes of ``det`` are not used because
    conjugate points of multiplicity two (e.g. ``det L = sin(u)^2``) do not
    change sign.
    """
    if run.system is None:
        raise InvalidInputError("run does not carry a linear system")
    grid = run.grid
    n = run.states.shape[1] // 2
    g = frame_degeneracy(run.states)
    if skip is None:
        skip = 10 * run.step
    found = []
    interior = np.arange(1, len(grid) - 1)
    is_min = (g[interior] <= g[interior - 1]) & (g[interior] <= g[interior + 1])
    candidates = interior[is_min]
    # a minimum at the right edge is kept too
    if len(grid) > 1 and g[-1] < g[-2]:
        candidates = np.append(candidates, len(grid) - 1)
    for i in candidates:
        if grid[i] - grid[0] < skip:
            continue
        lo = grid[i - 1]
        hi = grid[min(i + 1, len(grid) - 1)]
        if g[i] > 0.05:
            continue

        # Brent's tolerance is relative to |x|, so search in an offset from
        # the grid point to keep the absolute accuracy near 1e-11
        def obj(d, i=i):
            return _degeneracy(_reintegrate(run, i - 1, grid[i] + d), n)

        res = minimize_scalar(
            obj, bounds=(lo - grid[i], hi - grid[i]), method="bounded", options={"xatol": 1e-11}
        )
        if res.fun <= threshold:
            found.append(float(grid[i] + res.x))
    found.sort()
    out = []
    for u in found:
        if not out or u - out[-1] > 1e-8:
            out.append(u)
    return out


def precision_needed(omega, p, span):
    """Decimal digits lost to growth over ``span``: ``2 a span / ln 10``.

    ``a`` is the largest real part of the spectrum of the Jacobi generator
    (Alekseevsky data).
    """
    a = max(0.0, float(np.max(np.linalg.eigvals(jacobi_matrix(omega, p)).real)))
    return 2 * a * span / np.log(10)


def conjugate_points(omega, p, u_max, u0=0.0, step=DEFAULT_STEP, form="alekseevsky", dps=None):
    """Conjugate points of ``u0`` in ``(u0, u_max]`` from the oracle.

    The frame starts at ``X(u0) = 0, X'(u0) = I``.  For ``form="brinkmann"``
    ``p`` is converted to the Alekseevsky potential ``p + w^2`` first; the
    conjugate points coincide because the two frames differ by a rotation.

    ``dps`` selects the arithmetic of the propagation: ``None`` picks double
    precision when :func:`precision_needed` is below 6 digits and otherwise
    ``20 + ceil(digits)`` decimal digits; ``0`` forces double precision.  In
    extended precision the frames are stored every ten RK4 steps and the
    refinement near each root is done in double precision from there, which
    is harmless because the amplification over one grid cell is tiny.
    """
    omega = np.asarray(omega, dtype=float)
    p = np.asarray(p, dtype=float)
    if form == "brinkmann":
        p = p + omega @ omega
    n = p.shape[0]
    if dps is None:
        digits = precision_needed(omega, p, u_max - u0)
        dps = 0 if digits < 6 else 20 + int(np.ceil(digits))
    if not dps:
        grid = uniform_grid(u0, u_max, step)
        run = integrate_jacobi(omega, p, np.zeros((n, n)), np.eye(n), grid, step=step)
        return detect_conjugate(run)
    q = jacobi_matrix(omega, p)
    grid = uniform_grid(u0, u_max, 10 * step)
    z0 = np.vstack([np.zeros((n, n)), np.eye(n)])
    fine, coarse = _mp_subspace_run(q, z0, grid, step, dps)
    est = _subspace_richardson(fine, coarse)
    if est > 1e-8:
        raise AccuracyError(f"RK4 error estimate {est:.3g} exceeds 1e-08; reduce the step")
    run = OdeRun(grid=grid, states=fine.astype(complex), max_step_error_estimate=est, system=q, step=step)
    return detect_conjugate(run)


def symplectic_pairing(run, i, j, omega):
    """``X_i^T X_j' - X_j^T X_i' - 2 X_i^T w X_j`` along ``run`` for columns i, j."""
    omega = np.asarray(omega)
    n = run.states.shape[1] // 2
    x = run.states[:, :n, i]
    xd = run.states[:, n:, i]
    y = run.states[:, :n, j]
    yd = run.states[:, n:, j]
    return (
        np.einsum("ki,ki->k", x, yd)
        - np.einsum("ki,ki->k", y, xd)
        - 2 * np.einsum("ki,ij,kj->k", x, omega, y)
    )
