"""Entire functions used by the Sachs-equation closed forms.

Definitions (``z`` complex)::

    c(z) = sum (-z)^n / (2n)!       = cos(sqrt z)
    s(z) = sum (-z)^n / (2n+1)!     = sin(sqrt z) / sqrt z
    T(z) = s(z) / c(z)              = tan(x) / x,   x^2 = z
    U(z) = c(z) / s(z)              = x cot(x)
    E(z) = (e^z - 1) / z
    sigma(z) = sinh(z) / z
    gamma(z) = 2 (cosh z - 1) / z^2

``c, s, T, U`` are functions of the squared variable; ``sigma`` and
``gamma`` are even in their argument.  Matrix arguments are evaluated
through exponentials of augmented block matrices, which is exact for
defective and nilpotent arguments.
"""

import enum
import math
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, PoleError
from .matcore import check_square

__all__ = [
    "EntireFn",
    "eval_scalar",
    "eval_matrix",
    "series_coeffs",
    "series_coeffs_exact",
    "POLE_TOL",
]

POLE_TOL = 1e-13
_SERIES_RADIUS = 1.0
_NTERMS = 30


class EntireFn(enum.Enum):
    C = "c"
    S = "s"
    T = "T"
    U = "U"
    E = "E"
    SIGMA = "sigma"
    GAMMA = "gamma"

    @classmethod
    def coerce(cls, f):
        if isinstance(f, cls):
            return f
        for member in cls:
            if f in (member.value, member.name, member.name.lower()):
                return member
        raise InvalidInputError(f"unknown entire function {f!r}")


# Power-series coefficients in the natural variable of each function:
# c, s in z; E in z; sigma, gamma in z**2.
def _base_coeffs(f, nterms=_NTERMS):
    k = np.arange(nterms)
    fact = np.array([math.factorial(int(j)) for j in range(2 * nterms + 3)], dtype=float)
    if f is EntireFn.C:
        return (-1.0) ** k / fact[2 * k]
    if f is EntireFn.S:
        return (-1.0) ** k / fact[2 * k + 1]
    if f is EntireFn.E:
        return 1.0 / fact[k + 1]
    if f is EntireFn.SIGMA:
        return 1.0 / fact[2 * k + 1]
    if f is EntireFn.GAMMA:
        return 2.0 / fact[2 * k + 2]
    raise AssertionError(f)


_COEFFS = {f: _base_coeffs(f) for f in (EntireFn.C, EntireFn.S, EntireFn.E, EntireFn.SIGMA, EntireFn.GAMMA)}


def _horner(coeffs, x):
    out = np.zeros_like(x)
    for a in coeffs[::-1]:
        out = out * x + a
    return out


def _entire_scalar(f, z):
    small = np.abs(z) <= _SERIES_RADIUS
    # closed forms are evaluated on a safe copy so that z=0 never divides
    zs = np.where(small, 2.0, z)
    if f is EntireFn.C:
        closed = np.cos(np.sqrt(zs))
        series = _horner(_COEFFS[f], z)
    elif f is EntireFn.S:
        r = np.sqrt(zs)
        closed = np.sin(r) / r
        series = _horner(_COEFFS[f], z)
    elif f is EntireFn.E:
        closed = np.expm1(zs) / zs
        series = _horner(_COEFFS[f], z)
    elif f is EntireFn.SIGMA:
        closed = np.sinh(zs) / zs
        series = _horner(_COEFFS[f], z * z)
    else:
        closed = 2.0 * (np.cosh(zs) - 1.0) / (zs * zs)
        series = _horner(_COEFFS[f], z * z)
    return np.where(small, series, closed)


def eval_scalar(f, z):
    """Evaluate ``f`` at complex ``z`` (scalar or array, elementwise).

    ``T`` and ``U`` are evaluated as quotients of ``s`` and ``c``; a
    denominator below ``POLE_TOL`` times the numerator raises ``PoleError``.
    """
    f = EntireFn.coerce(f)
    zarr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(zarr)):
        raise InvalidInputError("non-finite argument")
    if f in (EntireFn.T, EntireFn.U):
        cval = _entire_scalar(EntireFn.C, zarr)
        sval = _entire_scalar(EntireFn.S, zarr)
        num, den = (sval, cval) if f is EntireFn.T else (cval, sval)
        bad = np.abs(den) < POLE_TOL * np.maximum(np.abs(num), 1e-300)
        if np.any(bad):
            loc = zarr[bad].ravel()[0] if zarr.ndim else complex(zarr)
            raise PoleError(f"{f.value}(z) has a pole at z={loc}", location=loc)
        out = num / den
    else:
        out = _entire_scalar(f, zarr)
    return out[()] if out.ndim == 0 else out


def _expm_block(blocks):
    return scipy.linalg.expm(np.block(blocks))


def _even_from_square(f, nsq):
    """sigma or gamma evaluated at sqrt(nsq) for a square matrix ``nsq``."""
    n = nsq.shape[0]
    eye = np.eye(n)
    zero = np.zeros((n, n))
    y = np.block([[zero, eye], [nsq, zero]])
    if f is EntireFn.SIGMA:
        return scipy.linalg.expm(y)[:n, n:]
    # exp([[Y, B], [0, 0]]) holds phi_1(Y) B; its top block is gamma(M)/2
    b = np.vstack([zero, eye])
    big = np.block([[y, b], [np.zeros((n, 2 * n)), zero]])
    return 2.0 * scipy.linalg.expm(big)[:n, 2 * n:]


def _check_pole(den, f, m):
    sv = np.linalg.svd(den, compute_uv=False)
    if sv[-1] <= POLE_TOL * max(sv[0], 1.0):
        ev = np.linalg.eigvals(m)
        raise PoleError(f"{f.value}(m) has an eigenvalue at a pole", location=ev)


def eval_matrix(f, m, of_square=False):
    """Evaluate ``f`` on a square matrix argument.

    With ``of_square=True`` (only meaningful for the even functions sigma
    and gamma) ``m`` is taken to be the square of the argument, so e.g.
    ``eval_matrix("gamma", N, of_square=True) == gamma(sqrt(N))`` for any
    branch.
    """
    f = EntireFn.coerce(f)
    m = check_square(m, "m")
    n = m.shape[0]
    eye = np.eye(n)
    zero = np.zeros((n, n))
    if f in (EntireFn.C, EntireFn.S, EntireFn.T, EntireFn.U):
        block = _expm_block([[zero, eye], [-m, zero]])
        cval, sval = block[:n, :n], block[:n, n:]
        if f is EntireFn.C:
            return cval
        if f is EntireFn.S:
            return sval
        num, den = (sval, cval) if f is EntireFn.T else (cval, sval)
        _check_pole(den, f, m)
        return np.linalg.solve(den, num)
    if f is EntireFn.E:
        if of_square:
            raise InvalidInputError("E is not even; of_square is not supported")
        return _expm_block([[m, eye], [zero, zero]])[:n, n:]
    nsq = m if of_square else m @ m
    return _even_from_square(f, nsq)


def series_coeffs(f, order):
    """Taylor coefficients ``a_0..a_order`` of ``f`` in its natural variable.

    For ``T`` and ``U`` the coefficients come from power-series division of
    the ``s`` and ``c`` series (variable ``z``); for sigma/gamma the
    variable is ``z**2``.
    """
    f = EntireFn.coerce(f)
    if f in (EntireFn.T, EntireFn.U):
        cc = _base_coeffs(EntireFn.C, order + 1)
        sc = _base_coeffs(EntireFn.S, order + 1)
        num, den = (sc, cc) if f is EntireFn.T else (cc, sc)
        return _series_divide(num, den, order)
    return _base_coeffs(f, order + 1)[: order + 1]


def series_coeffs_exact(f, order):
    """Same as :func:`series_coeffs` in exact rational arithmetic."""
    f = EntireFn.coerce(f)
    fact = math.factorial
    c = [Fraction((-1) ** k, fact(2 * k)) for k in range(order + 1)]
    s = [Fraction((-1) ** k, fact(2 * k + 1)) for k in range(order + 1)]
    if f is EntireFn.T:
        return _series_divide(s, c, order)
    if f is EntireFn.U:
        return _series_divide(c, s, order)
    if f is EntireFn.C:
        return c
    if f is EntireFn.S:
        return s
    if f is EntireFn.E:
        return [Fraction(1, fact(k + 1)) for k in range(order + 1)]
    if f is EntireFn.SIGMA:
        return [Fraction(1, fact(2 * k + 1)) for k in range(order + 1)]
    return [Fraction(2, fact(2 * k + 2)) for k in range(order + 1)]


def _series_divide(num, den, order):
    out = []
    for k in range(order + 1):
        acc = num[k] - sum(out[j] * den[k - j] for j in range(k))
        out.append(acc / den[0])
    return np.array(out) if isinstance(num, np.ndarray) else out
