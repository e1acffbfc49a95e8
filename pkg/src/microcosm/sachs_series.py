"""Taylor recursion for the solution of the Sachs equation that blows up at ``t``.

With ``x = u - t`` the solution of ``S' + S^2 + p(u) = 0`` with
``S ~ x^{-1} I`` is written

    S(u) = x^{-1} I - sum_{n >= 0} x^n S_n / n!

and matching powers of ``x`` gives ``S_0 = 0`` and

    S_{n+1} = (n + 1) / (n + 3) * (p_n + sum_m C(n, m) S_m S_{n-m})

where ``p_n`` is the n-th derivative of ``p`` at ``t``.  Object arrays of
``fractions.Fraction`` are supported and give exact coefficients.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import InvalidInputError, PoleError

__all__ = [
    "MAX_ORDER",
    "SachsJet",
    "recursion_coeffs",
    "eval_truncated",
    "eval_truncated_derivative",
    "tidal_from_jet",
]

MAX_ORDER = 30


@dataclass(frozen=True)
class SachsJet:
    """Coefficients ``S_0..S_N`` of the blowing-up solution at ``base``."""

    base: object
    coeffs: tuple
    p_jets: tuple

    @property
    def order(self):
        return len(self.coeffs) - 1

    @property
    def n(self):
        return self.coeffs[0].shape[0]


def _prepare(p, name):
    arr = np.asarray(p)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"{name} must be a square matrix")
    if arr.dtype != object:
        arr = arr.astype(complex if np.iscomplexobj(arr) else float)
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError(f"{name} has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(arr)))) if arr.size else 1.0
        if np.max(np.abs(arr - arr.T), initial=0.0) > 1e-12 * scale:
            raise InvalidInputError(f"{name} violates the symmetry invariant")
    elif np.any(arr != arr.T):
        raise InvalidInputError(f"{name} violates the symmetry invariant")
    return arr


def recursion_coeffs(p_jets, order, base=0, max_order=MAX_ORDER):
    """Run the recursion up to ``S_order``.

    Parameters
    ----------
    p_jets : sequence of symmetric matrices
        ``p(t), p'(t), p''(t), ...``; missing higher derivatives are zero.
    order : int
        Highest coefficient index ``N``.
    base : real, optional
        The blow-up point ``t`` (stored on the jet).
    max_order : int, optional
        Guard against orders where the factorial growth of the
        coefficients makes double precision meaningless.
    """
    if order < 0:
        raise InvalidInputError("order must be non-negative")
    if order > max_order:
        raise InvalidInputError(f"order {order} exceeds the cap {max_order}")
    if len(p_jets) == 0:
        raise InvalidInputError("at least one p jet is required")
    jets = [_prepare(p, f"p_jets[{k}]") for k, p in enumerate(p_jets)]
    shape = jets[0].shape
    if any(j.shape != shape for j in jets):
        raise InvalidInputError("p jets must share one shape")
    exact = jets[0].dtype == object
    zero = jets[0] * 0
    coeffs = [zero]
    for n in range(order):
        pn = jets[n] if n < len(jets) else zero
        acc = pn.copy()
        for m in range(1, n):
            acc = acc + comb(n, m) * coeffs[m].dot(coeffs[n - m])
        if exact:
            nxt = acc * Fraction(n + 1, n + 3)
        else:
            nxt = acc * ((n + 1) / (n + 3))
            nxt = (nxt + nxt.T) / 2
        coeffs.append(nxt)
    return SachsJet(base=base, coeffs=tuple(coeffs), p_jets=tuple(jets))


def _powers(x, count):
    out = [x ** 0]
    for _ in range(count):
        out.append(out[-1] * x)
    return out


def eval_truncated(jet, u):
    """``(u-t)^{-1} I - sum_{n<=N} (u-t)^n S_n / n!``."""
    x = u - jet.base
    if x == 0:
        raise PoleError("the series has its pole at u = t", location=u)
    eye = np.eye(jet.n, dtype=jet.coeffs[0].dtype)
    if jet.coeffs[0].dtype == object:
        eye = np.array(eye.astype(int), dtype=object)
    powers = _powers(x, jet.order)
    out = eye * (1 / x)
    fact = 1
    for n, sn in enumerate(jet.coeffs):
        if n:
            fact *= n
        out = out - sn * (powers[n] / fact)
    return out


def eval_truncated_derivative(jet, u):
    """Derivative in ``u`` of :func:`eval_truncated`."""
    x = u - jet.base
    if x == 0:
        raise PoleError("the series has its pole at u = t", location=u)
    eye = np.eye(jet.n)
    if jet.coeffs[0].dtype == object:
        eye = np.array(eye.astype(int), dtype=object)
    powers = _powers(x, jet.order)
    out = eye * (-1 / (x * x))
    fact = 1
    for n in range(1, jet.order + 1):
        fact *= n
        out = out - jet.coeffs[n] * (n * powers[n - 1] / fact)
    return out


def tidal_from_jet(jet, u):
    """The polynomial ``p(u) = sum_k p_k (u-t)^k / k!`` encoded by the jet."""
    x = u - jet.base
    powers = _powers(x, len(jet.p_jets))
    out = jet.p_jets[0] * 0
    fact = 1
    for k, pk in enumerate(jet.p_jets):
        if k:
            fact *= k
        out = out + pk * (powers[k] / fact)
    return out
