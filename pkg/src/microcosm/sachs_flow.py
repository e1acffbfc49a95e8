"""Closed-form solutions of the Sachs equation on microcosms.

In Brinkmann form the tidal matrix is ``p(u) = exp(-w u) p exp(w u)`` and
the Sachs equation is ``S' + S^2 + p(u) = 0``.  Given any constant
complex symmetric ``Sigma`` with ``Sigma^2 + [Sigma, w] + p = 0`` the
general solution with ``S(0) = S0`` is

    S(u) = e^{-wu} [Sigma + e^{(w - Sigma)u} F(u)^{-1} D e^{-(Sigma + w)u}] e^{wu}

with ``D = S0 - Sigma`` and ``F(u) = I + D K(u)``, where

    K(u) = int_0^u e^{-(Sigma + w)t} e^{(w - Sigma)t} dt.

``K`` is computed exactly as ``u phi_1(u M) vec(I)`` for the Kronecker sum
``M``, using one exponential of an augmented matrix.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .efuncs import eval_matrix
from .errors import InvalidInputError, PoleError
from .matcore import check_skew, check_square, check_symmetric, mat_exp

__all__ = [
    "COND_LIMIT",
    "SachsIVP",
    "make_ivp",
    "constant_p_pair",
    "ivp_omega0",
    "ivp_general",
    "drift_integral",
    "tidal",
    "sachs_residual",
]

COND_LIMIT = 1e12


def _scale(*mats):
    return 1.0 + sum(float(np.linalg.norm(m)) for m in mats)


@dataclass(frozen=True)
class SachsIVP:
    """Microcosm data, a constant solution ``sigma`` and the initial value ``s0``."""

    omega: np.ndarray
    p: np.ndarray
    sigma: np.ndarray
    s0: np.ndarray

    @property
    def n(self):
        return self.p.shape[0]


def make_ivp(omega, p, sigma, s0, tol=1e-8):
    """Validate and build a :class:`SachsIVP`."""
    omega = check_skew(omega, "omega")
    p = check_symmetric(p, "p")
    sigma = check_symmetric(sigma, "sigma", tol=1e-8)
    s0 = check_symmetric(s0, "s0", tol=1e-8)
    if not omega.shape == p.shape == sigma.shape == s0.shape:
        raise InvalidInputError("omega, p, sigma and s0 must share one shape")
    res = sigma @ sigma + sigma @ omega - omega @ sigma + p
    if np.linalg.norm(res) > tol * _scale(p, sigma @ sigma, omega):
        raise InvalidInputError("sigma violates the constant-solution invariant Sigma^2 + [Sigma, w] + p = 0")
    return SachsIVP(omega=omega, p=p, sigma=sigma, s0=s0)


def tidal(omega, p, u):
    """Brinkmann tidal matrix ``exp(-w u) p exp(w u)``."""
    rot = mat_exp(u * np.asarray(omega))
    return rot.T @ np.asarray(p) @ rot


def constant_p_pair(p, t, u):
    """The two canonical solutions for constant ``p`` (``w = 0``).

    Returns ``(S0, Sinf, L0, Linf)`` evaluated at ``u``: ``S0`` vanishes at
    ``u = t`` and ``Sinf`` blows up like ``(u - t)^{-1} I`` there.  ``L0``
    and ``Linf`` satisfy ``L' = S L`` with ``L0(t) = I`` and
    ``Linf(t) = 0, Linf'(t) = -I``.
    """
    p = check_symmetric(p, "p")
    d = t - u
    m = p * d**2
    l0 = eval_matrix("c", m)
    linf = d * eval_matrix("s", m)
    s0 = d * p @ eval_matrix("T", m)
    if d == 0:
        raise PoleError("Sinf has its pole at u = t", location=u)
    sinf = eval_matrix("U", m) / (u - t)
    return s0, sinf, l0, linf


def _check_bracket(bracket, u, scale=1.0):
    """Pole test: ill-conditioned, or small against the terms that cancel in it."""
    sv = np.linalg.svd(bracket, compute_uv=False)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if not np.isfinite(cond) or cond > COND_LIMIT or sv[-1] < scale / COND_LIMIT:
        raise PoleError(f"solution blows up near u={u} (condition number {cond:.3g})", location=u)


def ivp_omega0(sigma, s0, u, p=None):
    """Solution of ``S' + S^2 + p = 0`` with ``S(0) = s0`` for ``w = 0``.

    ``S = Sigma + G [I + u E(2 u Sigma) G]^{-1}`` with
    ``G = e^{-u Sigma} (s0 - Sigma) e^{-u Sigma}``.  When ``p`` is given the
    precondition ``Sigma^2 + p = 0`` is checked.
    """
    sigma = check_symmetric(sigma, "sigma", tol=1e-8)
    s0 = check_symmetric(s0, "s0", tol=1e-8)
    if p is not None:
        p = check_symmetric(p, "p")
        if np.linalg.norm(sigma @ sigma + p) > 1e-8 * _scale(p, sigma @ sigma):
            raise InvalidInputError("sigma violates the invariant Sigma^2 + p = 0")
    n = sigma.shape[0]
    ex = mat_exp(-u * sigma)
    g = ex @ (s0 - sigma) @ ex
    term = u * eval_matrix("E", 2 * u * sigma) @ g
    bracket = np.eye(n) + term
    _check_bracket(bracket, u, 1.0 + np.linalg.norm(term, 2))
    return sigma + g @ np.linalg.inv(bracket)


def drift_integral(a, b, u):
    """``int_0^u exp(a t) exp(b t) dt`` exactly, via the Kronecker sum."""
    a = check_square(a, "a")
    b = check_square(b, "b")
    n = a.shape[0]
    eye = np.eye(n)
    # vec(e^{at} e^{bt}) = exp(t (b^T (+) a)) vec(I) in column-major vec
    ksum = np.kron(eye, a) + np.kron(b.T, eye)
    big = np.zeros((n * n + 1, n * n + 1), dtype=complex)
    big[: n * n, : n * n] = u * ksum
    big[: n * n, n * n] = u * eye.reshape(-1, order="F")
    col = scipy.linalg.expm(big)[: n * n, n * n]
    return col.reshape((n, n), order="F")


def ivp_general(ivp, u):
    """Closed-form ``S(u)`` for a microcosm IVP (Brinkmann form).

    Raises ``PoleError`` when ``F(u)`` is numerically singular
    (condition number above ``COND_LIMIT``).
    """
    omega, sigma = ivp.omega, ivp.sigma
    n = ivp.n
    d = ivp.s0 - sigma
    k = drift_integral(-sigma - omega, -sigma + omega, u)
    dk = d @ k
    f = np.eye(n) + dk
    _check_bracket(f, u, 1.0 + np.linalg.norm(dk, 2))
    corr = mat_exp((omega - sigma) * u) @ np.linalg.solve(f, d) @ mat_exp(-(sigma + omega) * u)
    rot = mat_exp(omega * u)
    return rot.T @ (sigma + corr) @ rot


def sachs_residual(ivp, u, h=1e-5):
    """``S' + S^2 + p(u)`` by centred differences of :func:`ivp_general`."""
    s = ivp_general(ivp, u)
    ds = (ivp_general(ivp, u + h) - ivp_general(ivp, u - h)) / (2 * h)
    return ds + s @ s + tidal(ivp.omega, ivp.p, u)
