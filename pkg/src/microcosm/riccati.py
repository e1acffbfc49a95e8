"""Constant solutions of the algebraic Sachs equation.

A constant symmetric ``X`` with

    X^2 - w X + X w + p = 0

corresponds to a Lagrangian subspace ``[alpha; gamma]`` invariant under the
Hamiltonian matrix ``Z = [[w, I], [-p, w]]``, via ``X = gamma alpha^{-1}``.
Such subspaces are built by symplectic deflation: take an eigenvector
``v`` of ``Z``, pass to the ``J``-orthogonal complement of ``v`` (which is
``Z``-invariant and contains ``v``), drop ``v``, and repeat on the
induced ``2(n-1)``-dimensional Hamiltonian problem.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import DegeneracyError, InvalidInputError, NumericalError
from .matcore import check_skew, check_square, check_symmetric, subspace_maps, symplectic_form

__all__ = [
    "HamiltonianMatrix",
    "LagrangianFrame",
    "build_hamiltonian",
    "invariant_lagrangian_frame",
    "complementary_frame",
    "solve_algebraic_sachs",
    "algebraic_residual",
    "genericity_check",
]

_TIE_TOL = 1e-9


@dataclass(frozen=True)
class HamiltonianMatrix:
    z: np.ndarray
    j: np.ndarray

    @property
    def n(self):
        return self.z.shape[0] // 2

    def residual(self):
        return float(np.linalg.norm(self.z.T @ self.j + self.j @ self.z))


@dataclass(frozen=True)
class LagrangianFrame:
    """Orthonormal ``2n x n`` frame ``u`` with ``Z u = u sigma``, ``u^T J u = 0``."""

    u: np.ndarray
    sigma: np.ndarray

    @property
    def alpha(self):
        return self.u[: self.u.shape[1]]

    @property
    def gamma(self):
        return self.u[self.u.shape[1]:]

    def residuals(self, h):
        return {
            "invariance": float(np.linalg.norm(h.z @ self.u - self.u @ self.sigma)),
            "lagrangian": float(np.linalg.norm(self.u.T @ h.j @ self.u)),
            "orthonormal": float(np.linalg.norm(self.u.conj().T @ self.u - np.eye(self.u.shape[1]))),
        }


def build_hamiltonian(omega, p):
    """``Z = [[w, I], [-p, w]]`` with ``J = [[0, -I], [I, 0]]``."""
    omega = check_skew(omega, "omega")
    p = check_symmetric(p, "p")
    if omega.shape != p.shape:
        raise InvalidInputError("omega and p must have the same shape")
    n = p.shape[0]
    z = np.block([[omega, np.eye(n)], [-p, omega]])
    return HamiltonianMatrix(z=z, j=symplectic_form(n))


def _as_hamiltonian(h):
    z = check_square(h.z, "z")
    if z.shape[0] % 2:
        raise InvalidInputError("Hamiltonian matrix must have even size")
    res = np.linalg.norm(z.T @ h.j + h.j @ z)
    if res > 1e-10 * max(1.0, np.linalg.norm(z)):
        raise InvalidInputError("z violates the Hamiltonian invariant z^T J + J z = 0")
    return z


def _eig_order(evals):
    """Indices sorted by descending real part, then descending imaginary part."""
    scale = max(1.0, float(np.max(np.abs(evals)))) if evals.size else 1.0
    keys = [(-round(ev.real / scale, 8), -round(ev.imag / scale, 8)) for ev in evals]
    return sorted(range(len(evals)), key=lambda k: keys[k])


def _schur_vector(t, q, k):
    """First Schur vector after moving diagonal entry ``k`` to the top."""
    if k == 0:
        return q[:, 0]
    t2, q2, info = lapack.ztrexc(t, q, k + 1, 1)
    if info != 0:
        raise NumericalError("Schur reordering failed")
    return q2[:, 0]


def _candidates(zk, order, t, q, evals):
    """Eigenvector candidates, one group per distinct eigenvalue."""
    seen = []
    scale = max(1.0, np.linalg.norm(zk))
    for k in order:
        lam = evals[k]
        if any(abs(lam - mu) <= 1e-6 * scale for mu in seen):
            continue
        seen.append(lam)
        vecs = [_schur_vector(t, q, k)]
        maps = subspace_maps(zk - lam * np.eye(zk.shape[0]), tol=1e-9)
        if maps.ker.shape[1] > 1:
            vecs.append(maps.ker)
        yield vecs


def _pick_in_space(basis, space, frame_top, n):
    """Vector of ``space`` (coords in ``basis``) whose top part is most independent."""
    top = (basis @ space)[:n]
    if frame_top.shape[1]:
        qf, _ = np.linalg.qr(frame_top)
        top = top - qf @ (qf.conj().T @ top)
    _, _, vh = np.linalg.svd(top)
    v = space @ vh[0].conj()
    return v / np.linalg.norm(v)


def _top_sigma(frame, n):
    return float(np.linalg.svd(frame[:n], compute_uv=False)[-1])


def _deflate(h, complementary):
    z = _as_hamiltonian(h)
    j = h.j
    n = z.shape[0] // 2
    basis = np.eye(2 * n, dtype=complex)
    columns = []
    for _ in range(n):
        zk = basis.conj().T @ z @ basis
        jk = basis.T @ j @ basis
        t, q = scipy.linalg.schur(zk.astype(complex), output="complex")
        evals = np.diag(t)
        order = _eig_order(evals)
        current = np.array(columns).T if columns else np.zeros((2 * n, 0), dtype=complex)
        chosen = None
        best = None
        for group in _candidates(zk, order, t, q, evals):
            for cand in group:
                if cand.ndim == 2:
                    cand = _pick_in_space(basis, cand, current[:n], n)
                if not complementary:
                    chosen = cand
                    break
                score = _top_sigma(np.column_stack([current, basis @ cand]), n)
                # strict comparison keeps the earliest candidate on ties
                if best is None or score > best[0] * (1 + _TIE_TOL):
                    best = (score, cand)
            if chosen is not None:
                break
        if chosen is None:
            if best is None:
                raise NumericalError("no eigenvector found")
            chosen = best[1]
        vk = chosen / np.linalg.norm(chosen)
        columns.append(basis @ vk)
        # J-orthogonal complement of v inside the current space, minus v itself
        perp = subspace_maps((vk @ jk)[None, :]).ker
        perp = perp - np.outer(vk, vk.conj() @ perp)
        nxt = subspace_maps(perp, tol=1e-8).im
        basis = basis @ nxt
    u = np.array(columns).T
    # re-orthonormalise against round-off; triangular R keeps the flag
    u, _ = np.linalg.qr(u)
    sigma = u.conj().T @ z @ u
    return LagrangianFrame(u=u, sigma=np.triu(sigma))


def invariant_lagrangian_frame(h):
    """A ``Z``-invariant Lagrangian frame by recursive eigenvector deflation.

    Eigenvalues are taken in the order (descending real part, descending
    imaginary part); the eigenvector is the leading Schur vector after
    reordering, which is well defined for defective eigenvalues too.
    """
    return _deflate(h, complementary=False)


def complementary_frame(h):
    """Invariant Lagrangian frame whose top block ``alpha`` is invertible.

    At each deflation step every eigenvector candidate is scored by the
    smallest singular value of the top block of the extended partial frame
    and the best one is used (the earliest in the documented order on
    ties).  Taking merely the first acceptable candidate can give a nearly
    vertical frame and hence a solution ``X`` of large norm, which costs
    accuracy in every closed form built on it.  Raises
    ``DegeneracyError`` if the final ``alpha`` is singular.
    """
    frame = _deflate(h, complementary=True)
    sv = np.linalg.svd(frame.alpha, compute_uv=False)
    if sv[-1] < 1e-10 * max(sv[0], 1e-300):
        raise DegeneracyError("no invariant Lagrangian frame complementary to [0; I] found")
    return frame


def algebraic_residual(x, omega, p):
    """``X^2 - w X + X w + p``."""
    return x @ x - omega @ x + x @ omega + p


def solve_algebraic_sachs(omega, p):
    """A complex symmetric solution of ``X^2 - w X + X w + p = 0``.

    Returns ``X = gamma alpha^{-1}`` from :func:`complementary_frame`.
    """
    h = build_hamiltonian(omega, p)
    frame = complementary_frame(h)
    return np.linalg.solve(frame.alpha.T, frame.gamma.T).T


def genericity_check(s0, omega, tol=1e-8):
    """True iff ``w - s0`` and ``w + s0`` have no common eigenvalue."""
    s0 = check_square(s0, "s0")
    omega = check_square(omega, "omega")
    if s0.shape != omega.shape:
        raise InvalidInputError("s0 and omega must have the same shape")
    a = np.linalg.eigvals(omega - s0)
    b = np.linalg.eigvals(omega + s0)
    return bool(np.min(np.abs(a[:, None] - b[None, :])) > tol)
