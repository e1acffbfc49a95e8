"""Dense complex matrix substrate.

Four-subspace maps from the SVD, a Sylvester-type solver on symmetric
matrices that tolerates the resonant (singular) case, the matrix
exponential and the symmetric/skew split.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInputError

__all__ = [
    "SubspaceMaps",
    "as_matrix",
    "check_square",
    "check_symmetric",
    "check_skew",
    "subspace_maps",
    "sym_basis",
    "sylvester_symmetric",
    "mat_exp",
    "sym_skew_split",
    "symplectic_form",
    "subspace_gap",
]


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D complex array."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {a.shape}")
    a = a.astype(complex)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return a


def check_square(a, name="matrix"):
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
    return a


def _scale(a):
    return max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0


def check_symmetric(a, name="matrix", tol=1e-12):
    a = check_square(a, name)
    if np.max(np.abs(a - a.T), initial=0.0) > tol * _scale(a):
        raise InvalidInputError(f"{name} violates the symmetry invariant a == a.T")
    return a


def check_skew(a, name="omega", tol=1e-12):
    a = check_square(a, name)
    if np.max(np.abs(a + a.T), initial=0.0) > tol * _scale(a):
        raise InvalidInputError(f"{name} violates the skewness invariant a == -a.T")
    return a


@dataclass(frozen=True)
class SubspaceMaps:
    """Orthonormal frames for the four fundamental subspaces of a matrix.

    ``im``/``ker`` are the range and null space of ``a``; ``im_t``/``ker_t``
    are the range of the adjoint (co-image) and the orthogonal complement
    of the range.  For real input the adjoint is the transpose.
    """

    im: np.ndarray
    ker: np.ndarray
    im_t: np.ndarray
    ker_t: np.ndarray
    rank: int
    tol: float


def subspace_maps(a, tol=0.0):
    """Compute the four subspace frames of ``a`` from a full SVD.

    Singular values above ``tol * sigma_max`` count towards the rank; the
    default ``tol=0`` means ``2 * max(m, n) * eps``.
    """
    a = as_matrix(a, "a")
    if tol < 0:
        raise InvalidInputError("tol must be non-negative")
    m, n = a.shape
    if tol == 0:
        tol = 2 * max(m, n, 1) * np.finfo(float).eps
    u, s, vh = scipy.linalg.svd(a, full_matrices=True, lapack_driver="gesvd")
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    v = vh.conj().T
    return SubspaceMaps(
        im=u[:, :rank],
        ker=v[:, rank:],
        im_t=v[:, :rank],
        ker_t=u[:, rank:],
        rank=rank,
        tol=tol,
    )


def sym_basis(n):
    """Real basis of n x n symmetric matrices, orthonormal in tr(XY)."""
    basis = []
    for i in range(n):
        for j in range(i, n):
            e = np.zeros((n, n))
            if i == j:
                e[i, i] = 1.0
            else:
                e[i, j] = e[j, i] = np.sqrt(0.5)
            basis.append(e)
    return np.array(basis)


def _sym_coords(x, basis):
    return np.einsum("kij,ij->k", basis, x)


def sylvester_symmetric(a, c):
    """Split symmetric ``c`` as ``a h0 + h0 a^T + m0`` with ``a^T m0 + m0 a = 0``.

    Works on the n(n+1)/2-dimensional space of symmetric matrices with the
    trace form.  ``m0`` is the component of ``c`` in ``ker(X -> a^T X + X a)``
    complementary to the image of ``F(X) = a X + X a^T`` (the orthogonal
    projection when ``a`` is real), and ``h0`` is the least-norm solution of
    ``F(h0) = c - m0``.  Returns ``(h0, m0)``.
    """
    a = check_square(a, "a")
    c = check_symmetric(c, "c", tol=1e-10)
    n = a.shape[0]
    basis = sym_basis(n)
    # columns: coordinates of F(E_k); the basis is real and trace-orthonormal,
    # so the plain transpose represents the adjoint X -> a^T X + X a
    fmat = np.array([_sym_coords(a @ e + e @ a.T, basis) for e in basis]).T
    cvec = _sym_coords(c, basis)
    maps = subspace_maps(fmat, tol=1e-12)
    kern = maps.ker_t.conj()  # null space of fmat.T
    if kern.shape[1] == 0:
        hvec = np.linalg.solve(fmat, cvec)
        m0 = np.zeros((n, n), dtype=complex)
    else:
        aug = np.hstack([fmat, kern])
        sol = np.linalg.lstsq(aug, cvec, rcond=None)[0]
        mvec = kern @ sol[fmat.shape[1]:]
        hvec = np.linalg.pinv(fmat, rcond=1e-12) @ (cvec - mvec)
        m0 = np.einsum("k,kij->ij", mvec, basis)
    h0 = np.einsum("k,kij->ij", hvec, basis)
    return h0, m0


def mat_exp(a):
    """Matrix exponential (Pade scaling and squaring); ``mat_exp(0) == I``."""
    a = check_square(a, "a")
    if not np.any(a):
        return np.eye(a.shape[0], dtype=complex)
    return scipy.linalg.expm(a)


def sym_skew_split(a):
    """Return ``((a + a^T)/2, (a - a^T)/2)``."""
    a = check_square(a, "a")
    return (a + a.T) / 2, (a - a.T) / 2


def symplectic_form(n):
    """The fixed 2n x 2n form ``[[0, -I], [I, 0]]``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def _orth(frame):
    q, r = np.linalg.qr(frame)
    return q


def subspace_gap(x, y):
    """Spectral-norm distance between the orthogonal projectors onto span x, span y."""
    qx = _orth(np.asarray(x, dtype=complex))
    qy = _orth(np.asarray(y, dtype=complex))
    return float(np.linalg.norm(qx @ qx.conj().T - qy @ qy.conj().T, 2))
