"""One-parameter symplectic orbits realising the Grassmannian curve of a microcosm.

For a constant solution ``S0`` of the algebraic Sachs equation put
``A = -(S0 + w)``.  Split the identity as ``I = A H0 + H0 A^T + M0`` with
``A^T M0 + M0 A = 0`` (see :func:`microcosm.matcore.sylvester_symmetric`)
and set

    W = [[-A^T, 0], [M0, A]].

Then ``exp(uW) [I; H0] ~ [I; H(u)]`` with ``H' = exp(uA) exp(uA^T)``, i.e.
the curve of Lagrangian subspaces is an orbit of ``exp(uW)``.

:func:`jacobi_basis_map` moves this picture into Jacobi initial data
``(J(0), J'(0))`` of the Brinkmann form, where the curve is the real
family "fields vanishing at ``u``" and :func:`realize_real_generator`
recovers a real generator for it.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, InvalidInputError
from .matcore import (
    check_skew,
    check_square,
    check_symmetric,
    mat_exp,
    subspace_gap,
    sylvester_symmetric,
    symplectic_form,
)

__all__ = [
    "OrbitGenerator",
    "GrassmannCurvePoint",
    "generator_from_a",
    "build_generator",
    "orbit_point",
    "orbit_h",
    "verify_orbit",
    "jacobi_basis_map",
    "to_alekseevsky_coords",
    "realize_real_generator",
]

_SINGULAR_COND = 1e12


@dataclass(frozen=True)
class OrbitGenerator:
    a: np.ndarray
    h0: np.ndarray
    m0: np.ndarray
    w: np.ndarray

    @property
    def n(self):
        return self.a.shape[0]

    def residuals(self):
        eye = np.eye(self.n)
        j = symplectic_form(self.n)
        return {
            "split": float(np.linalg.norm(self.a @ self.h0 + self.h0 @ self.a.T + self.m0 - eye)),
            "kernel": float(np.linalg.norm(self.a.T @ self.m0 + self.m0 @ self.a)),
            "hamiltonian": float(np.linalg.norm(self.w.T @ j + j @ self.w)),
        }


@dataclass(frozen=True)
class GrassmannCurvePoint:
    """A point of the curve; ``h`` is ``None`` when the point is at infinity."""

    u: float
    frame: np.ndarray
    h: np.ndarray = None

    @property
    def at_infinity(self):
        return self.h is None


def generator_from_a(a, h0=None):
    """Build the generator directly from ``A``.

    ``h0`` may be supplied (any symmetric solution of the split with the
    canonical ``M0``); otherwise the least-norm one is used.
    """
    a = check_square(a, "a")
    n = a.shape[0]
    h_ln, m0 = sylvester_symmetric(a, np.eye(n))
    if h0 is None:
        h0 = h_ln
    else:
        h0 = check_symmetric(h0, "h0", tol=1e-10)
        res = np.linalg.norm(a @ h0 + h0 @ a.T + m0 - np.eye(n))
        if res > 1e-9:
            raise InvalidInputError(f"h0 violates the split identity A H0 + H0 A^T + M0 = I (residual {res:.3g})")
    w = np.block([[-a.T, np.zeros((n, n))], [m0, a]])
    return OrbitGenerator(a=a, h0=h0, m0=m0, w=w)


def build_generator(s0, omega):
    """Generator for the constant Sachs solution ``s0`` with ``A = -(s0 + w)``."""
    s0 = check_symmetric(s0, "s0", tol=1e-8)
    omega = check_skew(omega, "omega")
    if s0.shape != omega.shape:
        raise InvalidInputError("s0 and omega must have the same shape")
    return generator_from_a(-(s0 + omega))


def orbit_point(g, u):
    """``exp(uW) [I; H0]`` and, when its top block is invertible, ``H(u)``."""
    n = g.n
    frame = mat_exp(u * g.w) @ np.vstack([np.eye(n), g.h0])
    top = frame[:n]
    h = None
    if np.linalg.cond(top) < _SINGULAR_COND:
        h = np.linalg.solve(top.T, frame[n:].T).T
    return GrassmannCurvePoint(u=u, frame=frame, h=h)


def orbit_h(g, u):
    """``H(u) = W2 W1^{-1}``; raises ``ConsistencyError`` at infinity."""
    pt = orbit_point(g, u)
    if pt.at_infinity:
        raise ConsistencyError(f"orbit point at u={u} is at infinity")
    return pt.h


def verify_orbit(g, samples, step=1e-5, tol=1e-6):
    """Check ``H' = exp(uA) exp(uA^T)`` and the Lagrangian property.

    Returns a dict with the maximal derivative mismatch (centred
    differences), the maximal ``|frame^T J frame|`` and ``passed``.
    """
    j = symplectic_form(g.n)
    hdot_err = 0.0
    lag_err = 0.0
    for u in samples:
        pt = orbit_point(g, u)
        lag_err = max(lag_err, float(np.linalg.norm(pt.frame.T @ j @ pt.frame)))
        hp = orbit_h(g, u + step)
        hm = orbit_h(g, u - step)
        ea = mat_exp(u * g.a)
        target = ea @ ea.T
        err = np.linalg.norm((hp - hm) / (2 * step) - target) / max(1.0, np.linalg.norm(target))
        hdot_err = max(hdot_err, float(err))
    return {
        "max_hdot_error": hdot_err,
        "max_lagrangian_residual": lag_err,
        "passed": hdot_err <= tol and lag_err <= tol,
    }


def jacobi_basis_map(s0, h0):
    """Symplectic map from orbit coordinates to Brinkmann Jacobi data at 0.

    The orbit coordinates ``(a, b)`` label the field
    ``X(u) = L(u) (H(u) a - b)`` with ``L(u) = exp(u (s0 + w))`` and
    ``H(0) = h0``.  Its data ``(J(0), J'(0))`` are ``T [a; b]`` with

        T = [[h0, -I], [s0 h0 + I, -s0]],

    so ``T [I; H(u)]`` spans the fields vanishing at ``u`` and
    ``T [I; h0] = [0; I]``.  ``T^T J T = J`` for symmetric ``s0, h0``.
    """
    s0 = check_symmetric(s0, "s0", tol=1e-8)
    h0 = check_symmetric(h0, "h0", tol=1e-8)
    n = s0.shape[0]
    eye = np.eye(n)
    return np.block([[h0, -eye], [s0 @ h0 + eye, -s0]])


def to_alekseevsky_coords(omega):
    """``(J, J') -> (X, X')`` at ``u = 0``: ``X = J``, ``X' = J' + w J``."""
    omega = np.asarray(omega)
    n = omega.shape[0]
    return np.block([[np.eye(n), np.zeros((n, n))], [omega, np.eye(n)]])


def realize_real_generator(g, basis_map, samples=None, tol=1e-6):
    """Real Hamiltonian generator of the curve seen through ``basis_map``.

    Returns ``Re(T W T^{-1})`` and checks that ``exp(u X)`` carries
    ``T [I; H0]`` onto ``T exp(uW) [I; H0]`` at the sample points
    (subspace gap below ``tol``).  A failed check raises
    ``ConsistencyError``; it means the transported curve is not real.
    """
    t = check_square(basis_map, "basis_map")
    n = g.n
    j = symplectic_form(n)
    if t.shape[0] != 2 * n:
        raise InvalidInputError("basis_map has the wrong size")
    if np.linalg.norm(t.T @ j @ t - j) > 1e-9 * max(1.0, np.linalg.norm(t) ** 2):
        raise InvalidInputError("basis_map violates the symplectic invariant T^T J T = J")
    z = t @ g.w @ np.linalg.inv(t)
    x_real = z.real
    if samples is None:
        samples = np.linspace(-1.0, 1.0, 20)
    start = t @ np.vstack([np.eye(n), g.h0])
    worst = 0.0
    for u in samples:
        real_curve = mat_exp(u * x_real) @ start
        target = t @ orbit_point(g, u).frame
        worst = max(worst, subspace_gap(real_curve, target))
    if worst > tol:
        raise ConsistencyError(f"real generator misses the curve (gap {worst:.3g})")
    return x_real
