import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from microcosm.errors import ConsistencyError, InvalidInputError
from microcosm.matcore import mat_exp, subspace_gap, symplectic_form
from microcosm.oracle import jacobi_matrix
from microcosm.orbit import (
    build_generator,
    generator_from_a,
    jacobi_basis_map,
    orbit_h,
    orbit_point,
    realize_real_generator,
    to_alekseevsky_coords,
    verify_orbit,
)
from microcosm.riccati import genericity_check, solve_algebraic_sachs

NILPOTENT_A = np.array([[0.0, 1.0], [0.0, 0.0]])
DIAGONAL_A = np.diag([1.0, -1.0])
MIXED_A = np.array([[2.0, -3.0], [1.0, -2.0]])
MIXED_H0 = -np.array([[0.0, 7.0], [7.0, 8.0]]) / 54


def mixed_h(u):
    ep, em = np.exp(2 * u), np.exp(-2 * u)
    off = -432 * u - 135 * em + 81 * ep + 40
    return np.array(
        [
            [27 * (-24 * u - 5 * em + 9 * ep - 4), off],
            [off, -216 * u - 135 * em + 27 * ep + 92],
        ]
    ) / 108


def random_microcosm(rng, n):
    w = rng.uniform(-1, 1, (n, n))
    p = rng.uniform(-1, 1, (n, n))
    return w - w.T, p + p.T


def vanishing_subspace(omega, p_alek, u):
    """Brinkmann Jacobi data (J(0), J'(0)) of fields vanishing at u, in Alekseevsky coordinates."""
    n = p_alek.shape[0]
    top = mat_exp(u * jacobi_matrix(omega, p_alek))[:n]
    return np.linalg.svd(top)[2][n:].conj().T


class TestGenerator:
    def test_nilpotent_generator(self):
        g = generator_from_a(NILPOTENT_A)
        np.testing.assert_allclose(g.m0, [[0, 0], [0, 1]], atol=1e-14)
        res = g.residuals()
        assert res["split"] <= 1e-12 and res["kernel"] <= 1e-12
        g_given = generator_from_a(NILPOTENT_A, h0=np.array([[0, 0.5], [0.5, 0]]))
        assert g_given.residuals()["split"] <= 1e-14

    def test_diagonal_generator(self):
        g = generator_from_a(DIAGONAL_A)
        np.testing.assert_allclose(g.m0, 0, atol=1e-14)
        np.testing.assert_allclose(g.h0, DIAGONAL_A / 2, atol=1e-14)

    def test_mixed_generator(self):
        g = generator_from_a(MIXED_A)
        np.testing.assert_allclose(g.m0, 2 / 9 * np.array([[1, -2], [-2, 3]]), atol=1e-14)
        assert generator_from_a(MIXED_A, h0=MIXED_H0).residuals()["split"] <= 1e-14

    def test_rejects_bad_h0(self):
        with pytest.raises(InvalidInputError, match="split"):
            generator_from_a(MIXED_A, h0=np.eye(2))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.sampled_from([2, 3]))
    def test_hamiltonian_and_lagrangian(self, seed, n):
        omega, p = random_microcosm(np.random.default_rng(seed), n)
        s0 = solve_algebraic_sachs(omega, p)
        g = build_generator(s0, omega)
        res = g.residuals()
        assert res["hamiltonian"] <= 1e-10
        assert res["split"] <= 1e-9 and res["kernel"] <= 1e-9
        j = symplectic_form(n)
        for u in np.linspace(-1, 1, 9):
            frame = orbit_point(g, u).frame
            assert np.linalg.norm(frame.T @ j @ frame) <= 1e-9 * max(1.0, np.linalg.norm(frame) ** 2)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.sampled_from([2, 3]))
    def test_generic_case(self, seed, n):
        omega, p = random_microcosm(np.random.default_rng(seed), n)
        s0 = solve_algebraic_sachs(omega, p)
        if not genericity_check(s0, omega):
            return
        g = build_generator(s0, omega)
        assert np.linalg.norm(g.m0) <= 1e-9
        for u in np.linspace(-0.5, 0.5, 5):
            ea = mat_exp(u * g.a)
            pt = orbit_point(g, u)
            if pt.at_infinity:
                continue
            np.testing.assert_allclose(pt.h, ea @ g.h0 @ ea.T, atol=1e-9 * max(1.0, np.abs(pt.h).max()))


class TestOrbitPoint:
    def test_identity_at_zero(self):
        g = generator_from_a(MIXED_A)
        pt = orbit_point(g, 0.0)
        np.testing.assert_allclose(pt.h, g.h0, atol=1e-15)

    @pytest.mark.parametrize("u", [-0.8, 0.3, 1.7])
    def test_nilpotent_generator_closed_form(self, u):
        h0 = np.array([[0, 0.5], [0.5, 0]])
        g = generator_from_a(NILPOTENT_A, h0=h0)
        expected = np.array([[u**3 / 3 + u, u**2 / 2], [u**2 / 2, u]]) + h0
        np.testing.assert_allclose(orbit_h(g, u), expected, atol=1e-12)

    def test_mixed_generator_closed_form(self):
        g = generator_from_a(MIXED_A, h0=MIXED_H0)
        np.testing.assert_allclose(orbit_h(g, 0.7), mixed_h(0.7), atol=1e-10)
        # the default h0 gives the same curve up to a constant
        g2 = generator_from_a(MIXED_A)
        np.testing.assert_allclose(orbit_h(g2, 0.7) - g2.h0, mixed_h(0.7) - MIXED_H0, atol=1e-10)

    def test_point_at_infinity(self):
        # the top block exp(-u A^T) has condition number exp(40) here
        g = generator_from_a(np.diag([20.0, -20.0]))
        pt = orbit_point(g, 1.0)
        assert pt.at_infinity and pt.h is None
        with pytest.raises(ConsistencyError, match="infinity"):
            orbit_h(g, 1.0)
        assert not orbit_point(g, 0.1).at_infinity


class TestVerifyOrbit:
    def test_diagonal_generator(self):
        g = generator_from_a(DIAGONAL_A)
        rep = verify_orbit(g, np.linspace(-1, 1, 21))
        assert rep["passed"] and rep["max_hdot_error"] <= 1e-8

    def test_zero_generator(self):
        g = generator_from_a(np.zeros((2, 2)))
        np.testing.assert_allclose(g.m0, np.eye(2), atol=1e-15)
        np.testing.assert_allclose(g.h0, 0, atol=1e-15)
        for u in (0.5, 2.0):
            np.testing.assert_allclose(orbit_h(g, u), u * np.eye(2), atol=1e-14)
        assert verify_orbit(g, [0.3, 1.0])["passed"]

    def test_random_n3(self):
        omega, p = random_microcosm(np.random.default_rng(42), 3)
        g = build_generator(solve_algebraic_sachs(omega, p), omega)
        assert verify_orbit(g, np.linspace(-0.5, 0.5, 7))["passed"]


class TestReality:
    def test_intertwiner(self):
        s = np.array([[-0.5, 1j], [0.5j, -1]])
        j = symplectic_form(1)
        np.testing.assert_allclose(s.T @ j @ s, j, atol=1e-15)
        for u in (0.0, 0.4, 2.2):
            e = np.exp(2j * u)
            np.testing.assert_allclose(s @ [-2j * e, 1], [1j * (e + 1), e - 1], atol=1e-14)

    def test_real_generator_is_fixed(self):
        for a in (NILPOTENT_A, DIAGONAL_A, MIXED_A):
            g = generator_from_a(a)
            np.testing.assert_allclose(realize_real_generator(g, np.eye(4)), g.w, atol=1e-15)

    def test_unit_potential_end_to_end(self):
        omega, p = np.zeros((2, 2)), np.eye(2)
        s0 = solve_algebraic_sachs(omega, p)
        assert np.abs(s0.imag).max() > 0.5
        g = build_generator(s0, omega)
        t = jacobi_basis_map(s0, g.h0)
        x = realize_real_generator(g, t, samples=np.linspace(-1, 1, 20))
        assert np.isrealobj(x)
        m0 = to_alekseevsky_coords(omega)
        for u in np.linspace(0.1, 3, 8):
            frame = m0 @ t @ orbit_point(g, u).frame
            assert subspace_gap(frame, vanishing_subspace(omega, p, u)) <= 1e-6

    def test_basis_map_properties(self):
        omega, p = random_microcosm(np.random.default_rng(9), 2)
        s0 = solve_algebraic_sachs(omega, p)
        g = build_generator(s0, omega)
        t = jacobi_basis_map(s0, g.h0)
        j = symplectic_form(2)
        np.testing.assert_allclose(t.T @ j @ t, j, atol=1e-12)
        np.testing.assert_allclose(t @ np.vstack([np.eye(2), g.h0]), np.vstack([np.zeros((2, 2)), np.eye(2)]), atol=1e-12)

    def test_rejects_non_symplectic_map(self):
        g = generator_from_a(DIAGONAL_A)
        with pytest.raises(InvalidInputError, match="symplectic"):
            realize_real_generator(g, 2 * np.eye(4))

    def test_mismatch_raises(self):
        # a non-real curve transported by a complex map cannot be matched by a real flow
        g = generator_from_a(MIXED_A)
        t = np.block([[np.eye(2), 1j * np.eye(2)], [np.zeros((2, 2)), np.eye(2)]])
        with pytest.raises(ConsistencyError):
            realize_real_generator(g, t)
