import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from microcosm.errors import AccuracyError, InvalidInputError
from microcosm.oracle import (
    conjugate_points,
    detect_conjugate,
    integrate_jacobi,
    integrate_sachs,
    jacobi_matrix,
    symplectic_pairing,
    uniform_grid,
)
from microcosm.planewave import dim2_spec, raychaudhuri_bound
from microcosm.riccati import solve_algebraic_sachs
from microcosm.sachs_flow import ivp_general, make_ivp, tidal


def random_pair(rng, n):
    w = rng.uniform(-1, 1, (n, n))
    p = rng.uniform(-1, 1, (n, n))
    return w - w.T, p + p.T


def rk4_error(omega, p, step, u=2.0):
    n = p.shape[0]
    exact = expm(u * jacobi_matrix(omega, p)) @ np.vstack([np.zeros((n, n)), np.eye(n)])
    run = integrate_jacobi(omega, p, np.zeros((n, n)), np.eye(n), [0.0, u], step=step, tol=1.0)
    return np.abs(run.states[-1] - exact).max()


class TestIntegrateJacobi:
    def test_flat_constant(self):
        grid = uniform_grid(0, 3, 0.1)
        run = integrate_jacobi(np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2), np.zeros((2, 2)), grid)
        np.testing.assert_allclose(run.states[:, :2], np.broadcast_to(np.eye(2), (len(grid), 2, 2)), atol=1e-15)

    def test_sine(self):
        grid = uniform_grid(0, 7, 0.05)
        run = integrate_jacobi(np.zeros((2, 2)), np.eye(2), np.zeros((2, 2)), np.eye(2), grid)
        expected = np.sin(grid)[:, None, None] * np.eye(2)
        np.testing.assert_allclose(run.states[:, :2], expected, atol=1e-9)

    def test_matches_exponential(self):
        omega, p = random_pair(np.random.default_rng(11), 2)
        assert rk4_error(omega, p, 1e-3) <= 1e-9

    @pytest.mark.parametrize(
        "omega, p",
        [
            (np.zeros((2, 2)), np.eye(2)),
            (np.array([[0.0, -1.0], [1.0, 0.0]]), np.diag([2.0, 1.0])),
        ],
    )
    def test_fourth_order(self, omega, p):
        errs = [rk4_error(omega, p, h) for h in (0.2, 0.1, 0.05, 0.025)]
        for coarse, fine in zip(errs, errs[1:]):
            assert coarse / fine >= 2**4

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_observed_order_random(self, seed):
        omega, p = random_pair(np.random.default_rng(seed), 2)
        ratio = rk4_error(omega, p, 0.025) / rk4_error(omega, p, 0.0125)
        assert np.log2(ratio) >= 3.9

    def test_accuracy_error(self):
        with pytest.raises(AccuracyError):
            integrate_jacobi(np.zeros((1, 1)), 400 * np.eye(1), np.eye(1), np.zeros((1, 1)), [0, 5], step=0.1)

    def test_bad_grid(self):
        with pytest.raises(InvalidInputError):
            integrate_jacobi(np.zeros((1, 1)), np.eye(1), np.eye(1), np.eye(1), [0, 1, 0.5])

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.sampled_from([2, 3]))
    def test_symplectic_conservation(self, seed, n):
        rng = np.random.default_rng(seed)
        omega, p = random_pair(rng, n)
        l0 = rng.standard_normal((n, 3))
        ld0 = rng.standard_normal((n, 3))
        run = integrate_jacobi(omega, p, l0, ld0, uniform_grid(0, 4, 0.01))
        for i, j in ((0, 1), (0, 2), (1, 2)):
            form = symplectic_pairing(run, i, j, omega)
            assert np.ptp(form.real) <= 1e-8 * (abs(form[0]) + 1)


class TestIntegrateSachs:
    def test_free_expansion(self):
        grid = uniform_grid(0, 2, 0.05)
        run = integrate_sachs(lambda u: np.zeros((2, 2)), np.eye(2), grid)
        expected = (1 / (1 + grid))[:, None, None] * np.eye(2)
        np.testing.assert_allclose(run.states, expected, atol=1e-10)

    def test_tangent_blowup(self):
        run = integrate_sachs(lambda u: np.ones((1, 1)), np.zeros((1, 1)), uniform_grid(0, 3, 0.01))
        assert run.blowup == pytest.approx(np.pi / 2, abs=1e-4)
        assert run.grid[-1] < np.pi / 2
        np.testing.assert_allclose(run.states[:50, 0, 0], -np.tan(run.grid[:50]), atol=1e-9)

    def test_microcosm_against_closed_form(self):
        omega = np.array([[0.0, -0.7], [0.7, 0.0]])
        p = np.array([[1.2, 0.3], [0.3, -0.4]])
        sigma = solve_algebraic_sachs(omega, p)
        s0 = np.array([[0.1, 0.2], [0.2, 0.0]])
        ivp = make_ivp(omega, p, sigma, s0)
        grid = uniform_grid(0, 0.8, 0.02)
        run = integrate_sachs(lambda u: tidal(omega, p, u), s0, grid)
        closed = np.array([ivp_general(ivp, u) for u in run.grid])
        assert np.abs(closed - run.states).max() <= 1e-6

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_log_derivative_of_jacobi_frame(self, seed):
        # Brinkmann S = J' J^{-1} with J = exp(-wu) X and X the Alekseevsky frame
        rng = np.random.default_rng(seed)
        omega, p = random_pair(rng, 2)
        s0 = rng.uniform(-0.5, 0.5, (2, 2))
        s0 = s0 + s0.T
        grid = uniform_grid(0, 1, 0.01)
        sachs = integrate_sachs(lambda u: tidal(omega, p, u), s0, grid)
        jac = integrate_jacobi(omega, p + omega @ omega, np.eye(2), s0 + omega, grid)
        for k in range(0, len(sachs.grid), 10):
            u = sachs.grid[k]
            x, xd = jac.states[k, :2], jac.states[k, 2:]
            if np.linalg.cond(x) > 1e6 or np.abs(sachs.states[k]).max() > 10:
                # outside the regular interval the RK4 error grows with |S|
                continue
            rot = expm(omega * u)
            s = rot.T @ (xd @ np.linalg.inv(x) - omega) @ rot
            np.testing.assert_allclose(sachs.states[k], s, atol=1e-7)


class TestConjugate:
    def test_unit_potential(self):
        pts = conjugate_points(np.zeros((2, 2)), np.eye(2), 10)
        np.testing.assert_allclose(pts, [np.pi, 2 * np.pi, 3 * np.pi], atol=1e-8)

    def test_flat_has_none(self):
        assert conjugate_points(np.zeros((2, 2)), np.zeros((2, 2)), 10) == []

    def test_brinkmann_form(self):
        omega = np.array([[0.0, -0.5], [0.5, 0.0]])
        pa = np.diag([1.0, 0.3])
        a = conjugate_points(omega, pa, 8)
        b = conjugate_points(omega, pa - omega @ omega, 8, form="brinkmann")
        np.testing.assert_allclose(a, b, atol=1e-10)

    def test_detect_needs_linear_run(self):
        run = integrate_sachs(lambda u: np.zeros((1, 1)), np.eye(1), [0, 1])
        with pytest.raises(InvalidInputError):
            detect_conjugate(run)

    def test_positive_energy_within_bound(self):
        spec = dim2_spec(0.4, 0.0, 0.0, 0.6)
        pts = conjugate_points(spec.omega, spec.p_alekseevsky, 20)
        assert pts
        # trace energy 2(A + w^2) in two transverse dimensions
        assert pts[0] <= raychaudhuri_bound(spec.energy_trace, n=2) + 1e-6
