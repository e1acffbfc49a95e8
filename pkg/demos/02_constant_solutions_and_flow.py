"""Constant solutions of the Sachs equation and the closed-form flow.

A homogeneous plane wave is fixed by a skew ``omega`` and a symmetric
``p``.  A constant solution ``Sigma`` of ``Sigma^2 + [Sigma, omega] + p = 0``
comes from an invariant Lagrangian subspace of a Hamiltonian matrix.  Once
``Sigma`` is known, every other solution has a closed form, which we
compare with a direct Runge-Kutta integration.
"""

import numpy as np

from microcosm.oracle import integrate_sachs, uniform_grid
from microcosm.riccati import algebraic_residual, solve_algebraic_sachs
from microcosm.sachs_flow import ivp_general, make_ivp, tidal


def main():
    rng = np.random.default_rng(2024)
    w = rng.uniform(-1, 1, (3, 3))
    p = rng.uniform(-1, 1, (3, 3))
    omega, p = w - w.T, p + p.T

    sigma = solve_algebraic_sachs(omega, p)
    print("constant solution Sigma (n = 3):")
    print(np.array2string(sigma, precision=5, suppress_small=True))
    print(f"residual |Sigma^2 - w Sigma + Sigma w + p| = {np.linalg.norm(algebraic_residual(sigma, omega, p)):.2e}")

    s0 = np.diag([0.3, -0.2, 0.1])
    ivp = make_ivp(omega, p, sigma, s0)
    run = integrate_sachs(lambda u: tidal(omega, p, u), s0, uniform_grid(0, 1, 0.1))
    print("\n   u    |closed form - RK4|")
    for u, s in zip(run.grid, run.states):
        print(f"  {u:4.1f}   {np.abs(ivp_general(ivp, u) - s).max():.2e}")
    if run.blowup is not None:
        print(f"the solution has a pole at u = {run.blowup:.6f}")


if __name__ == "__main__":
    main()
