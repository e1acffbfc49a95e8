"""Solutions of the Sachs equation as orbits in the Lagrangian Grassmannian.

A generator ``A`` (with ``A H0 + H0 A^T + M0 = I``) produces the curve
``u -> [I; H(u)]`` through the one-parameter group ``exp(uW)``.  Three small
generators show the possible shapes: polynomial growth for a nilpotent
``A``, pure exponentials for a diagonal ``A`` and a mixture for a
non-diagonalisable pair of eigenvalues.
"""

import numpy as np

from microcosm.orbit import generator_from_a, orbit_h

GENERATORS = {
    "nilpotent": (np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0, 0.5], [0.5, 0.0]])),
    "diagonal": (np.diag([1.0, -1.0]), np.diag([0.5, -0.5])),
    "mixed": (np.array([[2.0, -3.0], [1.0, -2.0]]), -np.array([[0.0, 7.0], [7.0, 8.0]]) / 54),
}


def main():
    for name, (a, h0) in GENERATORS.items():
        g = generator_from_a(a, h0=h0)
        print(f"{name} generator A =\n{a}")
        print(f"  M0 =\n{np.array2string(g.m0.real, precision=6, suppress_small=True)}")
        print(f"  |A H0 + H0 A^T + M0 - I| = {np.abs(a @ h0 + h0 @ a.T + g.m0 - np.eye(2)).max():.1e}")
        for u in (-1.0, 0.0, 1.0):
            h = orbit_h(g, u).real
            print(f"  H({u:+.0f}) = {np.array2string(h, precision=5, suppress_small=True).replace(chr(10), ' ')}")
        print()


if __name__ == "__main__":
    main()
