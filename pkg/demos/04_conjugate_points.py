"""Conjugate points of two-dimensional homogeneous plane waves.

In two transverse dimensions the wave is described by ``A, B, C`` (the
Alekseevsky-form tidal matrix ``[[A+B, C], [C, A-B]]``) and the rotation
rate ``w``.  Conjugate points are the zeros of an explicit entire function;
we compare them with an independent integration of the Jacobi equation
and with the Raychaudhuri estimate for the first one.
"""

import numpy as np

from microcosm.dim2 import Dim2Params, existence_predicates, find_conjugate_points
from microcosm.oracle import conjugate_points
from microcosm.planewave import raychaudhuri_bound

CASES = [
    Dim2Params(1.0, 0.0, 0.0, 0.0),
    Dim2Params(-1.0, 0.0, 0.0, 1.5),
    Dim2Params(-2.0, 0.0, 0.0, 0.5),
    Dim2Params(0.5, 1.2, -0.3, 0.4),
    Dim2Params(-0.3, 1.0, 0.4, 0.2),
]


def main():
    for params in CASES:
        label = f"A={params.a_:+.1f} B={params.b_:+.1f} C={params.c_:+.1f} w={params.w:+.1f}"
        print(label, "|", "; ".join(existence_predicates(params)["reasons"]))
        analytic = find_conjugate_points(params, 12.0)
        oracle = conjugate_points(params.omega, params.p, 12.0)
        print("  analytic:", np.round(analytic, 8).tolist())
        print("  Jacobi  :", np.round(oracle, 8).tolist())
        eps = float(np.trace(params.p - params.omega @ params.omega))
        if eps > 0 and analytic:
            print(
                f"  first point {analytic[0]:.4f}; pi/sqrt(eps) = {raychaudhuri_bound(eps):.4f}, "
                f"pi sqrt(2/eps) = {raychaudhuri_bound(eps, n=2):.4f}"
            )
        print()


if __name__ == "__main__":
    main()
