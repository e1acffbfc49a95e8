"""Power series behind the constant-curvature solutions.

For scalar ``p = 1`` the Sachs equation ``S' + S^2 + 1 = 0`` with a simple
pole at ``u = 0`` has ``u S(u) = U(u^2)``, where ``U(z) = sqrt(z) cot sqrt(z)``.
The recursion for the Taylor coefficients of ``S`` therefore reproduces
the Bernoulli numbers.  This script prints both sides.
"""

import math
from fractions import Fraction

import numpy as np

from microcosm.efuncs import series_coeffs, series_coeffs_exact
from microcosm.sachs_series import recursion_coeffs


def bernoulli(m):
    a = [Fraction(0)] * (m + 1)
    out = []
    for k in range(m + 1):
        a[k] = Fraction(1, k + 1)
        for j in range(k, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    return out


def main():
    print("Taylor coefficients of T(z) = tan(sqrt z)/sqrt z and U(z) = sqrt z cot sqrt z")
    t_exact = series_coeffs_exact("T", 6)
    u_exact = series_coeffs_exact("U", 6)
    t_float = series_coeffs("T", 6)
    for k in range(7):
        print(f"  z^{k}:  T {str(t_exact[k]):>16}  ({t_float[k]:.16e})   U {str(u_exact[k]):>14}")

    print("\nU_k from the Sachs recursion with p = 1 against (-4)^k B_2k / (2k)!")
    jet = recursion_coeffs([np.ones((1, 1))], 21)
    b = bernoulli(20)
    for k in range(1, 11):
        from_recursion = -jet.coeffs[2 * k - 1][0, 0] / math.factorial(2 * k - 1)
        exact = (-4) ** k * b[2 * k] / math.factorial(2 * k)
        rel = abs(from_recursion - float(exact)) / abs(float(exact))
        print(f"  k={k:2d}  {from_recursion: .16e}  exact {str(exact):>28}  rel. error {rel:.1e}")


if __name__ == "__main__":
    main()
