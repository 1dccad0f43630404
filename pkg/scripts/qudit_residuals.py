"""Per dimension d: the shift-sum decomposition error, the largest cross-term
coefficient, and how far a single shift map sits from the measurement span."""
import sys

import numpy as np

from ddmeas.extensions import (
    QuditShiftAlgebra,
    qudit_decomposition_error,
    qudit_expansion,
    qudit_prime_identity_check,
    single_shift_residual,
)


def main():
    print(f"{'d':>2} {'decomp':>10} {'max|c_ij|':>10} {'sum-vs-meas':>12} {'S1 off-span':>12}")
    for d in range(2, 9):
        alg = QuditShiftAlgebra(d)
        _, _, residual = qudit_expansion(alg)
        cmax = max((abs(c) for c, _ in residual), default=0.0)
        check = qudit_prime_identity_check(alg)
        print(f"{d:>2} {qudit_decomposition_error(alg):10.2e} {cmax:10.2e} {check.error:12.2e} "
              f"{single_shift_residual(alg):12.4f}")
    return 0


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    sys.exit(main())
