"""Heavy-ball driven by a growth function h, and its restarted variant.

With h(z) = M sqrt(z) the step adapts to the current gap and recovers the
optimal Lipschitz rate M R / sqrt(n+1). When the function also grows at
least quadratically, restarting the momentum every floor(kappa e) - 1 steps
gives a linear rate.
"""

import math

import numpy as np

from qgplus import GrowthFn, RunConfig, quadratic_diag_oracle, run, supnorm_oracle
from qgplus.algos import restart_cycle_length
from qgplus.core import distance_to_optset


def main():
    M = 2.0
    o = supnorm_oracle(M, 3)
    x0 = np.array([3.0, -1.0, 2.0])
    R = distance_to_optset(o, x0)
    for n in (5, 20, 80):
        tr = run("hb-rg", o, RunConfig(x0, n, growth=GrowthFn.sqrt(M), f_star=0.0))
        print(f"sup-norm, n={n:3d}: gap {tr.values[-1]:.4f} <= {M * R / math.sqrt(n + 1):.4f}")

    kappa = 4.0
    q = quadratic_diag_oracle(1.0, 4.0, 3)
    x0 = np.array([1.0, -2.0, 0.5])
    tr = run("hb-restart", q, RunConfig(x0, 45, growth=GrowthFn.linear(4.0), kappa=kappa, f_star=0.0))
    rho = 1 - 1 / (kappa * math.e)
    print(f"restart cycle length {restart_cycle_length(kappa)}")
    for k in (0, 9, 18, 27, 36, 45):
        d2 = distance_to_optset(q, tr.points[k]) ** 2
        print(f"k={k:2d}: d^2 {d2:.3e}   guaranteed {rho**k * distance_to_optset(q, x0) ** 2:.3e}")


if __name__ == "__main__":
    main()
