"""Checking a dataset against the QG+ interpolation conditions and building
a function that passes through it.

The extension is a max of the affine pieces and a quadratic in the distance
to the hull of the optimal points. Its values match the data exactly.
"""

import numpy as np

from qgplus import InterpDataset, build_extension, check_qgplus_interpolation
from qgplus.core import qgplus_violation, subgradient_violation
from qgplus.interp import random_valid_instance


def main():
    ds, ext = random_valid_instance(seed=4, d=2, num_points=6, L=1.0)
    print(f"{len(ds)} points, optimal indices {ds.optimal.tolist()}, valid: {check_qgplus_interpolation(ds).valid}")
    print("max |f_ext(x_i) - f_i| =", max(abs(ext.value(x) - f) for x, f in zip(ds.xs, ds.fs)))
    print("worst convexity probe  =", subgradient_violation(ext, rng=0, count=2000, radius=5.0))
    print("worst QG+ probe        =", qgplus_violation(ext, 1.0, rng=0, count=2000, radius=5.0))

    steep = InterpDataset([[0.0], [1.0]], [[0.0], [3.0]], [0.0, 1.0], L=1.0)
    report = check_qgplus_interpolation(steep)
    print("too steep for L=1:", report.to_dict())
    try:
        build_extension(steep)
    except ValueError as exc:
        print("extension refused:", exc)


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    main()
