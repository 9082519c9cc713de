"""Heavy-ball, with and without line-search, on random QG+ instances.

Each instance is the extension of a random dataset satisfying the
interpolation conditions. The plain method uses L, the line-search variant
does not. We report the worst observed/bound ratio and the largest increase
of the Lyapunov function (it should never go up).
"""

import numpy as np

from qgplus import BoundSpec, RunConfig, lyapunov_trace, run, verify_trace_against_bound
from qgplus.harness.registry import interp_battery


def main(size=50, n=20):
    battery = interp_battery(size, base_seed=0)
    for alg in ("hb", "hb-ls"):
        ratios, bumps = [], []
        for item in battery:
            cfg = RunConfig(item.x0, n, L=item.L if alg == "hb" else None)
            trace = run(alg, item.oracle, cfg)
            rep = verify_trace_against_bound(trace, item.oracle, BoundSpec("hb-optimal", L=item.L))
            assert rep.ok, (item.index, rep)
            ratios.append(rep.observed / rep.bound if rep.bound else 0.0)
            bumps.append(np.diff(lyapunov_trace(trace, item.oracle, item.L)).max())
        print(f"{alg:6s} worst gap/bound {max(ratios):.3f}   largest Lyapunov increase {max(bumps):.2e}")


if __name__ == "__main__":
    main()
