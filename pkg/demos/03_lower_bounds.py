"""Three ways the last iterate can be forced to stay bad.

1. A 3-D max-of-pieces function keeps the constant-step subgradient method's
   final gap near (L/2) L gamma R^2, no matter how many steps are taken.
2. The squared sup-norm with adversarial tie-breaking hides one coordinate per
   query, so any first-order method sits at (L/2) R^2 / (n+1).
3. The sign-vertex resisting oracle plays the same game but chooses the
   minimizer only after the method has committed to its final point.
"""

import numpy as np

from qgplus import (
    BoundSpec,
    ResistingOracle,
    RunConfig,
    StepSchedule,
    lb3d_instance,
    run,
    supnormsq_oracle,
    verify_trace_against_bound,
)
from qgplus.core import distance_to_optset


def main(n=10):
    inst = lb3d_instance(L=1.0, n=n, eta=1e-6)
    tr = run("subgrad", inst.oracle, RunConfig(inst.x0, n, StepSchedule.custom(inst.gammas)))
    ratio = tr.values[-1] / distance_to_optset(inst.oracle, tr.x0) ** 2
    print(f"3-D construction, n={n}: final gap / R^2 = {ratio:.6f} (target 0.5)")

    o = supnormsq_oracle(1.0, n + 1, "adversarial")
    for alg in ("subgrad", "hb", "hb-ls"):
        tr = run(alg, o, RunConfig(np.ones(n + 1), n, StepSchedule.constant(1.0)))
        rep = verify_trace_against_bound(tr, o, BoundSpec("first-order-lb", L=1.0))
        print(f"adversarial sup-norm, {alg:7s}: final gap {rep.observed:.6f} >= {rep.bound:.6f}")

    ro = ResistingOracle(1.0, n, "vertex")
    tr = run("hb", ro, RunConfig(ro.start, n))
    print(f"vertex game: final gap {tr.values[-1]:.6f}, hidden minimizer {ro.vstar.astype(int)}, "
          f"answers consistent: {ro.consistent_with(ro.vstar)}")


if __name__ == "__main__":
    main()
