"""Methods that never converge on simple QG+ or Lipschitz functions.

On M|z| the constant-step subgradient method bounces between two points, and
its running average stalls at a positive gap. On the squared sup-norm in R^3,
exact line-search with an unlucky choice of subgradient walks around four
corners of a cube forever.
"""

from qgplus import BoundSpec, RunConfig, StepSchedule, run, verify_trace_against_bound
from qgplus.core import pr_average
from qgplus.zoo import cycle_abs, cycle_linf


def main():
    c = cycle_abs(M=1.0, gamma=1.0)
    tr = run("subgrad", c.oracle, RunConfig(c.x0, 200, StepSchedule.constant(c.gamma)))
    print("|z| iterates:", tr.points[:5, 0])
    print(f"gap of the running average after 200 steps: {c.oracle.value(pr_average(tr)):.5f}")

    c = cycle_linf("sq", L=1.0)
    tr = run("subgrad-els", c.oracle, RunConfig(c.x0, 20, selector=c.selector, ls_pick=c.ls_pick))
    print("sup-norm iterates:\n", tr.points[:5])
    rep = verify_trace_against_bound(tr, c.oracle, BoundSpec("els-stuck", L=1.0))
    print(f"final gap {rep.extra['final_gap']:.4f}, average gap {rep.extra['pr_gap']:.4f}, floor {rep.bound:.4f}")


if __name__ == "__main__":
    main()
