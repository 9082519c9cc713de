"""Constant-step subgradient method on a Huber function.

Starting at x0 = 11 with step 1/L, every step moves exactly one unit, so the
average of the gaps lands on (L/2) R^2 / (n+1) with no slack at all.
"""

import numpy as np

from qgplus import BoundSpec, RunConfig, StepSchedule, huber_oracle, run, verify_trace_against_bound


def main():
    oracle = huber_oracle(L=1.0, delta=1.0)
    trace = run("subgrad", oracle, RunConfig([11.0], 10, StepSchedule.constant(1.0)))
    print("iterates:", trace.points[:, 0])
    print("gaps:    ", np.round(trace.values, 3))
    report = verify_trace_against_bound(trace, oracle, BoundSpec("avg-qg", L=1.0))
    print(f"average gap {report.observed:.12g}  bound {report.bound:.12g}  slack {report.slack:.1e}")


if __name__ == "__main__":
    main()
