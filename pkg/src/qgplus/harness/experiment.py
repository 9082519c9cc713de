"""Config-driven runs: traces to CSV, checks to a JSON summary."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..algos import RunConfig, lyapunov_trace, optimality_condition_residual, run
from ..bounds import BoundSpec, verify_trace_against_bound
from ..core import Lipschitz, NoProjectionError, RGPlus
from .config import CheckSpec, ExperimentConfig
from .registry import make_instance, random_start

FLOAT_FMT = "%.17g"


def fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return FLOAT_FMT % v


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def trace_table(trace, oracle, L=None):
    """Rows ``k, x..., f_gap, gamma, lyapunov, eq4_residual``; cells that cannot
    be computed for a run (no projection, no L) are left empty."""
    n, d = trace.n, trace.points.shape[1]
    L = L if L is not None else trace.meta.get("L", oracle.L)
    try:
        lyap = lyapunov_trace(trace, oracle, L) if L is not None else None
    except NoProjectionError:
        lyap = None
    header = ["k"] + [f"x{i}" for i in range(d)] + ["f_gap", "gamma", "lyapunov", "eq4_residual"]
    rows = []
    for k in range(n + 1):
        res = optimality_condition_residual(trace, oracle, L, k) if (L is not None and k >= 1) else None
        rows.append(
            [str(k)]
            + [fmt(c) for c in trace.points[k]]
            + [
                fmt(trace.values[k] - oracle.f_star),
                fmt(trace.gammas[k - 1]) if k >= 1 else "",
                fmt(lyap[k]) if lyap is not None else "",
                fmt(res),
            ]
        )
    return header, rows


def write_trace_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _bound_spec(check: CheckSpec, oracle, alg, trace) -> BoundSpec:
    p = dict(check.params)
    if "L" not in p:
        p["L"] = alg.L if alg.L is not None else oracle.L
    if "M" not in p:
        t = oracle.tag(Lipschitz)
        p["M"] = None if t is None else t.M
    if "growth" not in p:
        t = oracle.tag(RGPlus)
        p["growth"] = alg.growth or (None if t is None else t.growth)
    if "kappa" not in p:
        p["kappa"] = alg.kappa
    return BoundSpec(check.bound, gammas=tuple(trace.gammas), **p)


def _property_check(check: CheckSpec, trace, oracle, alg):
    L = alg.L if alg.L is not None else oracle.L
    if check.prop == "lyapunov-monotone":
        tol = 1e-10 if check.tol is None else check.tol
        V = lyapunov_trace(trace, oracle, L)
        inc = np.diff(V)
        bad = np.flatnonzero(inc > tol)
        worst = float(inc.max())
    else:
        tol = 1e-12 if check.tol is None else check.tol
        res = np.array([optimality_condition_residual(trace, oracle, L, k) for k in range(1, trace.n + 1)])
        bad = np.flatnonzero(res > tol) + 1
        worst = float(res.max())
    out = {"check": check.prop, "ok": bool(bad.size == 0), "observed": worst, "tol": tol}
    if bad.size:
        out["step"] = int(bad[0]) + (1 if check.prop == "lyapunov-monotone" else 0)
    return out


def _one_run(job):
    cfg, ii, ai, seed, tolerance = job
    ispec, alg = cfg.instances[ii], cfg.algorithms[ai]
    inst = make_instance(ispec.id, ispec.params, seed)
    oracle = inst.oracle
    if ispec.x0 is not None:
        x0 = np.asarray(ispec.x0, dtype=float)
    elif inst.x0 is not None:
        x0 = inst.x0
    else:
        x0 = random_start(seed, oracle.dim)
    extra = inst.extras.get("cycle")
    rc = RunConfig(
        x0, cfg.n, schedule=alg.schedule, L=alg.L, growth=alg.growth, kappa=alg.kappa,
        f_star=oracle.f_star if alg.f_star is None else alg.f_star,
        policy=alg.policy, ls_pick=alg.ls_pick, form=alg.form,
        selector=extra.selector if (extra is not None and alg.id == "subgrad-els") else None,
    )
    if extra is not None and alg.id == "subgrad-els":
        rc.ls_pick = extra.ls_pick
    trace = run(alg.id, oracle, rc)
    record = {"instance": ispec.id, "instance_index": ii, "algorithm": alg.id, "seed": seed, "n": trace.n, "checks": []}
    for check in cfg.checks:
        if not check.applies_to(alg.id):
            continue
        if check.bound is not None:
            spec = _bound_spec(check, oracle, alg, trace)
            abs_tol = check.abs_tol if tolerance is None else tolerance
            rep = verify_trace_against_bound(trace, oracle, spec, check.side, check.rel_tol, abs_tol).to_dict()
            rep["check"] = rep.pop("id")
            if not rep["ok"]:
                rep["step"] = trace.n
            record["checks"].append(rep)
        else:
            if tolerance is not None:
                check = replace(check, tol=tolerance)
            record["checks"].append(_property_check(check, trace, oracle, alg))
    record["ok"] = all(c["ok"] for c in record["checks"])
    header, rows = trace_table(trace, oracle, alg.L)
    return record, header, rows


def run_experiment(
    cfg: ExperimentConfig,
    out_dir=None,
    seed: int | None = None,
    jobs: int = 1,
    tolerance: float | None = None,
    write_traces: bool | None = None,
) -> dict:
    """Run every (instance, algorithm, seed) combination and write
    ``<out>/<experiment>/`` with one trace CSV per run and ``summary.json``."""
    base = cfg.base_seed if seed is None else int(seed)
    out = Path(out_dir if out_dir is not None else cfg.out_dir) / cfg.experiment
    out.mkdir(parents=True, exist_ok=True)
    traces = cfg.traces if write_traces is None else write_traces
    jobs_list = [
        (cfg, ii, ai, base + s, tolerance)
        for ii in range(len(cfg.instances))
        for ai in range(len(cfg.algorithms))
        for s in range(cfg.seed_count)
    ]
    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one_run, jobs_list))
    else:
        results = [_one_run(j) for j in jobs_list]

    runs, failures = [], []
    for record, header, rows in results:
        name = f"{record['instance_index']:02d}-{record['instance']}_{record['algorithm']}_s{record['seed']}.csv"
        if traces:
            write_trace_csv(out / name, header, rows)
            record["trace"] = name
        runs.append(record)
        for c in record["checks"]:
            if not c["ok"]:
                failures.append(
                    {"instance": record["instance"], "algorithm": record["algorithm"], "seed": record["seed"],
                     "check": c["check"], "step": c.get("step")}
                )
    summary = {"experiment": cfg.experiment, "ok": not failures, "runs": runs, "failures": failures}
    dump_json(summary, out / "summary.json")
    return summary
