"""Command-line front end: generate workloads, run experiments, write reports.

    python -m qosrma gen 2A2D --seed 7 --out runs/w1
    python -m qosrma run --workload runs/w1/workload.json --policy combined --out runs/w1/combined
    python -m qosrma sweep-alpha --workload runs/w1/workload.json --out runs/w1/alpha
    python -m qosrma sweep-baseline --workload runs/w1/workload.json --out runs/w1/base
    python -m qosrma qos-analyze --workload runs/w1/workload.json --out runs/w1/qos
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .metrics import (app_savings, energy_savings, long_term_rows, long_term_violations,
                      short_term_analysis, write_short_term)
from .perf import ModelError, QosTarget
from .platform import PlatformError, default_platform, load_platform
from .simulator import DEFAULT_QUOTA, ModelMode, Policy, baseline_run, run
from .workload import (WorkloadError, generate_pool, generate_workload_mix, load_workload,
                       parse_pattern, save_database, save_workload)

ALPHA_GRID = (1.0, 1 / 1.2, 1 / 1.4, 1 / 1.6, 1 / 1.8)
BASELINE_GRID = (0, 2, 4, 6, 8)  # VF1, VF3, ..., VF9 in 1-based labels
SWEEP_POLICIES = ("dvfs", "partition", "combined")

EXIT_OK, EXIT_CONFIG, EXIT_FALLBACK = 0, 1, 2


class ConfigError(Exception):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _ints(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _platform(args, num_cores: int):
    if args.platform:
        return load_platform(args.platform)
    return default_platform(num_cores)


def _workload(args):
    if not args.workload:
        raise ConfigError("--workload is required")
    wl = load_workload(args.workload)
    if getattr(args, "alpha", None) and args.command == "run":
        wl = wl.with_alphas(args.alpha)
    return wl


def _dump(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


# --- subcommands ------------------------------------------------------------------

def cmd_gen(args) -> int:
    cats = parse_pattern(args.pattern)
    platform = _platform(args, len(cats))
    geometry = platform.geometry(len(cats))
    pool = generate_pool(args.seed, per_category=args.per_category, categories="".join(sorted(set(cats))),
                         noise=args.noise, baseline_ways=geometry.baseline_ways, platform=platform,
                         max_ways=geometry.upper_limit)
    wl = generate_workload_mix(args.pattern, pool, args.seed, geometry.baseline_ways,
                               args.alpha or ())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_database(pool, out / "apps.jsonl")
    save_workload(wl, out / "workload.json", "apps.jsonl")
    print(f"wrote {out / 'workload.json'}: {' '.join(a.name for a in wl.apps)}")
    return EXIT_OK


def _simulate(wl, platform, policy, model, quota, baseline_vf, overheads):
    base = baseline_run(wl, platform, quota, baseline_vf=baseline_vf)
    rep = run(wl, platform, policy, model, quota, baseline_vf=baseline_vf, overheads=overheads)
    return base, rep


def _summary(rep, base) -> dict:
    # long-term violations need a completed run per app; short quotas may not give one
    if all(a.run_times for a in rep.apps + base.apps):
        viol = long_term_violations(rep, base)
        rows, flagged = long_term_rows(viol), sum(v.flagged for v in viol)
    else:
        rows, flagged = None, None
    return {
        "policy": rep.policy,
        "model": rep.model,
        "baseline_vf": rep.baseline_vf,
        "alphas": [a.alpha for a in rep.apps],
        "savings": energy_savings(rep, base),
        "savings_excl_shared": energy_savings(rep, base, include_shared=False),
        "app_savings": app_savings(rep, base),
        "long_term": rows,
        "violations": flagged,
        "fallback_fraction": rep.fallback_fraction,
    }


def cmd_run(args) -> int:
    wl = _workload(args)
    platform = _platform(args, wl.num_cores)
    base, rep = _simulate(wl, platform, Policy(args.policy), ModelMode(args.model), args.quota,
                          args.baseline_vf, None if args.overheads is None else args.overheads)
    out = Path(args.out)
    base.write(out, "baseline_")
    rep.write(out)
    summary = _summary(rep, base)
    _dump(out / "savings.json", summary)
    lt = summary["violations"]
    lt = "no completed run to judge long-term QoS" if lt is None else f"{lt} long-term violations"
    print(f"{args.policy}/{args.model}: savings {100 * summary['savings']:.2f}%, {lt}")
    if rep.fallback_fraction > 0.5:
        print(f"warning: allocator fallback on {100 * rep.fallback_fraction:.0f}% of decisions",
              file=sys.stderr)
        return EXIT_FALLBACK
    return EXIT_OK


def _sweep_point(job):
    wl_path, platform_path, policy, model, quota, alpha, vf, overheads = job
    wl = load_workload(wl_path)
    if alpha is not None:
        wl = wl.with_alphas([alpha])
    platform = load_platform(platform_path) if platform_path else default_platform(wl.num_cores)
    base, rep = _simulate(wl, platform, Policy(policy), ModelMode(model), quota, vf, overheads)
    s = _summary(rep, base)
    return {"workload": str(wl_path), "policy": policy, "model": model,
            "alpha": alpha if alpha is not None else "", "baseline_vf": rep.baseline_vf,
            "savings": s["savings"], "savings_excl_shared": s["savings_excl_shared"],
            "violations": s["violations"], "fallback_fraction": s["fallback_fraction"]}


def _run_jobs(jobs, n_jobs: int):
    if n_jobs <= 1:
        return [_sweep_point(j) for j in jobs]
    with ProcessPoolExecutor(n_jobs) as pool:
        return list(pool.map(_sweep_point, jobs))


def _write_rows(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = ["workload", "policy", "model", "alpha", "baseline_vf", "savings",
            "savings_excl_shared", "violations", "fallback_fraction"]
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
    os.replace(tmp, path)


def _sweep_common(args):
    if not args.workload:
        raise ConfigError("--workload is required")
    for p in args.workload:
        load_workload(p)  # fail fast on bad inputs
    if args.platform:
        load_platform(args.platform)
    return [str(p) for p in args.workload], args.policy or list(SWEEP_POLICIES)


def cmd_sweep_alpha(args) -> int:
    workloads, policies = _sweep_common(args)
    alphas = sorted(args.alpha or ALPHA_GRID, reverse=True)
    jobs = [(w, args.platform, pol, args.model, args.quota, a, args.baseline_vf, args.overheads)
            for a in alphas for w in workloads for pol in policies]
    rows = _run_jobs(jobs, args.jobs)
    _write_rows(Path(args.out) / "sweep_alpha.csv", rows)
    print(f"wrote {len(rows)} rows to {Path(args.out) / 'sweep_alpha.csv'}")
    return EXIT_OK


def cmd_sweep_baseline(args) -> int:
    workloads, policies = _sweep_common(args)
    levels = args.baseline_vf or BASELINE_GRID
    alpha = args.alpha[0] if args.alpha else None
    jobs = [(w, args.platform, pol, args.model, args.quota, alpha, vf, args.overheads)
            for w in workloads for pol in policies for vf in levels]
    rows = _run_jobs(jobs, args.jobs)
    _write_rows(Path(args.out) / "sweep_baseline.csv", rows)
    print(f"wrote {len(rows)} rows to {Path(args.out) / 'sweep_baseline.csv'}")
    return EXIT_OK


def cmd_qos_analyze(args) -> int:
    wl = _workload(args)
    platform = _platform(args, wl.num_cores)
    if args.baseline_vf is not None:
        platform = platform.with_baseline_vf(args.baseline_vf)
    geometry = platform.geometry(wl.num_cores)
    alpha = args.alpha[0] if args.alpha else 1.0
    target = QosTarget(alpha, geometry.baseline_ways, platform.vf.baseline_index)
    apps = list({a.name: a for a in wl.apps}.values())
    result = short_term_analysis(apps, platform, target, args.pairing)
    write_short_term(result, args.out)
    print(f"probability {100 * result.probability:.2f}%, expected {100 * result.expected:.2f}%, "
          f"stddev {100 * result.stddev:.2f}%")
    return EXIT_OK


# --- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qosrma", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, many=False):
        p.add_argument("--platform", help="platform JSON (default: built-in, sized to the workload)")
        p.add_argument("--workload", nargs="+" if many else None, help="workload JSON")
        p.add_argument("--model", choices=[m.value for m in ModelMode], default="perfect")
        p.add_argument("--alpha", type=_floats, help="QoS factor(s), comma separated")
        p.add_argument("--quota", type=float, default=DEFAULT_QUOTA, help="instructions per app")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0)
        ov = p.add_mutually_exclusive_group()
        ov.add_argument("--overheads", dest="overheads", action="store_true", default=None,
                        help="charge RMA/DVFS overheads (default: only with analytical models)")
        ov.add_argument("--no-overheads", dest="overheads", action="store_false")

    p = sub.add_parser("gen", help="generate an app pool and a workload mix")
    p.add_argument("pattern", help='category mix such as "2A2D"')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--platform")
    p.add_argument("--alpha", type=_floats)
    p.add_argument("--noise", type=float, default=0.0, help="lognormal sigma on ground truth")
    p.add_argument("--per-category", type=int, default=3)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="simulate one policy against the baseline")
    common(p)
    p.add_argument("--policy", choices=[x.value for x in Policy], default="combined")
    p.add_argument("--baseline-vf", type=int)
    p.set_defaults(func=cmd_run)

    for name, func, vf_type in (("sweep-alpha", cmd_sweep_alpha, int),
                                ("sweep-baseline", cmd_sweep_baseline, _ints)):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} sweep over one or more workloads")
        common(p, many=True)
        p.add_argument("--policy", choices=[x.value for x in Policy], action="append")
        p.add_argument("--baseline-vf", type=vf_type)
        p.add_argument("--jobs", type=int, default=1)
        p.set_defaults(func=func)

    p = sub.add_parser("qos-analyze", help="short-term QoS violation analysis")
    common(p)
    p.add_argument("--baseline-vf", type=int)
    p.add_argument("--pairing", choices=["phase", "adjacency"], default="phase")
    p.set_defaults(func=cmd_qos_analyze)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PlatformError, WorkloadError, ModelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
