"""Savings of each policy on category mixes, averaged over seeds.

    python scripts/category_mixes.py --seeds 10 --out results/categories.csv
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from qosrma.metrics import energy_savings, long_term_violations
from qosrma.platform import default_platform
from qosrma.simulator import ModelMode, Policy, baseline_run, run
from qosrma.workload import generate_pool, generate_workload_mix

PATTERNS = ("2A2D", "2A2C", "4A", "1A1B1C1D", "2B2D", "4B", "4D")
POLICIES = (Policy.DVFS, Policy.PARTITION, Policy.COMBINED)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--model", choices=[m.value for m in ModelMode], default="perfect")
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--patterns", nargs="+", default=PATTERNS)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    platform = default_platform(4)
    rows = []
    for pattern in args.patterns:
        for seed in range(args.seeds):
            wl = generate_workload_mix(pattern, generate_pool(seed), seed, alphas=(args.alpha,))
            base = baseline_run(wl, platform)
            for policy in POLICIES:
                rep = run(wl, platform, policy, args.model)
                # too-short runs have no completed pass to compare
                lt = [v.flagged for v in long_term_violations(rep, base)] if all(
                    a.run_times for a in rep.apps) else []
                rows.append({"pattern": pattern, "seed": seed, "policy": policy.value,
                             "savings": energy_savings(rep, base),
                             "savings_excl_shared": energy_savings(rep, base, include_shared=False),
                             "violations": sum(lt)})

    print(f"{'mix':<10}" + "".join(f"{p.value:>12}" for p in POLICIES))
    for pattern in args.patterns:
        means = [np.mean([r["savings"] for r in rows if r["pattern"] == pattern
                          and r["policy"] == p.value]) for p in POLICIES]
        print(f"{pattern:<10}" + "".join(f"{100 * m:>11.2f}%" for m in means))

    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
