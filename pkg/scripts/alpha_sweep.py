"""Savings as the QoS target is relaxed, for each policy.

Savings with and without the shared static energy are both reported; the
former can fall at loose targets because slower cores keep the shared cache
powered for longer.

    python scripts/alpha_sweep.py --pattern 2A2D --seeds 5
"""
import argparse

import numpy as np

from qosrma.cli import ALPHA_GRID
from qosrma.metrics import energy_savings
from qosrma.platform import default_platform
from qosrma.simulator import ModelMode, Policy, baseline_run, run
from qosrma.workload import generate_pool, generate_workload_mix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pattern", default="1A1B1C1D")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--model", choices=[m.value for m in ModelMode], default="perfect")
    args = ap.parse_args()

    platform = default_platform(4)
    policies = (Policy.DVFS, Policy.PARTITION, Policy.COMBINED)
    table = {}
    for seed in range(args.seeds):
        wl = generate_workload_mix(args.pattern, generate_pool(seed), seed)
        base = baseline_run(wl, platform)
        for alpha in ALPHA_GRID:
            for policy in policies:
                rep = run(wl.with_alphas((alpha,)), platform, policy, args.model)
                table.setdefault((alpha, policy), []).append(
                    (energy_savings(rep, base), energy_savings(rep, base, include_shared=False)))

    print(f"{'alpha':>8}" + "".join(f"{p.value:>22}" for p in policies))
    for alpha in ALPHA_GRID:
        cells = []
        for policy in policies:
            total, excl = np.mean(table[(alpha, policy)], axis=0)
            cells.append(f"{100 * total:>9.2f}% ({100 * excl:>6.2f}%)")
        print(f"{'1/' + format(1 / alpha, '.1f'):>8}" + "".join(f"{c:>22}" for c in cells))
    print("values: total savings (savings excluding shared static energy)")


if __name__ == "__main__":
    main()
