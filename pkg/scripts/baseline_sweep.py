"""Savings against baselines at different VF levels (1-based labels VF1..VF10).

    python scripts/baseline_sweep.py --pattern 2A2D
"""
import argparse

import numpy as np

from qosrma.cli import BASELINE_GRID
from qosrma.metrics import energy_savings
from qosrma.platform import default_platform
from qosrma.simulator import Policy, baseline_run, run
from qosrma.workload import generate_pool, generate_workload_mix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pattern", default="2A2D")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--alpha", type=float, default=1.0)
    args = ap.parse_args()

    platform = default_platform(4)
    policies = (Policy.DVFS, Policy.PARTITION, Policy.COMBINED)
    print(f"{'baseline':>9}" + "".join(f"{p.value:>12}" for p in policies))
    for vf in BASELINE_GRID:
        means = []
        for policy in policies:
            s = []
            for seed in range(args.seeds):
                wl = generate_workload_mix(args.pattern, generate_pool(seed), seed,
                                           alphas=(args.alpha,))
                base = baseline_run(wl, platform, baseline_vf=vf)
                s.append(energy_savings(run(wl, platform, policy, baseline_vf=vf), base))
            means.append(np.mean(s))
        print(f"{'VF' + str(vf + 1):>9}" + "".join(f"{100 * m:>11.2f}%" for m in means))


if __name__ == "__main__":
    main()
