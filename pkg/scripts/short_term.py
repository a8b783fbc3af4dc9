"""Short-term QoS violation statistics for noisy synthetic apps.

    python scripts/short_term.py --noise 0.03 --out results/short_term
"""
import argparse
from pathlib import Path

from qosrma.metrics import short_term_analysis, write_short_term
from qosrma.perf import QosTarget
from qosrma.platform import default_platform
from qosrma.workload import generate_pool


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--noise", type=float, default=0.03)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--max-ways", type=int, default=16)
    ap.add_argument("--pairing", choices=["phase", "adjacency"], default="phase")
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    platform = default_platform(4)
    apps = generate_pool(args.seed, per_category=2, noise=args.noise, platform=platform,
                         max_ways=args.max_ways)
    target = QosTarget(args.alpha, 8, platform.vf.baseline_index)
    res = short_term_analysis(apps, platform, target, args.pairing)
    print(f"cells {res.cells}, violating {len(res.records)}")
    print(f"probability {100 * res.probability:.2f}%  expected {100 * res.expected:.2f}%  "
          f"stddev {100 * res.stddev:.2f}%")
    if args.out:
        write_short_term(res, args.out)


if __name__ == "__main__":
    main()
