"""Per-app QoS targets: relax some cores and keep others strict.

    python scripts/mixed_qos.py --pattern 2A2D --alphas 1,1,0.714,0.714
"""
import argparse

from qosrma.metrics import app_savings, energy_savings, long_term_violations
from qosrma.platform import default_platform
from qosrma.simulator import ModelMode, Policy, baseline_run, run
from qosrma.workload import generate_pool, generate_workload_mix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pattern", default="2A2D")
    ap.add_argument("--alphas", default="1,1,0.714,0.714")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--model", choices=[m.value for m in ModelMode], default="perfect")
    ap.add_argument("--quota", type=float, default=4e9)
    args = ap.parse_args()

    alphas = tuple(float(a) for a in args.alphas.split(","))
    platform = default_platform(len(alphas))
    wl = generate_workload_mix(args.pattern, generate_pool(args.seed), args.seed, alphas=alphas)
    base = baseline_run(wl, platform, args.quota)
    rep = run(wl, platform, Policy.COMBINED, args.model, args.quota)
    per_app = app_savings(rep, base)
    print(f"{'core':>4} {'app':>5} {'alpha':>6} {'savings':>8} {'slowdown':>9}")
    for a, s, v in zip(rep.apps, per_app, long_term_violations(rep, base)):
        print(f"{a.core:>4} {a.name:>5} {a.alpha:>6.3f} {100 * s:>7.2f}% {100 * v.violation:>8.2f}%")
    print(f"total savings {100 * energy_savings(rep, base):.2f}%")


if __name__ == "__main__":
    main()
