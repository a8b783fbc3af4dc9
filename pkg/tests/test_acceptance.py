"""Acceptance checks, one test per criterion, each printing a PASS/FAIL line."""
import math
import time
from pathlib import Path

import numpy as np
import pytest

from qosrma.allocator import InfeasibleAllocation, ReductionTree, brute_force_optimize
from qosrma.cli import ALPHA_GRID, main
from qosrma.energy import AnalyticalModel, build_energy_curve
from qosrma.metrics import energy_savings, long_term_violations, short_term_analysis
from qosrma.perf import QosTarget
from qosrma.platform import default_platform
from qosrma.simulator import ModelMode, Policy, baseline_run, run
from qosrma.workload import (PhaseSpec, SyntheticAppSpec, TruthModel, Workload, archetype_phase,
                             generate_app, generate_pool, generate_workload_mix, measured_stats)

from hand_app import FROZEN, enumerate_by_hand, hand_app, hand_platform
from strategies import random_curves

PLAT = default_platform(4)
SEEDS = range(10)
MARGIN = 0.005


@pytest.fixture
def verdict(capsys):
    def _verdict(num, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
        assert ok, detail
    return _verdict


def _solve(curves, total, prune):
    try:
        a = ReductionTree(curves, total).optimize()
        tree = (a.ways, a.vf_indices, a.total_epi)
    except InfeasibleAllocation:
        tree = None
    try:
        b = brute_force_optimize(curves, total, prune=prune)
        oracle = (b.ways, b.vf_indices, b.total_epi)
    except InfeasibleAllocation:
        oracle = None
    return tree, oracle


def _result(tree):
    try:
        a = tree.optimize()
    except InfeasibleAllocation:
        return None
    return a.ways, a.vf_indices, a.total_epi


def _savings(pattern, seed, policy, mode=ModelMode.PERFECT, **kw):
    pool = generate_pool(seed)
    wl = generate_workload_mix(pattern, pool, seed)
    base = baseline_run(wl, PLAT)
    return energy_savings(run(wl, PLAT, policy, mode, **kw), base)


# 1 -----------------------------------------------------------------------------------

def test_c01_allocator_matches_exhaustive_oracle(verdict):
    start = time.perf_counter()
    mismatches, infeasible, checked = [], 0, 0
    for n in (2, 4, 8):
        total = 8 * n
        w_max = total - 2 * (n - 1)
        for seed in range(500):
            rng = np.random.default_rng([n, seed])
            hole_p = (0.0, 0.2, 0.5, 0.97)[seed % 4]
            ints = (0, 4) if seed % 5 == 0 else None
            curves = random_curves(rng, n, w_max, hole_p=hole_p, integer_range=ints)
            # plain enumeration is cheap up to four cores; eight needs the bound
            tree, oracle = _solve(curves, total, prune=n == 8)
            checked += 1
            infeasible += tree is None
            if tree != oracle:
                mismatches.append((n, seed))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 60
    verdict(1, ok, f"{checked} sets ({infeasible} infeasible), {len(mismatches)} mismatches, "
                   f"{elapsed:.1f} s")


# 2 -----------------------------------------------------------------------------------

def test_c02_incremental_update_cost_and_equivalence(verdict):
    counts_ok = True
    for n in (2, 4, 8):
        rng = np.random.default_rng(n)
        tree = ReductionTree(random_curves(rng, n, 8 * n - 2 * (n - 1)), 8 * n)
        for j in range(n):
            before = tree.reduce_calls
            tree.update(j, random_curves(rng, n, 8 * n - 2 * (n - 1))[j])
            counts_ok &= tree.reduce_calls - before == int(math.log2(n))
    diverged = 0
    for seq in range(200):
        rng = np.random.default_rng([2, seq])
        n = (2, 4, 8)[seq % 3]
        total, w_max = 8 * n, 8 * n - 2 * (n - 1)
        curves = random_curves(rng, n, w_max, hole_p=0.3)
        tree = ReductionTree(list(curves), total)
        for _ in range(int(rng.integers(1, 20))):
            j = int(rng.integers(n))
            curves[j] = random_curves(rng, n, w_max, hole_p=0.3)[j]
            tree.update(j, curves[j])
            fresh = ReductionTree(list(curves), total)
            same = all(a.entries == b.entries for a, b in zip(tree.nodes[1:], fresh.nodes[1:]))
            if not same or _result(tree) != _result(fresh):
                diverged += 1
                break
    verdict(2, counts_ok and diverged == 0,
            f"reduce calls per update == log2 N: {counts_ok}; {diverged}/200 sequences diverged")


# 3 -----------------------------------------------------------------------------------

PATTERNS_3 = ("1A1B1C1D", "2A2D", "2A2C", "4A", "2B2C")


def test_c03_perfect_models_meet_qos(verdict):
    long_term, per_interval, intervals = 0, 0, 0
    for seed in range(20):
        pool = generate_pool(seed, phases=(1, 1))
        wl = generate_workload_mix(PATTERNS_3[seed % len(PATTERNS_3)], pool, seed)
        quota = 2 * max(a.total_instructions for a in wl.apps)  # at least one full run each
        base = baseline_run(wl, PLAT, quota)
        rep = run(wl, PLAT, Policy.COMBINED, ModelMode.PERFECT, quota)
        long_term += sum(v.flagged for v in long_term_violations(rep, base))
        per_interval += sum(not r.qos_ok for r in rep.intervals)
        intervals += len(rep.intervals)
    verdict(3, long_term == 0 and per_interval == 0,
            f"20 workloads, {long_term} long-term and {per_interval}/{intervals} interval violations")


# 4 -----------------------------------------------------------------------------------

def test_c04_dvfs_alone_cannot_save_at_strict_qos(verdict):
    moved, worst = 0, 0.0
    f_b = PLAT.vf.baseline_index
    for seed in SEEDS:
        pool = generate_pool(seed)
        wl = generate_workload_mix("1A1B1C1D", pool, seed)
        base = baseline_run(wl, PLAT)
        rep = run(wl, PLAT, Policy.DVFS, ModelMode.PERFECT)
        moved += sum((r.ways, r.vf) != (8, f_b) for r in rep.intervals)
        moved += sum(d.vfs != (f_b,) * 4 for d in rep.decisions)
        worst = max(worst, abs(energy_savings(rep, base)))
    verdict(4, moved == 0 and worst <= 0.001,
            f"{moved} off-baseline settings, max |savings| {100 * worst:.4f}%")


# 5 -----------------------------------------------------------------------------------

def test_c05_relaxation_is_monotone(verdict):
    rng = np.random.default_rng(5)
    table, coeff = PLAT.vf, PLAT.energy
    not_monotone = 0
    for _ in range(100):
        stats = []
        for j in range(4):
            spec = SyntheticAppSpec(f"s{j}", (archetype_phase("ABCD"[int(rng.integers(4))], rng),), 1,
                                    max_ways=26)
            stats.append(generate_app(spec, int(rng.integers(2**31)), PLAT).phases[0].stats)
        roots = []
        for alpha in ALPHA_GRID:
            target = QosTarget(alpha, 8, table.baseline_index)
            curves = [build_energy_curve(j, s, target, table, coeff, 26) for j, s in enumerate(stats)]
            roots.append(ReductionTree(curves, 32).optimize().total_epi)
        not_monotone += any(b > a for a, b in zip(roots, roots[1:]))

    sim_bad, dips = 0, 0
    for seed in SEEDS:
        pool = generate_pool(seed)
        wl = generate_workload_mix(("1A1B1C1D", "2A2D")[seed % 2], pool, seed)
        base = baseline_run(wl, PLAT)
        excl, incl = [], []
        for alpha in ALPHA_GRID:
            rep = run(wl.with_alphas((alpha,)), PLAT, Policy.COMBINED, ModelMode.PERFECT)
            excl.append(energy_savings(rep, base, include_shared=False))
            incl.append(energy_savings(rep, base))
        sim_bad += any(b < a - 1e-12 for a, b in zip(excl, excl[1:]))
        dips += any(b < a for a, b in zip(incl, incl[1:]))
    verdict(5, not_monotone == 0 and sim_bad == 0,
            f"root EPI non-monotone in {not_monotone}/100 sets; simulated savings non-monotone in "
            f"{sim_bad}/10 workloads (with shared static included, {dips}/10 dip)")


# 6 -----------------------------------------------------------------------------------

def test_c06a_mixed_sensitivity(verdict):
    bad = []
    for seed in SEEDS:
        part = _savings("2A2D", seed, Policy.PARTITION)
        comb = _savings("2A2D", seed, Policy.COMBINED)
        if not (comb > part + MARGIN and part > MARGIN):
            bad.append((seed, part, comb))
    verdict("6a", not bad, f"2A2D combined > partition > 0 with 0.5 pp margin; failures {bad}")


def test_c06b_insensitive_mixes(verdict):
    worst = 0.0
    for pattern in ("2B2D", "4B", "4D"):
        for seed in SEEDS:
            for policy in (Policy.DVFS, Policy.PARTITION, Policy.COMBINED):
                worst = max(worst, abs(_savings(pattern, seed, policy)))
    verdict("6b", worst <= 0.01, f"max |savings| on B/D mixes {100 * worst:.3f}%")


def test_c06c_sensitive_mixes(verdict):
    bad, gaps = [], []
    for seed in SEEDS:
        part = _savings("2A2C", seed, Policy.PARTITION)
        comb = _savings("2A2C", seed, Policy.COMBINED)
        gaps.append(comb - part)
        if not comb > part + MARGIN:
            bad.append((seed, part, comb))
    verdict("6c", not bad, f"2A2C combined - partition min {100 * min(gaps):.2f} pp; failures {bad}")


# 7 -----------------------------------------------------------------------------------

def test_c07_models_exact_without_noise(verdict):
    rng = np.random.default_rng(7)
    worst, points = 0.0, 0
    for i in range(1000):
        spec = SyntheticAppSpec(f"p{i}", (archetype_phase("ABCD"[i % 4], rng),), 1,
                                max_ways=int(rng.integers(8, 51)), materialize_truth=True)
        phase = generate_app(spec, i, PLAT).phases[0]
        cur = (int(rng.integers(2, spec.max_ways + 1)), int(rng.integers(len(PLAT.vf))))
        model = AnalyticalModel(measured_stats(phase, *cur, PLAT.vf, PLAT.energy), PLAT.vf, PLAT.energy)
        truth = TruthModel(phase, PLAT.vf, PLAT.energy)
        for (w, f), pt in phase.truth.items():
            worst = max(worst, abs(model.time(w, f) - pt.time) / pt.time,
                        abs(model.epi(w, f) - truth.epi(w, f)) / truth.epi(w, f))
            points += 1
    verdict(7, worst <= 1e-12, f"{points} settings, max relative error {worst:.2e}")


# 8 -----------------------------------------------------------------------------------

def test_c08_short_term_matches_hand_enumeration(verdict):
    bad = []
    for alpha, frozen in FROZEN.items():
        prob, mean, var, n = enumerate_by_hand(alpha)
        res = short_term_analysis([hand_app()], hand_platform(), QosTarget(alpha, 4, 1))
        got = (res.probability, res.expected, res.stddev, len(res.records))
        want = (float(prob), float(mean), math.sqrt(float(var)), n)
        if got != want or (prob, mean, var, n) != frozen:
            bad.append((alpha, got, want))
    verdict(8, not bad, f"3 alpha levels compared exactly; mismatches {bad}")


# 9 -----------------------------------------------------------------------------------

def test_c09_overheads_are_small(verdict):
    alt = SyntheticAppSpec("alt", (PhaseSpec(0.5, 1.0, 2, 2, 0, {1: 1}, 0, 100, 1.5),
                                   PhaseSpec(0.5, 1.0, 30, 30, 0, {1: 1}, 0, 100, 1.5)), 2)
    app = generate_app(alt, 0, PLAT)
    wl = Workload((app,) * 4, (1 / 1.4,))
    rep = run(wl, PLAT, Policy.DVFS, ModelMode.ANALYTICAL, quota=20e8)
    switching = all(a.dvfs_switches >= a.intervals - 1 for a in rep.apps)
    fraction = max(a.overhead_time / a.quota_time for a in rep.apps)

    delta = 0.0
    cases = [(p, s) for p in ("2A2D", "2A2C", "2B2D", "4B", "4D") for s in SEEDS]
    for pattern, seed in cases:
        for mode in ModelMode:
            for policy in (Policy.DVFS, Policy.PARTITION, Policy.COMBINED):
                on = _savings(pattern, seed, policy, mode, overheads=True)
                off = _savings(pattern, seed, policy, mode, overheads=False)
                delta = max(delta, abs(on - off))
    ok = switching and fraction <= 0.001 and delta < 0.002
    verdict(9, ok, f"VF switches every interval: {switching}; overhead {100 * fraction:.3f}% of "
                   f"time; max savings change from overheads {100 * delta:.3f} pp")


# 10 ----------------------------------------------------------------------------------

def _cli_session(root: Path, monkeypatch):
    monkeypatch.chdir(root)
    cmds = [
        ["gen", "2A2C", "--seed", "3", "--out", "w", "--noise", "0.02"],
        ["run", "--workload", "w/workload.json", "--model", "analytical", "--out", "r"],
        ["sweep-alpha", "--workload", "w/workload.json", "--alpha", "1,0.8", "--quota", "3e8",
         "--jobs", "2", "--out", "sa"],
        ["sweep-baseline", "--workload", "w/workload.json", "--policy", "combined", "--quota",
         "3e8", "--out", "sb"],
        ["qos-analyze", "--workload", "w/workload.json", "--out", "q"],
    ]
    codes = [main(c) for c in cmds]
    files = {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}
    return codes, files


def test_c10_outputs_are_deterministic(verdict, tmp_path, monkeypatch):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    codes_a, files_a = _cli_session(tmp_path / "a", monkeypatch)
    codes_b, files_b = _cli_session(tmp_path / "b", monkeypatch)
    differ = sorted(str(k) for k in files_a if files_a[k] != files_b.get(k))
    ok = codes_a == codes_b == [0] * 5 and files_a.keys() == files_b.keys() and not differ
    verdict(10, ok, f"{len(files_a)} files from 5 commands, {len(differ)} differ {differ}")
