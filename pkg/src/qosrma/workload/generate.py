"""Parametric synthetic apps standing in for simulated benchmark phase databases."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..perf import IntervalStats
from ..platform import Platform, default_platform
from .model import AppProfile, PhaseRecord, TruthPoint, WorkloadError, classify, ground_truth


@dataclass(frozen=True)
class PhaseSpec:
    """One phase. Misses per kilo-instruction follow
    ``mpki(w) = mpki_inf + (mpki_2 - mpki_inf) * exp(-decay * (w - 2))``."""

    weight: float = 1.0
    base_cpi: float = 0.8
    mpki_2: float = 20.0
    mpki_inf: float = 2.0
    decay: float = 0.25
    mlp: Mapping[int, float] = field(default_factory=lambda: {1: 1.0})
    wb_mpki: float = 0.0
    mem_latency_ns: float = 100.0
    dyn_epi_nj: float = 1.5  # at the reference VF point


@dataclass(frozen=True)
class SyntheticAppSpec:
    name: str
    phases: tuple[PhaseSpec, ...]
    trace_length: int = 10
    interval_ic: float = 1e8
    max_ways: int = 50
    noise: float = 0.0  # sigma of the lognormal perturbation on truth time and energy
    materialize_truth: bool = False


def _check(spec: SyntheticAppSpec):
    if not spec.phases:
        raise WorkloadError(f"{spec.name}: no phases")
    if spec.trace_length < 1:
        raise WorkloadError(f"{spec.name}: trace length must be positive")
    if spec.max_ways < 2:
        raise WorkloadError(f"{spec.name}: max_ways must be at least 2")
    if spec.noise < 0:
        raise WorkloadError(f"{spec.name}: negative noise level")
    for i, p in enumerate(spec.phases):
        if p.mpki_inf > p.mpki_2:
            raise WorkloadError(f"{spec.name} phase {i}: mpki_inf exceeds mpki_2")
        if p.decay < 0:
            raise WorkloadError(f"{spec.name} phase {i}: negative decay")
        if p.mpki_inf < 0 or p.base_cpi < 0 or p.weight <= 0:
            raise WorkloadError(f"{spec.name} phase {i}: invalid parameters")


def phase_counts(weights, length: int) -> list[int]:
    """Integer interval counts per phase by largest remainder; each within 1 of ``w * length``."""
    total = math.fsum(weights)
    quotas = [w / total * length for w in weights]
    counts = [math.floor(q) for q in quotas]
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[: length - sum(counts)]:
        counts[i] += 1
    return counts


def _trace(counts, rng) -> list[int]:
    runs = []
    for pid, n in enumerate(counts):
        while n > 0:
            k = min(n, int(rng.integers(1, 5)))
            runs.append((pid, k))
            n -= k
    order = rng.permutation(len(runs))
    trace = []
    for i in order:
        pid, k = runs[i]
        trace.extend([pid] * k)
    return trace


def generate_app(spec: SyntheticAppSpec, seed: int, platform: Platform | None = None) -> AppProfile:
    """Deterministic app profile for ``(spec, seed)``.

    With ``noise == 0`` and no materialisation the phases carry no truth table,
    so ground truth is the analytical model itself.
    """
    _check(spec)
    platform = platform or default_platform()
    rng = np.random.default_rng(seed)
    ic = spec.interval_ic
    total_w = math.fsum(p.weight for p in spec.phases)
    ways = range(2, spec.max_ways + 1)
    phases = []
    for pid, p in enumerate(spec.phases):
        curve = {
            w: (p.mpki_inf + (p.mpki_2 - p.mpki_inf) * math.exp(-p.decay * (w - 2))) * ic / 1000.0
            for w in ways
        }
        mlp_total = math.fsum(p.mlp.values())
        stats = IntervalStats(
            ic=ic,
            c_base=p.base_cpi * ic,
            miss_curve=curve,
            mlp_histogram={int(i): v / mlp_total for i, v in sorted(p.mlp.items())},
            writebacks=p.wb_mpki * ic / 1000.0,
            mem_latency=p.mem_latency_ns / 1e9,
            core_dyn_energy_ref=p.dyn_epi_nj * 1e-9 * ic,
        )
        record = PhaseRecord(pid, p.weight / total_w, stats)
        if spec.noise > 0 or spec.materialize_truth:
            truth = {}
            for w in ways:
                for f in range(len(platform.vf)):
                    exact = ground_truth(record, w, f, platform.vf, platform.energy)
                    if spec.noise > 0:
                        dt, de = np.exp(spec.noise * rng.standard_normal(2))
                        exact = TruthPoint(exact.time * dt, exact.core_energy * de, exact.mem_accesses)
                    truth[(w, f)] = exact
            record = PhaseRecord(pid, record.weight, stats, truth)
        phases.append(record)
    counts = phase_counts([p.weight for p in spec.phases], spec.trace_length)
    return AppProfile(spec.name, tuple(phases), tuple(_trace(counts, rng)))


# --- category archetypes -----------------------------------------------------------

def _mlp(rng, max_degree):
    degrees = range(1, max_degree + 1)
    probs = rng.dirichlet(np.ones(len(degrees)))
    return {d: float(p) for d, p in zip(degrees, probs)}


def archetype_phase(category: str, rng, weight: float = 1.0) -> PhaseSpec:
    """Random phase whose miss curve lands in ``category`` for an 8-way baseline share.

    Insensitive categories get exactly flat curves. Ranges keep EPI increasing
    with frequency on the default platform.
    """
    u = rng.uniform
    if category == "A":
        hi, lo, k = u(25, 45), u(1, 5), u(0.1, 0.25)
        return PhaseSpec(weight, u(0.5, 1.0), hi, lo, k, _mlp(rng, 4), u(0.5, 3), 100.0, u(1.2, 2.0))
    if category == "B":
        m = u(8, 25)
        return PhaseSpec(weight, u(0.5, 0.9), m, m, 0.0, _mlp(rng, 8), u(1, 5), 100.0, u(1.0, 1.8))
    if category == "C":
        hi, lo, k = u(8, 14), u(0.1, 0.5), u(0.4, 0.7)
        return PhaseSpec(weight, u(0.5, 1.0), hi, lo, k, _mlp(rng, 3), u(0.1, 1), 100.0, u(1.2, 2.0))
    if category == "D":
        m = u(0.01, 2.0)
        return PhaseSpec(weight, u(0.4, 0.9), m, m, 0.0, _mlp(rng, 2), u(0, 0.2), 100.0, u(1.2, 2.0))
    raise WorkloadError(f"unknown category {category!r}")


def archetype_spec(category: str, name: str, rng, phases=(1, 3), trace_length=(4, 10),
                   noise: float = 0.0, max_ways: int = 50) -> SyntheticAppSpec:
    n_phases = int(rng.integers(phases[0], phases[1] + 1))
    weights = rng.dirichlet(np.ones(n_phases)) if n_phases > 1 else [1.0]
    specs = tuple(archetype_phase(category, rng, float(w)) for w in weights)
    length = int(rng.integers(trace_length[0], trace_length[1] + 1))
    length = max(length, n_phases)
    return SyntheticAppSpec(name, specs, length, max_ways=max_ways, noise=noise)


def generate_pool(seed: int, per_category: int = 3, categories: str = "ABCD", phases=(1, 3),
                  trace_length=(4, 10), noise: float = 0.0, baseline_ways: int = 8,
                  platform: Platform | None = None, max_ways: int = 50) -> list[AppProfile]:
    """Apps ``A0, A1, ..., D2``; each is checked against the classifier."""
    rng = np.random.default_rng(seed)
    pool = []
    for cat in categories:
        for i in range(per_category):
            for _ in range(100):
                spec = archetype_spec(cat, f"{cat}{i}", rng, phases, trace_length, noise, max_ways)
                app = generate_app(spec, int(rng.integers(2**31)), platform)
                if classify(app, baseline_ways) == cat:
                    break
            else:  # pragma: no cover - archetype ranges are chosen to classify
                raise WorkloadError(f"could not draw a category-{cat} app")
            pool.append(app)
    return pool
