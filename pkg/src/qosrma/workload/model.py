from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from ..energy import epi as model_epi
from ..perf import IntervalStats, ModelError, QosTarget, interval_time
from ..platform import EnergyCoefficients, VFTable, scale_dynamic_energy

CATEGORIES = "ABCD"
MI_MPKI = 5.0  # memory intensive above this baseline MPKI
CS_FRACTION = 0.2  # cache sensitive if the MPKI swing exceeds this share of baseline
CS_FLOOR = 0.2  # ... and baseline MPKI exceeds this


class WorkloadError(ValueError):
    pass


@dataclass(frozen=True)
class TruthPoint:
    time: float  # s
    core_energy: float  # J, dynamic + static
    mem_accesses: float


@dataclass(frozen=True)
class PhaseRecord:
    phase_id: int
    weight: float
    stats: IntervalStats
    truth: Mapping[tuple[int, int], TruthPoint] | None = None


@dataclass(frozen=True)
class AppProfile:
    name: str
    phases: tuple[PhaseRecord, ...]
    phase_trace: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))
        object.__setattr__(self, "phase_trace", tuple(self.phase_trace))
        if not self.phases:
            raise WorkloadError(f"app {self.name!r} has no phases")
        if not self.phase_trace:
            raise WorkloadError(f"app {self.name!r} has an empty trace")
        ids = [p.phase_id for p in self.phases]
        if len(set(ids)) != len(ids):
            raise WorkloadError(f"app {self.name!r}: duplicate phase ids")
        if abs(math.fsum(p.weight for p in self.phases) - 1.0) > 1e-9:
            raise WorkloadError(f"app {self.name!r}: phase weights must sum to 1")
        missing = set(self.phase_trace) - set(ids)
        if missing:
            raise WorkloadError(f"app {self.name!r}: trace references unknown phases {sorted(missing)}")
        ics = {p.stats.ic for p in self.phases}
        if len(ics) != 1:
            raise WorkloadError(f"app {self.name!r}: phases disagree on interval length")

    @property
    def interval_ic(self) -> float:
        return self.phases[0].stats.ic

    @property
    def total_instructions(self) -> float:
        return len(self.phase_trace) * self.interval_ic

    def phase(self, phase_id: int) -> PhaseRecord:
        for p in self.phases:
            if p.phase_id == phase_id:
                return p
        raise KeyError(phase_id)

    def trace_weights(self) -> dict[int, float]:
        n = len(self.phase_trace)
        return {p.phase_id: self.phase_trace.count(p.phase_id) / n for p in self.phases}


@dataclass(frozen=True)
class Workload:
    """One app per core, with a QoS relaxation factor per app."""

    apps: tuple[AppProfile, ...]
    alphas: tuple[float, ...] = ()
    pattern: str = ""
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "apps", tuple(self.apps))
        alphas = tuple(self.alphas) or (1.0,) * len(self.apps)
        if len(alphas) == 1 and len(self.apps) > 1:
            alphas = alphas * len(self.apps)
        if len(alphas) != len(self.apps):
            raise WorkloadError(f"{len(alphas)} alpha values for {len(self.apps)} apps")
        for a in alphas:
            if not 0 < a <= 1:
                raise WorkloadError(f"alpha must be in (0, 1], got {a}")
        object.__setattr__(self, "alphas", alphas)

    @property
    def num_cores(self) -> int:
        return len(self.apps)

    def with_alphas(self, alphas) -> "Workload":
        return replace(self, alphas=tuple(alphas))

    def qos_targets(self, baseline_ways: int, baseline_vf: int) -> list[QosTarget]:
        return [QosTarget(a, baseline_ways, baseline_vf) for a in self.alphas]


# --- ground truth --------------------------------------------------------------

def ground_truth(phase: PhaseRecord, w: int, f_index: int, table: VFTable,
                 coeff: EnergyCoefficients) -> TruthPoint:
    """Actual behaviour of an interval of ``phase`` run at ``(w, f_index)``.

    Without a truth table the analytical models are exact by definition.
    """
    if phase.truth is not None:
        try:
            return phase.truth[(w, f_index)]
        except KeyError:
            raise ModelError(f"phase {phase.phase_id}: no truth entry for ({w}, {f_index})") from None
    s = phase.stats
    point = table[f_index]
    t = interval_time(s, w, point.frequency)
    e_dyn = scale_dynamic_energy(s.core_dyn_energy_ref, table, coeff.reference_vf_index, f_index)
    return TruthPoint(t, e_dyn + point.static_power * t, s.misses(w) + s.writebacks)


@dataclass(frozen=True)
class TruthModel:
    """Setting model backed by a phase's ground truth (the perfect predictor)."""

    phase: PhaseRecord
    table: VFTable
    coeff: EnergyCoefficients

    def point(self, w, f_index) -> TruthPoint:
        return ground_truth(self.phase, w, f_index, self.table, self.coeff)

    def time(self, w, f_index):
        return self.point(w, f_index).time

    def ips(self, w, f_index):
        return self.phase.stats.ic / self.time(w, f_index)

    def epi(self, w, f_index):
        if self.phase.truth is None:
            return model_epi(self.phase.stats, w, f_index, self.table, self.coeff)
        p = self.point(w, f_index)
        return (p.core_energy + p.mem_accesses * self.coeff.dram_energy_per_access) / self.phase.stats.ic

    def ways(self):
        if self.phase.truth is None:
            return self.phase.stats.miss_curve.keys()
        return {w for w, _ in self.phase.truth}


def measured_stats(phase: PhaseRecord, w: int, f_index: int, table: VFTable,
                   coeff: EnergyCoefficients) -> IntervalStats:
    """Counters an interval of ``phase`` would report after running at ``(w, f_index)``.

    Base cycles are total cycles minus memory stall cycles; dynamic energy is
    measured core energy minus static energy, rescaled to the reference point.
    """
    s = phase.stats
    if phase.truth is None:
        return s
    act = ground_truth(phase, w, f_index, table, coeff)
    point = table[f_index]
    c_base = max(0.0, (act.time - s.amat * s.misses(w)) * point.frequency)
    e_dyn = max(0.0, act.core_energy - point.static_power * act.time)
    e_ref = scale_dynamic_energy(e_dyn, table, f_index, coeff.reference_vf_index)
    return replace(s, c_base=c_base, core_dyn_energy_ref=e_ref)


# --- classification ------------------------------------------------------------

def _nearest_way(x: float, w_b: int, domain) -> int:
    lo, hi = math.floor(x), math.ceil(x)
    if lo == hi:
        w = lo
    elif x - lo < hi - x:
        w = lo
    elif hi - x < x - lo:
        w = hi
    else:
        w = lo if abs(lo - w_b) < abs(hi - w_b) else hi
    if w not in domain:
        raise WorkloadError(f"miss curve has no entry for {w} ways")
    return w


def mpki(app: AppProfile, w: int, method: str = "aggregate") -> float:
    if method == "aggregate":
        phases = app.phases
        weights = [p.weight for p in phases]
    elif method == "dominant":
        phases = [max(app.phases, key=lambda p: (p.weight, -p.phase_id))]
        weights = [1.0]
    else:
        raise ValueError(f"unknown MPKI method {method!r}")
    total = 0.0
    for p, wt in zip(phases, weights):
        if w not in p.stats.miss_curve:
            raise WorkloadError(f"app {app.name!r} phase {p.phase_id}: no miss count for {w} ways")
        total += wt * p.stats.miss_curve[w] / p.stats.ic * 1000.0
    return total


def classify(app: AppProfile, baseline_ways: int = 8, method: str = "aggregate") -> str:
    """Category A-D from memory intensity and cache sensitivity around the baseline share."""
    if hasattr(baseline_ways, "baseline_ways"):
        baseline_ways = baseline_ways.baseline_ways
    domain = set.intersection(*(set(p.stats.miss_curve) for p in app.phases))
    w_lo = _nearest_way(0.5 * baseline_ways, baseline_ways, domain)
    w_hi = _nearest_way(1.5 * baseline_ways, baseline_ways, domain)
    if baseline_ways not in domain:
        raise WorkloadError(f"miss curve has no entry for the baseline {baseline_ways} ways")
    base = mpki(app, baseline_ways, method)
    swing = mpki(app, w_lo, method) - mpki(app, w_hi, method)
    intensive = base > MI_MPKI
    sensitive = swing > CS_FRACTION * base and base > CS_FLOOR
    if intensive:
        return "A" if sensitive else "B"
    return "C" if sensitive else "D"


# --- workload mixes --------------------------------------------------------------

def parse_pattern(pattern: str) -> list[str]:
    """``"2A2B"`` -> ``["A", "A", "B", "B"]``."""
    parts = re.findall(r"(\d*)([A-Da-d])", pattern)
    if not parts or "".join(n + c for n, c in parts) != pattern:
        raise WorkloadError(f"bad mix pattern {pattern!r}")
    out = []
    for n, c in parts:
        out.extend([c.upper()] * (int(n) if n else 1))
    return out


def generate_workload_mix(pattern: str, pool: list[AppProfile], seed: int,
                          baseline_ways: int = 8, alphas=()) -> Workload:
    """Seeded uniform choice (with replacement) of one pool app per pattern slot."""
    by_cat: dict[str, list[AppProfile]] = {c: [] for c in CATEGORIES}
    for app in pool:
        by_cat[classify(app, baseline_ways)].append(app)
    rng = np.random.default_rng(seed)
    apps = []
    for cat in parse_pattern(pattern):
        choices = by_cat[cat]
        if not choices:
            raise WorkloadError(f"pool has no category-{cat} apps")
        apps.append(choices[int(rng.integers(len(choices)))])
    return Workload(tuple(apps), tuple(alphas), pattern, seed)
