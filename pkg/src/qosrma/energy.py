"""Energy-per-instruction model and per-core EPI curves over the pruned setting space."""
from __future__ import annotations

from dataclasses import dataclass, field

from .perf import IntervalStats, ModelError, QosTarget, f_min_model, interval_time
from .platform import EnergyCoefficients, VFTable, scale_dynamic_energy


def epi(stats: IntervalStats, w: int, f_index: int, table: VFTable,
        coeff: EnergyCoefficients) -> float:
    """Core dynamic + core static + DRAM access energy of one interval, per instruction.

    Write-backs are assumed independent of the allocation.
    """
    point = table[f_index]
    t = interval_time(stats, w, point.frequency)
    e_dyn = scale_dynamic_energy(stats.core_dyn_energy_ref, table, coeff.reference_vf_index, f_index)
    e_mem = (stats.misses(w) + stats.writebacks) * coeff.dram_energy_per_access
    return (e_dyn + point.static_power * t + e_mem) / stats.ic


@dataclass(frozen=True)
class AnalyticalModel:
    """Predicts a setting's IPS and EPI from one interval's counters."""

    stats: IntervalStats
    table: VFTable
    coeff: EnergyCoefficients

    def time(self, w, f_index):
        return interval_time(self.stats, w, self.table[f_index].frequency)

    def ips(self, w, f_index):
        return self.stats.ic / self.time(w, f_index)

    def epi(self, w, f_index):
        return epi(self.stats, w, f_index, self.table, self.coeff)

    def ways(self):
        return self.stats.miss_curve.keys()


@dataclass
class EnergyCurve:
    core_id: int
    entries: dict[int, tuple[float, int]] = field(default_factory=dict)  # w -> (epi, f_min)
    generation: int = 0

    def __contains__(self, w):
        return w in self.entries

    def __len__(self):
        return len(self.entries)

    def epi(self, w):
        return self.entries[w][0]

    def vf(self, w):
        return self.entries[w][1]

    @property
    def domain(self) -> list[int]:
        return sorted(self.entries)

    @classmethod
    def from_values(cls, core_id, values: dict[int, float], vf: int = 0, generation: int = 0):
        """Curve with a fixed VF index on every entry; handy for tests and dummies."""
        return cls(core_id, {w: (e, vf) for w, e in values.items()}, generation)


def curve_from_model(core_id, model, target: QosTarget, ways, vf_choices,
                     generation: int = 0) -> EnergyCurve:
    """EPI at the minimum feasible VF for each candidate way count.

    Ways without a feasible VF in ``vf_choices`` are left out of the curve.
    """
    vf_choices = sorted(vf_choices)
    available = set(model.ways())
    entries = {}
    for w in sorted(ways):
        if w not in available:
            continue
        f = f_min_model(model, target, w, vf_choices)
        if f is not None:
            entries[w] = (model.epi(w, f), f)
    return EnergyCurve(core_id, entries, generation)


def build_energy_curve(core_id, stats: IntervalStats, target: QosTarget, table: VFTable,
                       coeff: EnergyCoefficients, w_max: int, generation: int = 0,
                       w_min: int = 2) -> EnergyCurve:
    if w_max < w_min:
        raise ModelError(f"w_max {w_max} below minimum allocation {w_min}")
    model = AnalyticalModel(stats, table, coeff)
    return curve_from_model(core_id, model, target, range(w_min, w_max + 1),
                            range(len(table)), generation)
