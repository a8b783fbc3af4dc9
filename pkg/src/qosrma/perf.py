"""Analytical interval performance model: MLP-corrected AMAT, IPS and QoS pruning."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Protocol

from .platform import VFTable


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class IntervalStats:
    """Counters of one fixed-length interval.

    ``miss_curve`` maps an LLC way allocation to the LLC miss count the ATD
    predicts for it; ``mlp_histogram`` maps the number of overlapping misses
    to its probability.
    """

    ic: float
    c_base: float  # cycles outside memory stalls
    miss_curve: Mapping[int, float]
    mlp_histogram: Mapping[int, float]
    writebacks: float = 0.0
    mem_latency: float = 100e-9  # s, isolated DRAM access
    core_dyn_energy_ref: float = 0.0  # J at the reference VF point

    def __post_init__(self):
        if not self.ic > 0:
            raise ModelError("instruction count must be positive")
        if self.c_base < 0:
            raise ModelError("c_base must be nonnegative")
        if not self.mlp_histogram:
            raise ModelError("empty MLP histogram")
        if any(i < 1 for i in self.mlp_histogram):
            raise ModelError("MLP overlap degrees start at 1")
        if any(p < 0 for p in self.mlp_histogram.values()):
            raise ModelError("negative MLP probability")
        if abs(sum(self.mlp_histogram.values()) - 1.0) > 1e-9:
            raise ModelError("MLP probabilities must sum to 1")
        if not self.miss_curve:
            raise ModelError("empty miss curve")
        ways = sorted(self.miss_curve)
        for a, b in zip(ways, ways[1:]):
            if self.miss_curve[b] > self.miss_curve[a]:
                raise ModelError(f"miss curve increases between {a} and {b} ways")
        if any(m < 0 for m in self.miss_curve.values()):
            raise ModelError("negative miss count")

    @cached_property
    def amat(self) -> float:
        return amat(self)

    def misses(self, w: int) -> float:
        try:
            return self.miss_curve[w]
        except KeyError:
            raise ModelError(f"no miss count for {w} ways") from None


@dataclass(frozen=True)
class QosTarget:
    alpha: float
    baseline_ways: int
    baseline_vf: int

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ModelError(f"alpha must be in (0, 1], got {self.alpha}")


def amat(stats: IntervalStats) -> float:
    """Average stall per miss: ``ML * sum_i P(i) / i``."""
    if not stats.mlp_histogram:
        raise ModelError("empty MLP histogram")
    return stats.mem_latency * sum(p / i for i, p in sorted(stats.mlp_histogram.items()))


def interval_time(stats: IntervalStats, w: int, f: float) -> float:
    return stats.c_base / f + stats.amat * stats.misses(w)


def ips(stats: IntervalStats, w: int, f: float) -> float:
    return stats.ic / interval_time(stats, w, f)


class SettingModel(Protocol):
    """Anything that predicts per-interval performance and EPI at a (ways, VF index) setting."""

    def ips(self, w: int, f_index: int) -> float: ...

    def epi(self, w: int, f_index: int) -> float: ...


def qos_ok_model(model: SettingModel, target: QosTarget, w: int, f_index: int) -> bool:
    return model.ips(w, f_index) >= model.ips(target.baseline_ways, target.baseline_vf) * target.alpha


def f_min_model(model: SettingModel, target: QosTarget, w: int, vf_choices) -> int | None:
    """Lowest VF index in ``vf_choices`` (ascending) that meets the target at ``w`` ways."""
    floor = model.ips(target.baseline_ways, target.baseline_vf) * target.alpha
    for f in vf_choices:
        if model.ips(w, f) >= floor:
            return f
    return None


@dataclass(frozen=True)
class _StatsPerf:
    stats: IntervalStats
    table: VFTable

    def ips(self, w, f_index):
        return ips(self.stats, w, self.table[f_index].frequency)

    def epi(self, w, f_index):  # pragma: no cover - perf-only view
        raise NotImplementedError


def qos_ok(stats: IntervalStats, target: QosTarget, w: int, f_index: int, table: VFTable) -> bool:
    return qos_ok_model(_StatsPerf(stats, table), target, w, f_index)


def f_min(stats: IntervalStats, target: QosTarget, w: int, table: VFTable) -> int | None:
    return f_min_model(_StatsPerf(stats, table), target, w, range(len(table)))
