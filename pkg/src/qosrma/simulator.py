"""Event-driven co-simulation of a multiprogrammed workload under a resource manager.

Each core replays its app's phase trace interval by interval. The next global
event is the earliest interval completion among cores; at that point the
resource manager runs for the finishing core only, refreshes that core's EPI
curve, re-solves the global allocation and applies it to every core at once.
Cores caught mid-interval finish their remaining instructions under the new
setting.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

from .allocator import InfeasibleAllocation, ReductionTree
from .energy import AnalyticalModel, EnergyCurve, curve_from_model
from .perf import QosTarget, qos_ok_model
from .platform import NO_OVERHEADS, OverheadSpec, Platform
from .workload.model import TruthModel, Workload, ground_truth, measured_stats

DEFAULT_QUOTA = 1e9
FULL_LENGTH_QUOTA = 4146e9  # instructions per app in the full-length experiments


class Policy(str, Enum):
    IDLE = "idle"
    DVFS = "dvfs"
    PARTITION = "partition"
    COMBINED = "combined"


class ModelMode(str, Enum):
    PERFECT = "perfect"
    ANALYTICAL = "analytical"


@dataclass
class IntervalRecord:
    core: int
    app: str
    run: int
    index: int
    phase: int
    start: float
    end: float
    ways: int
    vf: int
    segments: int
    qos_ok: bool  # every segment met the target against ground truth
    baseline_time: float


@dataclass
class Decision:
    time: float
    core: int
    ways: tuple[int, ...]
    vfs: tuple[int, ...]
    fallback: bool = False


@dataclass
class AppResult:
    core: int
    name: str
    alpha: float
    quota_time: float
    run_times: list[float]
    core_energy: float  # J, within quota, overheads included
    dram_energy: float
    overhead_time: float
    overhead_energy: float
    dvfs_switches: int
    rma_calls: int
    fallbacks: int
    intervals: int

    @property
    def energy(self) -> float:
        return self.core_energy + self.dram_energy

    @property
    def mean_run_time(self) -> float:
        if not self.run_times:
            raise ValueError(f"app {self.name!r} on core {self.core} completed no runs")
        return math.fsum(self.run_times) / len(self.run_times)


@dataclass
class SimReport:
    policy: str
    model: str
    quota: float
    baseline_vf: int
    baseline_ways: int
    horizon: float
    shared_static_energy: float
    apps: list[AppResult]
    decisions: list[Decision] = field(default_factory=list)
    intervals: list[IntervalRecord] = field(default_factory=list)

    @property
    def app_energy(self) -> float:
        return math.fsum(a.energy for a in self.apps)

    @property
    def total_energy(self) -> float:
        return self.app_energy + self.shared_static_energy

    @property
    def overhead_time(self) -> float:
        return math.fsum(a.overhead_time for a in self.apps)

    @property
    def fallback_fraction(self) -> float:
        if not self.decisions:
            return 0.0
        return sum(d.fallback for d in self.decisions) / len(self.decisions)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["total_energy"] = self.total_energy
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "SimReport":
        doc = dict(doc)
        doc.pop("total_energy", None)
        doc["apps"] = [AppResult(**a) for a in doc["apps"]]
        doc["decisions"] = [Decision(d["time"], d["core"], tuple(d["ways"]), tuple(d["vfs"]),
                                     d["fallback"]) for d in doc.get("decisions", [])]
        doc["intervals"] = [IntervalRecord(**r) for r in doc.get("intervals", [])]
        return cls(**doc)

    def write(self, out_dir, prefix: str = "") -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{prefix}report.json").write_text(json.dumps(self.to_dict(), indent=1) + "\n")
        with open(out / f"{prefix}intervals.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f.name for f in IntervalRecord.__dataclass_fields__.values()])
            for r in self.intervals:
                w.writerow(astuple_flat(r))
        with open(out / f"{prefix}decisions.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "core", "ways", "vfs", "fallback"])
            for d in self.decisions:
                w.writerow([repr(d.time), d.core, " ".join(map(str, d.ways)),
                            " ".join(map(str, d.vfs)), int(d.fallback)])
        with open(out / f"{prefix}apps.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["core", "name", "alpha", "quota_time", "runs", "mean_run_time",
                        "core_energy", "dram_energy", "overhead_time", "overhead_energy",
                        "dvfs_switches", "rma_calls", "fallbacks"])
            for a in self.apps:
                mean = repr(a.mean_run_time) if a.run_times else ""
                w.writerow([a.core, a.name, repr(a.alpha), repr(a.quota_time), len(a.run_times),
                            mean, repr(a.core_energy), repr(a.dram_energy), repr(a.overhead_time),
                            repr(a.overhead_energy), a.dvfs_switches, a.rma_calls, a.fallbacks])


def astuple_flat(rec) -> list:
    out = []
    for v in asdict(rec).values():
        if isinstance(v, float):
            out.append(repr(v))
        elif isinstance(v, bool):
            out.append(int(v))
        else:
            out.append(v)
    return out


@dataclass
class CoreState:
    core_id: int
    target: QosTarget
    ways: int
    vf: int
    trace: tuple[int, ...]
    pos: int = 0
    run: int = 0
    run_start: float = 0.0
    run_times: list[float] = field(default_factory=list)
    interval_start: float = 0.0
    remaining: float = 0.0  # instructions left in the current interval
    seg_start: float = 0.0  # when the current segment (re)starts executing
    rate: float = 0.0  # instructions per second in the current segment
    executed: float = 0.0
    quota_time: float | None = None
    core_energy: float = 0.0
    dram_energy: float = 0.0
    overhead_time: float = 0.0
    overhead_energy: float = 0.0
    dvfs_switches: int = 0
    rma_calls: int = 0
    fallbacks: int = 0
    intervals: int = 0
    segments: int = 0
    interval_qos: bool = True
    generation: int = 0

    @property
    def phase_id(self) -> int:
        return self.trace[self.pos]

    @property
    def finish_time(self) -> float:
        return self.seg_start + self.remaining / self.rate


@dataclass(frozen=True)
class Event:
    time: float
    core: int


class Simulation:
    """One run of a workload under one policy; call :meth:`step` or :meth:`run`."""

    def __init__(self, workload: Workload, platform: Platform, policy=Policy.COMBINED,
                 mode=ModelMode.PERFECT, quota: float = DEFAULT_QUOTA,
                 overheads: OverheadSpec | bool | None = None, baseline_vf: int | None = None,
                 record: bool = True):
        self.policy = Policy(policy)
        self.mode = ModelMode(mode)
        if baseline_vf is not None:
            platform = platform.with_baseline_vf(baseline_vf)
        self.platform = platform
        self.workload = workload
        self.vf = platform.vf
        self.coeff = platform.energy
        self.geometry = platform.geometry(workload.num_cores)
        self.quota = float(quota)
        if overheads is None:
            overheads = self.mode is ModelMode.ANALYTICAL
        if overheads is True:
            overheads = platform.overheads
        elif overheads is False:
            overheads = NO_OVERHEADS
        self.overheads = overheads
        self.record = record
        self.now = 0.0
        self.done = False
        self.horizon: float | None = None
        self.decisions: list[Decision] = []
        self.interval_log: list[IntervalRecord] = []

        w_b, f_b = self.geometry.baseline_ways, self.vf.baseline_index
        self.w_b, self.f_b = w_b, f_b
        targets = workload.qos_targets(w_b, f_b)
        self.apps = workload.apps
        self.cores = [CoreState(j, targets[j], w_b, f_b, app.phase_trace)
                      for j, app in enumerate(self.apps)]
        for c in self.cores:
            self._start_interval(c, 0.0)
        self._interval_counter = 0
        curves = [self._pinned_curve(j, f_b) for j in range(len(self.cores))]
        self.tree = ReductionTree(curves, self.geometry.total_ways)

    # --- ground truth helpers ---------------------------------------------------

    def _phase(self, core: CoreState, pos: int | None = None):
        app = self.apps[core.core_id]
        return app.phase(core.trace[core.pos if pos is None else pos])

    def _truth(self, phase, w, f):
        return ground_truth(phase, w, f, self.vf, self.coeff)

    def _pinned_curve(self, j, f) -> EnergyCurve:
        return EnergyCurve(j, {self.w_b: (0.0, f)}, 0)

    # --- core bookkeeping ---------------------------------------------------------

    def _set_setting(self, core: CoreState, w: int, f: int) -> None:
        core.ways, core.vf = w, f
        phase = self._phase(core)
        core.rate = phase.stats.ic / self._truth(phase, w, f).time
        core.segments += 1
        if not qos_ok_model(TruthModel(phase, self.vf, self.coeff), core.target, w, f):
            core.interval_qos = False

    def _start_interval(self, core: CoreState, t: float) -> None:
        core.interval_start = t
        core.seg_start = t
        core.remaining = self._phase(core).stats.ic
        core.segments = 0
        core.interval_qos = True
        self._set_setting(core, core.ways, core.vf)

    def _progress(self, core: CoreState, t: float) -> None:
        """Execute ``core`` up to time ``t`` under its current setting."""
        if t <= core.seg_start or core.remaining <= 0:
            return
        done = min(core.remaining, (t - core.seg_start) * core.rate)
        phase = self._phase(core)
        ic = phase.stats.ic
        if core.quota_time is None and core.executed + done >= self.quota:
            core.quota_time = core.seg_start + (self.quota - core.executed) / core.rate
        counted = min(done, max(0.0, self.quota - core.executed))
        if counted > 0:
            pt = self._truth(phase, core.ways, core.vf)
            core.core_energy += counted / ic * pt.core_energy
            core.dram_energy += counted / ic * pt.mem_accesses * self.coeff.dram_energy_per_access
        core.executed += done
        core.remaining -= done
        core.seg_start = t

    def _stall(self, core: CoreState, dt: float, de: float = 0.0, dram: float = 0.0) -> None:
        core.seg_start = max(core.seg_start, self.now) + dt
        core.overhead_time += dt
        if core.executed < self.quota:
            core.overhead_energy += de + dram
            core.core_energy += de
            core.dram_energy += dram

    def _projected_quota_time(self, core: CoreState) -> float | None:
        if core.quota_time is not None:
            return core.quota_time
        need = self.quota - core.executed
        if need <= core.remaining:
            return core.seg_start + need / core.rate
        return None

    # --- resource manager -----------------------------------------------------------

    def _curve(self, core: CoreState, model) -> EnergyCurve:
        nvf = len(self.vf)
        if self.policy is Policy.COMBINED:
            ways, vfs = self.geometry.way_range, range(nvf)
        elif self.policy is Policy.PARTITION:
            ways, vfs = self.geometry.way_range, [self.f_b]
        else:
            ways, vfs = [self.w_b], range(nvf)
        core.generation += 1
        return curve_from_model(core.core_id, model, core.target, ways, vfs, core.generation)

    def _invoke(self, core: CoreState, done_phase, done_w: int, done_f: int) -> None:
        t = self.now
        core.rma_calls += 1
        ov = self.overheads
        if ov.rma_instructions:
            pt = self._truth(done_phase, done_w, done_f)
            ic = done_phase.stats.ic
            self._stall(core, ov.rma_instructions * pt.time / ic,
                        ov.rma_instructions * pt.core_energy / ic)
        if self.mode is ModelMode.PERFECT:
            model = TruthModel(self._phase(core), self.vf, self.coeff)
        else:
            stats = measured_stats(done_phase, done_w, done_f, self.vf, self.coeff)
            model = AnalyticalModel(stats, self.vf, self.coeff)
        curve = self._curve(core, model)
        fallback = False
        if not len(curve):
            curve, fallback = self._pinned_curve(core.core_id, self.vf.max_index), True
        self.tree.update(core.core_id, curve)
        try:
            alloc = self.tree.optimize()
        except InfeasibleAllocation:
            fallback = True
            for c in self.cores:
                self.tree.update(c.core_id, self._pinned_curve(c.core_id, self.vf.max_index))
            alloc = self.tree.optimize()
        if fallback:
            core.fallbacks += 1
        if self.record:
            self.decisions.append(Decision(t, core.core_id, alloc.ways, alloc.vf_indices, fallback))
        self._apply(alloc.ways, alloc.vf_indices)

    def _apply(self, ways, vfs) -> None:
        ov = self.overheads
        for c in self.cores:
            w, f = ways[c.core_id], vfs[c.core_id]
            if (w, f) == (c.ways, c.vf):
                continue
            self._progress(c, self.now)
            old_w, old_f = c.ways, c.vf
            self._set_setting(c, w, f)
            if f != old_f:
                c.dvfs_switches += 1
                if ov.dvfs_switch_time or ov.dvfs_switch_energy:
                    self._stall(c, ov.dvfs_switch_time, ov.dvfs_switch_energy)
            if w > old_w and ov.repartition_extra_mpki:
                phase = self._phase(c)
                extra = ov.repartition_extra_mpki * phase.stats.ic / 1000.0 * (w - old_w)
                self._stall(c, extra * phase.stats.amat, 0.0,
                            extra * self.coeff.dram_energy_per_access)

    # --- event loop -------------------------------------------------------------------

    def next_event(self) -> Event:
        core = min(self.cores, key=lambda c: (c.finish_time, c.core_id))
        return Event(core.finish_time, core.core_id)

    def step(self) -> Event | None:
        """Advance to the next interval completion; ``None`` once every app met its quota."""
        if self.done:
            return None
        ev = self.next_event()
        projected = [self._projected_quota_time(c) for c in self.cores]
        if all(p is not None and p <= ev.time for p in projected):
            self._finish(max(projected))
            return None
        self.now = ev.time
        core = self.cores[ev.core]
        self._progress(core, ev.time)
        core.remaining = 0.0
        phase = self._phase(core)
        done_w, done_f = core.ways, core.vf
        core.intervals += 1
        if self.record:
            app = self.apps[core.core_id]
            base = self._truth(phase, self.w_b, self.f_b).time
            self.interval_log.append(IntervalRecord(
                core.core_id, app.name, core.run, self._interval_counter, phase.phase_id,
                core.interval_start, ev.time, done_w, done_f, core.segments, core.interval_qos,
                base))
        self._interval_counter += 1
        core.pos += 1
        if core.pos == len(core.trace):
            core.run_times.append(ev.time - core.run_start)
            core.run += 1
            core.pos = 0
            core.run_start = ev.time
        self._start_interval(core, ev.time)
        if self.policy is not Policy.IDLE:
            self._invoke(core, phase, done_w, done_f)
        return ev

    def _finish(self, horizon: float) -> None:
        self.now = horizon
        for c in self.cores:
            crossing = self._projected_quota_time(c)
            self._progress(c, horizon)
            if c.quota_time is None:  # rounding left it a hair short
                c.quota_time = crossing
        self.horizon = horizon
        self.done = True

    def run(self) -> SimReport:
        while self.step() is not None:
            pass
        return self.report()

    def report(self) -> SimReport:
        if not self.done:
            raise RuntimeError("simulation has not finished")
        apps = [
            AppResult(c.core_id, self.apps[c.core_id].name, c.target.alpha, c.quota_time,
                      list(c.run_times), c.core_energy, c.dram_energy, c.overhead_time,
                      c.overhead_energy, c.dvfs_switches, c.rma_calls, c.fallbacks, c.intervals)
            for c in self.cores
        ]
        return SimReport(self.policy.value, self.mode.value, self.quota, self.f_b, self.w_b,
                         self.horizon, self.coeff.shared_static_power * self.horizon, apps,
                         self.decisions, self.interval_log)


def run(workload: Workload, platform: Platform, policy=Policy.COMBINED, mode=ModelMode.PERFECT,
        quota: float = DEFAULT_QUOTA, **kwargs) -> SimReport:
    return Simulation(workload, platform, policy, mode, quota, **kwargs).run()


def baseline_run(workload: Workload, platform: Platform, quota: float = DEFAULT_QUOTA,
                 **kwargs) -> SimReport:
    """The idle manager: baseline ways and VF throughout, no overheads."""
    return Simulation(workload, platform, Policy.IDLE, ModelMode.PERFECT, quota, **kwargs).run()
