"""Energy savings, long-term QoS violations and short-term violation statistics."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from .energy import AnalyticalModel
from .perf import QosTarget
from .platform import Platform
from .simulator import SimReport
from .workload.model import AppProfile, TruthModel, measured_stats

LONG_TERM_THRESHOLD = 0.01


def _check_comparable(report: SimReport, baseline: SimReport) -> None:
    if [a.name for a in report.apps] != [a.name for a in baseline.apps]:
        raise ValueError("reports cover different workloads")
    if report.quota != baseline.quota:
        raise ValueError(f"reports use different quotas ({report.quota} vs {baseline.quota})")


def energy_savings(report: SimReport, baseline: SimReport, include_shared: bool = True) -> float:
    """Fraction of baseline energy saved; negative when the policy spends more."""
    _check_comparable(report, baseline)
    if include_shared:
        e, e_b = report.total_energy, baseline.total_energy
    else:
        e, e_b = report.app_energy, baseline.app_energy
    return (e_b - e) / e_b


def app_savings(report: SimReport, baseline: SimReport) -> list[float]:
    _check_comparable(report, baseline)
    return [(b.energy - a.energy) / b.energy for a, b in zip(report.apps, baseline.apps)]


@dataclass(frozen=True)
class LongTermViolation:
    core: int
    app: str
    mean_time: float
    baseline_time: float
    violation: float  # relative slowdown, negative when faster
    flagged: bool


def long_term_violations(report: SimReport, baseline: SimReport,
                         threshold: float = LONG_TERM_THRESHOLD) -> list[LongTermViolation]:
    """Mean run time per app against the baseline mean; flagged when more than 1% longer."""
    _check_comparable(report, baseline)
    out = []
    for a, b in zip(report.apps, baseline.apps):
        t, t_b = a.mean_run_time, b.mean_run_time
        v = (t - t_b) / t_b
        out.append(LongTermViolation(a.core, a.name, t, t_b, v, v > threshold))
    return out


# --- short-term analysis ---------------------------------------------------------

@dataclass(frozen=True)
class ShortTermRecord:
    app: str
    phase_id: int  # interval i, source of the statistics
    next_phase_id: int  # interval i+1, source of the actuals
    current: tuple[int, int]
    target: tuple[int, int]
    predicted_ips_target: float
    predicted_ips_baseline: float
    actual_ips_target: float
    actual_ips_baseline: float
    violation: float


@dataclass(frozen=True)
class ShortTermResult:
    probability: float
    expected: float  # mean violation over violating cells only
    stddev: float
    cells: int
    records: tuple[ShortTermRecord, ...] = ()

    def summary(self) -> dict:
        return {"probability": self.probability, "expected_violation": self.expected,
                "stddev": self.stddev, "cells": self.cells, "violating_cells": len(self.records)}


def _pairs(app: AppProfile, mode: str):
    if mode == "phase":
        return [(p, p, Fraction(p.weight)) for p in app.phases]
    if mode == "adjacency":
        tr = app.phase_trace
        n = len(tr)
        return [(app.phase(tr[k]), app.phase(tr[(k + 1) % n]), Fraction(1, n)) for k in range(n)]
    raise ValueError(f"unknown pairing mode {mode!r}")


def _settings(p, q, table, coeff) -> list[tuple[int, int]]:
    ways = set(TruthModel(p, table, coeff).ways()) & set(TruthModel(q, table, coeff).ways())
    return [(w, f) for w in sorted(ways) for f in range(len(table))]


def short_term_analysis(apps, platform: Platform, target: QosTarget, mode: str = "phase",
                        ) -> ShortTermResult:
    """Probability and size of single-interval violations caused by modeling error.

    Every (interval pair, current setting, target setting) cell is visited.
    Pairs are phases weighted by their weight (``mode="phase"``) or consecutive
    trace entries (``mode="adjacency"``); apps count equally and settings are
    uniform. A cell violates when the target is actually slower than the
    baseline while the model, fed the counters of interval i at the current
    setting, predicts it meets ``target.alpha`` of the baseline.
    """
    table, coeff = platform.vf, platform.energy
    base = (target.baseline_ways, target.baseline_vf)
    apps = list(apps)
    if not apps:
        raise ValueError("no apps to analyze")
    total = Fraction(0)
    hit = Fraction(0)
    weighted: list[tuple[Fraction, Fraction]] = []
    records = []
    cells = 0
    for app in apps:
        app_w = Fraction(1, len(apps))
        for p, q, pair_w in _pairs(app, mode):
            settings = _settings(p, q, table, coeff)
            if base not in settings:
                raise ValueError(f"app {app.name!r}: baseline setting {base} missing from the data")
            cell_w = app_w * pair_w / (len(settings) ** 2)
            actual = TruthModel(q, table, coeff)
            ips_b_act = actual.ips(*base)
            t_b_act = actual.time(*base)
            slower = [(tgt, actual.ips(*tgt)) for tgt in settings if actual.ips(*tgt) < ips_b_act]
            cells += len(settings) ** 2
            total += cell_w * len(settings) ** 2
            for cur in settings:
                model = AnalyticalModel(measured_stats(p, *cur, table, coeff), table, coeff)
                ips_b_pred = model.ips(*base)
                for tgt, ips_t_act in slower:
                    ips_t_pred = model.ips(*tgt)
                    if not ips_t_pred >= target.alpha * ips_b_pred:
                        continue
                    v = (actual.time(*tgt) - t_b_act) / t_b_act
                    hit += cell_w
                    weighted.append((cell_w, Fraction(v)))
                    records.append(ShortTermRecord(app.name, p.phase_id, q.phase_id, cur, tgt,
                                                   ips_t_pred, ips_b_pred, ips_t_act, ips_b_act, v))
    if not weighted:
        return ShortTermResult(0.0, 0.0, 0.0, cells)
    mean = sum(w * v for w, v in weighted) / hit
    var = sum(w * (v - mean) ** 2 for w, v in weighted) / hit
    return ShortTermResult(float(hit / total), float(mean), math.sqrt(float(var)), cells,
                           tuple(records))


def write_short_term(result: ShortTermResult, out_dir, prefix: str = "") -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{prefix}violations.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["app", "phase", "next_phase", "w", "f", "w_target", "f_target",
                    "predicted_ips_target", "predicted_ips_baseline", "actual_ips_target",
                    "actual_ips_baseline", "violation"])
        for r in result.records:
            w.writerow([r.app, r.phase_id, r.next_phase_id, *r.current, *r.target,
                        repr(r.predicted_ips_target), repr(r.predicted_ips_baseline),
                        repr(r.actual_ips_target), repr(r.actual_ips_baseline), repr(r.violation)])
    (out / f"{prefix}summary.json").write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n")


def long_term_rows(violations) -> list[dict]:
    return [asdict(v) for v in violations]
