"""Phase database (JSON lines, one app per line) and workload files."""
from __future__ import annotations

import json
from pathlib import Path

from ..perf import IntervalStats, ModelError
from .model import AppProfile, PhaseRecord, TruthPoint, Workload, WorkloadError


class DatabaseError(WorkloadError):
    pass


def _ns(seconds: float) -> float:
    return round(seconds * 1e9, 9)


def app_to_dict(app: AppProfile) -> dict:
    phases = []
    for p in app.phases:
        s = p.stats
        doc = {
            "id": p.phase_id,
            "weight": p.weight,
            "c_base": s.c_base,
            "miss_curve": {str(w): m for w, m in sorted(s.miss_curve.items())},
            "mlp": {str(i): v for i, v in sorted(s.mlp_histogram.items())},
            "writebacks": s.writebacks,
            "mem_latency_ns": _ns(s.mem_latency),
            "dyn_energy_ref_j": s.core_dyn_energy_ref,
        }
        if p.truth is not None:
            doc["truth"] = [
                {"w": w, "f_index": f, "time_s": t.time, "core_j": t.core_energy,
                 "mem_accesses": t.mem_accesses}
                for (w, f), t in sorted(p.truth.items())
            ]
        phases.append(doc)
    return {"name": app.name, "interval_ic": app.interval_ic, "phases": phases,
            "trace": list(app.phase_trace)}


def _field(doc, key, where):
    try:
        return doc[key]
    except (KeyError, TypeError):
        raise DatabaseError(f"{where}: missing field {key!r}") from None


def _number(doc, key, where):
    v = _field(doc, key, where)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DatabaseError(f"{where}: field {key!r} must be a number")
    return float(v)


def _int_map(doc, key, where):
    raw = _field(doc, key, where)
    if not isinstance(raw, dict) or not raw:
        raise DatabaseError(f"{where}: field {key!r} must be a non-empty object")
    try:
        return {int(k): float(v) for k, v in raw.items()}
    except (TypeError, ValueError):
        raise DatabaseError(f"{where}: field {key!r} has non-numeric entries") from None


def app_from_dict(doc: dict, where: str = "app") -> AppProfile:
    if not isinstance(doc, dict):
        raise DatabaseError(f"{where}: expected an object")
    name = _field(doc, "name", where)
    where = f"{where} ({name!r})"
    ic = _number(doc, "interval_ic", where)
    phases = []
    for i, pd in enumerate(_field(doc, "phases", where)):
        pw = f"{where} phase #{i}"
        pid = int(_number(pd, "id", pw))
        mlp = _int_map(pd, "mlp", pw)
        total = sum(mlp.values())
        if abs(total - 1.0) > 1e-9:
            raise DatabaseError(f"{pw}: field 'mlp' probabilities sum to {total}, not 1")
        try:
            stats = IntervalStats(
                ic=ic,
                c_base=_number(pd, "c_base", pw),
                miss_curve=_int_map(pd, "miss_curve", pw),
                mlp_histogram=mlp,
                writebacks=_number(pd, "writebacks", pw),
                mem_latency=_number(pd, "mem_latency_ns", pw) / 1e9,
                core_dyn_energy_ref=_number(pd, "dyn_energy_ref_j", pw),
            )
        except ModelError as exc:
            raise DatabaseError(f"{pw}: {exc}") from None
        truth = None
        if "truth" in pd and pd["truth"] is not None:
            truth = {}
            for j, td in enumerate(pd["truth"]):
                tw = f"{pw} truth #{j}"
                key = (int(_number(td, "w", tw)), int(_number(td, "f_index", tw)))
                truth[key] = TruthPoint(_number(td, "time_s", tw), _number(td, "core_j", tw),
                                        _number(td, "mem_accesses", tw))
        phases.append(PhaseRecord(pid, _number(pd, "weight", pw), stats, truth))
    trace = _field(doc, "trace", where)
    try:
        return AppProfile(name, tuple(phases), tuple(int(x) for x in trace))
    except (WorkloadError, TypeError, ValueError) as exc:
        raise DatabaseError(f"{where}: {exc}") from None


def save_database(apps, path) -> None:
    lines = [json.dumps(app_to_dict(a), sort_keys=True) for a in apps]
    Path(path).write_text("\n".join(lines) + "\n")


def load_database(path) -> list[AppProfile]:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise DatabaseError(f"phase database not found: {path}") from None
    apps = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatabaseError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
        apps.append(app_from_dict(doc, f"{path}:{lineno}"))
    return apps


def save_workload(workload: Workload, path, database: str) -> None:
    doc = {"apps": [a.name for a in workload.apps], "pattern": workload.pattern,
           "alphas": list(workload.alphas), "seed": workload.seed, "database": database}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_workload(path, database=None) -> Workload:
    """Read a workload file; the database path defaults to the one it names, relative to it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise WorkloadError(f"workload file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise WorkloadError(f"{path}: invalid JSON ({exc.msg})") from None
    names = _field(doc, "apps", str(path))
    if database is None:
        database = path.parent / _field(doc, "database", str(path))
    by_name = {a.name: a for a in load_database(database)}
    try:
        apps = tuple(by_name[n] for n in names)
    except KeyError as exc:
        raise WorkloadError(f"{path}: app {exc.args[0]!r} not in {database}") from None
    return Workload(apps, tuple(doc.get("alphas") or ()), doc.get("pattern", ""), doc.get("seed"))
