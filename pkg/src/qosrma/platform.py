"""Machine model: VF operating points, LLC geometry, energy and overhead constants."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path


class PlatformError(ValueError):
    pass


@dataclass(frozen=True)
class VFPoint:
    index: int
    frequency: float  # Hz
    voltage: float  # V
    static_power: float  # W

    def __post_init__(self):
        if self.frequency <= 0 or self.voltage <= 0:
            raise PlatformError(f"VF point {self.index}: frequency and voltage must be positive")
        if self.static_power < 0:
            raise PlatformError(f"VF point {self.index}: negative static power")


@dataclass(frozen=True)
class VFTable:
    points: tuple[VFPoint, ...]
    baseline_index: int

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise PlatformError("a VF table needs at least 2 points")
        for i, p in enumerate(pts):
            if p.index != i:
                raise PlatformError(f"VF point at position {i} has index {p.index}")
        for a, b in zip(pts, pts[1:]):
            if not (b.frequency > a.frequency and b.voltage > a.voltage):
                raise PlatformError("frequency and voltage must strictly increase with index")
        self._check(self.baseline_index)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, index: int) -> VFPoint:
        self._check(index)
        return self.points[index]

    def _check(self, index):
        if not 0 <= index < len(self.points):
            raise IndexError(f"VF index {index} out of range [0, {len(self.points) - 1}]")

    @property
    def max_index(self) -> int:
        return len(self.points) - 1

    def with_baseline(self, index: int) -> "VFTable":
        return VFTable(self.points, index)


def default_vf_table(static_w_per_volt: float = 1.0) -> VFTable:
    """Ten points, 1.00-3.25 GHz in 0.25 GHz steps and 0.80-1.25 V in 0.05 V steps.

    Baseline is index 4, the (2 GHz, 1 V) point. Static power is ``k * V``.
    """
    points = []
    for i in range(10):
        volt = (80 + 5 * i) / 100
        points.append(VFPoint(i, (4 + i) * 0.25e9, volt, static_w_per_volt * volt))
    return VFTable(tuple(points), baseline_index=4)


def static_power(table: VFTable, index: int) -> float:
    return table[index].static_power


def scale_dynamic_energy(e_ref: float, table: VFTable, src: int, dst: int) -> float:
    """Rescale a dynamic energy measured at VF ``src`` to VF ``dst`` (voltage squared)."""
    ratio = table[dst].voltage / table[src].voltage
    return e_ref * ratio * ratio


@dataclass(frozen=True)
class CacheGeometry:
    total_ways: int
    num_cores: int
    way_capacity: int = 256 * 1024
    max_ways_per_core: int | None = None
    min_ways_per_core: int = 2

    def __post_init__(self):
        if self.num_cores < 1:
            raise PlatformError("need at least one core")
        if self.min_ways_per_core * self.num_cores > self.total_ways:
            raise PlatformError("not enough ways for the per-core minimum")
        if self.total_ways % self.num_cores:
            raise PlatformError(
                f"{self.total_ways} ways cannot be split evenly over {self.num_cores} cores"
            )
        if self.max_ways_per_core is None:
            object.__setattr__(self, "max_ways_per_core", self.upper_limit)
        if not 2 <= self.max_ways_per_core <= self.upper_limit:
            raise PlatformError(
                f"max ways per core {self.max_ways_per_core} outside [2, {self.upper_limit}]"
            )

    @property
    def upper_limit(self) -> int:
        return self.total_ways - self.min_ways_per_core * (self.num_cores - 1)

    @property
    def baseline_ways(self) -> int:
        return self.total_ways // self.num_cores

    @property
    def way_range(self) -> range:
        return range(self.min_ways_per_core, self.max_ways_per_core + 1)


@dataclass(frozen=True)
class EnergyCoefficients:
    dram_energy_per_access: float = 20e-9  # J
    shared_static_power: float = 0.5  # W, LLC + interconnect
    reference_vf_index: int = 4

    def __post_init__(self):
        if self.dram_energy_per_access < 0 or self.shared_static_power < 0:
            raise PlatformError("energy coefficients must be nonnegative")
        if self.reference_vf_index < 0:
            raise PlatformError("reference VF index must be nonnegative")


@dataclass(frozen=True)
class OverheadSpec:
    rma_instructions: float = 40_000
    dvfs_switch_time: float = 15e-6
    dvfs_switch_energy: float = 3e-6
    repartition_extra_mpki: float = 0.0

    def __post_init__(self):
        for name in ("rma_instructions", "dvfs_switch_time", "dvfs_switch_energy",
                     "repartition_extra_mpki"):
            if getattr(self, name) < 0:
                raise PlatformError(f"overhead {name} must be nonnegative")


NO_OVERHEADS = OverheadSpec(0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Platform:
    """Everything about the machine except the core count, which comes from the workload."""

    vf: VFTable = field(default_factory=default_vf_table)
    total_ways: int = 32
    way_bytes: int = 256 * 1024
    w_max: int | None = None
    energy: EnergyCoefficients = field(default_factory=EnergyCoefficients)
    overheads: OverheadSpec = field(default_factory=OverheadSpec)

    def __post_init__(self):
        self.vf._check(self.energy.reference_vf_index)

    def geometry(self, num_cores: int) -> CacheGeometry:
        return CacheGeometry(self.total_ways, num_cores, self.way_bytes, self.w_max)

    def with_baseline_vf(self, index: int) -> "Platform":
        return replace(self, vf=self.vf.with_baseline(index))

    def to_dict(self) -> dict:
        return {
            "vf_points": [
                {"freq_hz": p.frequency, "volt": p.voltage, "static_w": p.static_power}
                for p in self.vf.points
            ],
            "baseline_index": self.vf.baseline_index,
            "cache": {"total_ways": self.total_ways, "way_bytes": self.way_bytes,
                      "w_max": self.w_max},
            "energy": {
                "dram_nj_per_access": round(self.energy.dram_energy_per_access * 1e9, 9),
                "shared_static_w": self.energy.shared_static_power,
                "reference_vf_index": self.energy.reference_vf_index,
            },
            "overheads": {
                "rma_instr": self.overheads.rma_instructions,
                "dvfs_us": round(self.overheads.dvfs_switch_time * 1e6, 9),
                "dvfs_uj": round(self.overheads.dvfs_switch_energy * 1e6, 9),
                "repart_mpki": self.overheads.repartition_extra_mpki,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Platform":
        try:
            pts = tuple(
                VFPoint(i, float(p["freq_hz"]), float(p["volt"]), float(p["static_w"]))
                for i, p in enumerate(doc["vf_points"])
            )
            vf = VFTable(pts, int(doc["baseline_index"]))
            cache = doc["cache"]
            en = doc.get("energy", {})
            ov = doc.get("overheads", {})
            energy = EnergyCoefficients(
                float(en.get("dram_nj_per_access", 20.0)) / 1e9,
                float(en.get("shared_static_w", 0.5)),
                int(en.get("reference_vf_index", vf.baseline_index)),
            )
            overheads = OverheadSpec(
                float(ov.get("rma_instr", 40_000)),
                float(ov.get("dvfs_us", 15.0)) / 1e6,
                float(ov.get("dvfs_uj", 3.0)) / 1e6,
                float(ov.get("repart_mpki", 0.0)),
            )
            w_max = cache.get("w_max")
            return cls(vf, int(cache["total_ways"]), int(cache.get("way_bytes", 256 * 1024)),
                       None if w_max is None else int(w_max), energy, overheads)
        except KeyError as exc:
            raise PlatformError(f"platform config: missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError, IndexError) as exc:
            raise PlatformError(f"platform config: {exc}") from None


def default_platform(num_cores: int = 4) -> Platform:
    """Default machine: 8 ways per core, 0.5 W/V core leakage, 0.125 W shared leakage per core."""
    return Platform(
        vf=default_vf_table(static_w_per_volt=0.5),
        total_ways=8 * num_cores,
        energy=EnergyCoefficients(20e-9, 0.125 * num_cores, 4),
    )


def load_platform(path) -> Platform:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise PlatformError(f"platform config not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise PlatformError(f"{path}: invalid JSON ({exc})") from None
    return Platform.from_dict(doc)


def save_platform(platform: Platform, path) -> None:
    Path(path).write_text(json.dumps(platform.to_dict(), indent=2, sort_keys=True) + "\n")
