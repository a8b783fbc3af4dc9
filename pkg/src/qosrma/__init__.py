"""QoS-driven coordinated LLC partitioning and DVFS: models, allocator and simulator."""
from .allocator import AllocationVector, InfeasibleAllocation, ReductionTree, brute_force_optimize, optimize, update_core
from .energy import AnalyticalModel, EnergyCurve, build_energy_curve, epi
from .metrics import energy_savings, long_term_violations, short_term_analysis
from .perf import IntervalStats, QosTarget, amat, f_min, ips, qos_ok
from .platform import Platform, VFTable, default_platform, default_vf_table
from .simulator import ModelMode, Policy, SimReport, Simulation, baseline_run, run

__all__ = [
    "AllocationVector", "AnalyticalModel", "EnergyCurve", "InfeasibleAllocation", "IntervalStats",
    "ModelMode", "Platform", "Policy", "QosTarget", "ReductionTree", "SimReport", "Simulation",
    "VFTable", "amat", "baseline_run", "brute_force_optimize", "build_energy_curve",
    "default_platform", "default_vf_table", "energy_savings", "epi", "f_min", "ips",
    "long_term_violations", "optimize", "qos_ok", "run", "short_term_analysis", "update_core",
]
