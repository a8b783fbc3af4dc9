"""Phase databases, synthetic apps, classification and workload mixes."""
from .generate import (PhaseSpec, SyntheticAppSpec, archetype_phase, archetype_spec, generate_app,
                       generate_pool, phase_counts)
from .io import (DatabaseError, app_from_dict, app_to_dict, load_database, load_workload,
                 save_database, save_workload)
from .model import (AppProfile, PhaseRecord, TruthModel, TruthPoint, Workload, WorkloadError,
                    classify, generate_workload_mix, ground_truth, measured_stats, mpki,
                    parse_pattern)

__all__ = [
    "AppProfile", "DatabaseError", "PhaseRecord", "PhaseSpec", "SyntheticAppSpec", "TruthModel",
    "TruthPoint", "Workload", "WorkloadError", "app_from_dict", "app_to_dict", "archetype_phase",
    "archetype_spec", "classify", "generate_app", "generate_pool", "generate_workload_mix",
    "ground_truth", "load_database", "load_workload", "measured_stats", "mpki", "parse_pattern",
    "phase_counts", "save_database", "save_workload",
]
