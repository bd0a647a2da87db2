"""Hybrid coded/uncoded content placement for two overlapping small cells."""
from .analytic import (
    baseline_coded_rate,
    coded_load,
    distinct_request_model,
    load_breakdown,
    total_load,
    uncached_load,
)
from .geometry import TwoCellTopology, exclusive_fraction, intersection_area, overlap_ratio
from .model import ContentLibrary, Placement, SchemeMode, validate_placement, zipf_popularity
from .optimizer import OptimizationResult, optimize, optimize_heuristic
from .simulator import TrialStatistics, run_trials

__all__ = [
    "ContentLibrary",
    "OptimizationResult",
    "Placement",
    "SchemeMode",
    "TrialStatistics",
    "TwoCellTopology",
    "baseline_coded_rate",
    "coded_load",
    "distinct_request_model",
    "exclusive_fraction",
    "intersection_area",
    "load_breakdown",
    "optimize",
    "optimize_heuristic",
    "overlap_ratio",
    "run_trials",
    "total_load",
    "uncached_load",
    "validate_placement",
    "zipf_popularity",
]
