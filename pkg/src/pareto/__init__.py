"""Pareto analysis over remaining data rate, used nodes and latency."""
from src.pareto.front import (
    MetricRange,
    MetricRanges,
    ParetoFront,
    ParetoPoint,
    dominates,
    estimate_ranges,
    non_dominated,
    read_front_csv,
    remdr_grid,
    remdr_resolution,
    sweep,
    write_front_csv,
    write_front_solutions,
)

__all__ = [
    "MetricRange",
    "MetricRanges",
    "ParetoFront",
    "ParetoPoint",
    "dominates",
    "estimate_ranges",
    "non_dominated",
    "read_front_csv",
    "remdr_grid",
    "remdr_resolution",
    "sweep",
    "write_front_csv",
    "write_front_solutions",
]
