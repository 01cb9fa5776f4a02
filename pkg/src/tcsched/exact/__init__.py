"""Exact solver, cluster merging and model export."""

from .lp_export import build_problem, export_milp, import_solution
from .merge import MergedClusters, merge_schedules, merge_tasksets
from .solver import (
    MilpInstance,
    Objective,
    compared_period_pairs,
    covers_combined,
    slot_change_objective,
    slot_changes,
    solve,
    solve_adaptation,
    unmoved_allocations,
)

__all__ = [
    'MergedClusters',
    'MilpInstance',
    'Objective',
    'build_problem',
    'compared_period_pairs',
    'covers_combined',
    'export_milp',
    'import_solution',
    'merge_schedules',
    'merge_tasksets',
    'slot_change_objective',
    'slot_changes',
    'solve',
    'solve_adaptation',
    'unmoved_allocations',
]
