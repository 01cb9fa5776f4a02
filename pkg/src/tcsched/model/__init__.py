"""Problem-instance and solution data model."""

from .io import load_schedule, load_taskset, save_schedule, save_taskset, taskset_to_dict
from .outcome import SolveOutcome, SolveStatus
from .schedule import Placement, Schedule
from .taskset import (
    DependencyEdge,
    IntersectionMatrix,
    JobSpec,
    PathSet,
    TaskSet,
    TaskSpec,
    build_taskset,
    empty_taskset,
    hyperperiod,
    intersection_matrix,
    path_sets,
)

__all__ = [
    'DependencyEdge',
    'IntersectionMatrix',
    'JobSpec',
    'PathSet',
    'Placement',
    'Schedule',
    'SolveOutcome',
    'SolveStatus',
    'TaskSet',
    'TaskSpec',
    'build_taskset',
    'empty_taskset',
    'hyperperiod',
    'intersection_matrix',
    'load_schedule',
    'load_taskset',
    'path_sets',
    'save_schedule',
    'save_taskset',
    'taskset_to_dict',
]
