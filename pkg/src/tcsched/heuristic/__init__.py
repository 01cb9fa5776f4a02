"""Constructive job-by-job scheduler and its placement rules."""

from .equations import backward_slot, forward_slot, leaf_target, search_box
from .modes import ALL_MODES, Ordering, SchedulerMode, Shifting, order_siblings
from .scheduler import (
    JobContext,
    adapt,
    find_common_execution,
    job_order,
    place_leaf,
    reschedule,
    resolve_slot,
    schedule,
)

__all__ = [
    # Modes
    'ALL_MODES',
    'Ordering',
    'SchedulerMode',
    'Shifting',
    'order_siblings',
    # Equations
    'backward_slot',
    'forward_slot',
    'leaf_target',
    'search_box',
    # Scheduler
    'JobContext',
    'adapt',
    'find_common_execution',
    'job_order',
    'place_leaf',
    'reschedule',
    'resolve_slot',
    'schedule',
]
