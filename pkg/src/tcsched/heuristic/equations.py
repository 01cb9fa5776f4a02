"""Placement formulas of the constructive scheduler.

All slots are 1-indexed. `k` is the subperiod (job instance) index,
`size` the member count of the active job and `delta` a task's hop
distance to the job's leaf.
"""

from typing import Optional

from ..errors import DegenerateDenominator


def leaf_target(period: int, k: int) -> int:
    """Latest slot of the k-th subperiod."""
    return k * period


def backward_slot(
    t_child: int,
    t_child_prev: Optional[int],
    size: int,
    delta: int,
    max_age: int,
) -> int:
    """Target slot of a parent, spread back from its child.

    Args:
        t_child: Child's slot in this subperiod
        t_child_prev: Child's slot in the previous subperiod (None for k=1)
        size: Member count of the active job
        delta: Parent's distance to the leaf
        max_age: Age bound of the parent -> child edge

    Raises:
        DegenerateDenominator: size == delta
    """
    denominator = size - delta
    if denominator <= 0:
        raise DegenerateDenominator(f"job size {size} leaves no room for distance {delta}")
    room = t_child - 1 if t_child_prev is None else t_child - t_child_prev - 1
    return max(1, t_child - min(max(room, 0) // denominator, max_age))


def forward_slot(
    t_parent: int,
    subperiod_end: int,
    delta: int,
    max_age: int,
    t_parent_next: Optional[int] = None,
) -> int:
    """Target slot of a child placed after a reused parent execution.

    `t_parent_next` is the parent's next execution when the parent is the
    reused common task and a later subperiod exists; the child then lands
    before it.

    Raises:
        DegenerateDenominator: delta == 0 (the parent is the leaf)
    """
    if delta <= 0:
        raise DegenerateDenominator("the leaf has no forward children")
    horizon = subperiod_end if t_parent_next is None else min(subperiod_end, t_parent_next)
    return t_parent + max(1, min((horizon - t_parent) // delta, max_age))


def search_box(
    k: int,
    period: int,
    leaf_jitter: int,
    common_jitter: int,
    delta: int,
    size: int,
    age_sum: int,
    t_child_prev: Optional[int] = None,
    t_common_prev: Optional[int] = None,
) -> tuple[int, int]:
    """Slot range in which an existing common-task execution may be reused.

    For k=1 the bounds are [size - delta, P + J_l - delta]. Later
    subperiods start from k*P - J_l - sum d and are additionally bounded
    by the previous subperiod's executions of the common task and its
    child.
    """
    upper = k * period + leaf_jitter - delta
    if k == 1:
        return size - delta, upper
    lower = k * period - leaf_jitter - age_sum
    if t_child_prev is not None:
        lower = max(lower, t_child_prev + 1)
    if t_common_prev is not None:
        lower = max(lower, t_common_prev + period - common_jitter)
        upper = min(upper, t_common_prev + period + common_jitter)
    return lower, upper
