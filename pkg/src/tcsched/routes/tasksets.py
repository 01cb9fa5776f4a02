"""Taskset structure routes."""

from fastapi import APIRouter, HTTPException

from ..errors import SchedulingError
from ..model.taskset import TaskSet, build_taskset

router = APIRouter(prefix="/api", tags=["tasksets"])


def parse_taskset(raw: dict, name: str = "") -> TaskSet:
    """Build a taskset from a request body, mapping model errors to 422."""
    try:
        return build_taskset(raw, name=name)
    except SchedulingError as e:
        raise HTTPException(422, f"invalid taskset: {e}")
    except (TypeError, AttributeError) as e:
        raise HTTPException(422, f"malformed taskset document: {e}")


@router.post("/tasksets/structure")
def taskset_structure(request: dict):
    """Derived structure of a taskset.

    Returns:
        Hyperperiod, per-task periods, entry and leaf tasks, intersecting
        pairs and the per-path task sets
    """
    taskset = parse_taskset(request)
    return {
        "hyperperiod": taskset.hyperperiod,
        "channels": taskset.channels,
        "periods": {str(t): p for t, p in sorted(taskset.periods.items())},
        "entries": sorted(taskset.entry_tasks),
        "leaves": sorted(taskset.leaf_tasks),
        "intersections": [list(pair) for pair in taskset.intersections.pairs()],
        "paths": [
            {
                "entry": entry,
                "leaf": leaf,
                "omega": sorted(ps.omega),
                "omega_breve": sorted(ps.omega_breve),
            }
            for (entry, leaf), ps in sorted(taskset.path_sets.items())
        ],
    }
