"""Joining two task clusters into one scheduling problem."""

from dataclasses import dataclass

from ..errors import ChannelCountMismatch
from ..logging_config import get_logger
from ..model.schedule import Schedule
from ..model.taskset import DependencyEdge, JobSpec, TaskSet, TaskSpec
from ..utils import lcm_all

logger = get_logger(__name__, namespace='exact')


@dataclass
class MergedClusters:
    """Merged taskset plus the combined schedule C.

    `sources` are the input schedules expressed in merged task ids, at
    their original hyperperiod; they are what a new schedule has to
    switch over from.
    """
    taskset: TaskSet
    combined: Schedule
    id_map: dict[int, int]
    sources: tuple[Schedule, ...]


def merge_tasksets(first: TaskSet, second: TaskSet) -> tuple[TaskSet, dict[int, int]]:
    """Disjoint union of two tasksets.

    Task and job ids of `second` are shifted past those of `first`. Node
    names of `second` that clash with `first` get a `b.` prefix, since
    the clusters run on different devices.

    Returns:
        (merged taskset, id map from `second`'s task ids to merged ids)

    Raises:
        ChannelCountMismatch: the clusters use different channel counts
    """
    if first.channels != second.channels:
        raise ChannelCountMismatch(first.channels, second.channels)

    task_offset = max(first.task_ids) + 1 if first.tasks else 0
    job_offset = max(j.id for j in first.jobs) + 1 if first.jobs else 0
    id_map = {t: t + task_offset for t in second.task_ids}
    clashing = set(first.nodes) | {t.node for t in first.tasks}

    def node_name(node: str) -> str:
        return f"b.{node}" if node in clashing else node

    tasks = first.tasks + tuple(
        TaskSpec(id=id_map[t.id], node=node_name(t.node), max_jitter=t.max_jitter) for t in second.tasks
    )
    edges = first.edges + tuple(
        DependencyEdge(id_map[e.parent], id_map[e.child], e.max_age) for e in second.edges
    )
    jobs = first.jobs + tuple(
        JobSpec(
            id=j.id + job_offset,
            period=j.period,
            leaf=id_map[j.leaf],
            members=tuple(id_map[m] for m in j.members),
            entries=tuple(id_map[e] for e in j.entries),
        )
        for j in second.jobs
    )
    nodes = tuple(dict.fromkeys(first.nodes + tuple(node_name(n) for n in second.nodes)))
    name = "+".join(n for n in (first.name, second.name) if n)
    merged = TaskSet(tasks=tasks, edges=edges, jobs=jobs, channels=first.channels, nodes=nodes, name=name)
    return merged, id_map


def merge_schedules(first: Schedule, second: Schedule, first_set: TaskSet, second_set: TaskSet) -> MergedClusters:
    """Build the merged taskset and the combined schedule C.

    Both schedules are tiled to the merged hyperperiod and laid over
    each other. C may hold two tasks in one cell; it is only a reference
    for rescheduling and is never executed.
    """
    merged, id_map = merge_tasksets(first_set, second_set)
    hyperperiod = lcm_all([first.hyperperiod, second.hyperperiod, merged.hyperperiod])
    second_renamed = second.remapped(id_map)

    combined = Schedule(hyperperiod, merged.channels)
    for source in (first, second_renamed):
        for p in source.tiled(hyperperiod).placements():
            combined.place(p.task, p.t, p.c)

    logger.info(
        f"merged clusters: {len(first_set)}+{len(second_set)} tasks, H'={hyperperiod}, "
        f"{len(combined.collisions())} shared cells in C"
    )
    return MergedClusters(taskset=merged, combined=combined, id_map=id_map, sources=(first, second_renamed))
