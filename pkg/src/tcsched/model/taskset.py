"""Task cluster problem instance.

This module provides:
- TaskSpec, DependencyEdge, JobSpec and TaskSet value types
- build_taskset() turning a raw file description into a checked TaskSet
- Derived structure: hyperperiod, per-task periods, intersection matrix,
  entry/leaf sets and per-(entry, leaf) path sets
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable

import networkx as nx

from ..errors import (
    CyclicDependency,
    DanglingReference,
    DuplicateId,
    EmptyJob,
    MultipleLeaves,
    NonDividingPeriod,
    TaskSetError,
)
from ..logging_config import get_logger
from ..utils import lcm_all

logger = get_logger(__name__, namespace='model')


@dataclass(frozen=True)
class TaskSpec:
    """A single-slot unit of work executed on one node."""
    id: int
    node: str
    max_jitter: int = 0


@dataclass(frozen=True)
class DependencyEdge:
    """`child` consumes data of `parent`, at most `max_age` slots old."""
    parent: int
    child: int
    max_age: int


@dataclass(frozen=True)
class JobSpec:
    """A path through the DAG from its entry tasks to one leaf."""
    id: int
    period: int
    leaf: int
    members: tuple[int, ...]
    entries: tuple[int, ...] = ()


@dataclass(frozen=True)
class PathSet:
    """Members on the paths from one entry to one leaf, split by period."""
    omega: frozenset[int]
    omega_breve: frozenset[int]

    @property
    def members(self) -> frozenset[int]:
        return self.omega | self.omega_breve


class IntersectionMatrix:
    """Symmetric boolean relation of tasks that may not share a time-slot."""

    def __init__(self, task_ids: Iterable[int], pairs: Iterable[tuple[int, int]]):
        self.task_ids = tuple(sorted(task_ids))
        self._pairs: set[frozenset[int]] = {frozenset(p) for p in pairs}

    def __call__(self, u: int, t: int) -> bool:
        return u == t or frozenset((u, t)) in self._pairs

    def neighbours(self, task: int) -> set[int]:
        """Tasks intersecting `task`, excluding itself."""
        return {next(iter(p - {task})) for p in self._pairs if task in p and len(p) == 2}

    def pairs(self) -> list[tuple[int, int]]:
        """Off-diagonal intersecting pairs as (low, high), ascending."""
        return sorted(tuple(sorted(p)) for p in self._pairs if len(p) == 2)  # type: ignore[misc]

    def as_table(self) -> list[list[bool]]:
        return [[self(u, t) for t in self.task_ids] for u in self.task_ids]


@dataclass(frozen=True)
class TaskSet:
    """A scheduling problem instance; immutable once built."""
    tasks: tuple[TaskSpec, ...]
    edges: tuple[DependencyEdge, ...]
    jobs: tuple[JobSpec, ...]
    channels: int
    nodes: tuple[str, ...] = ()
    name: str = field(default="", compare=False)

    # ------------------------------------------------------------------
    # Lookups
    # ------------------------------------------------------------------

    @cached_property
    def task_ids(self) -> tuple[int, ...]:
        return tuple(sorted(t.id for t in self.tasks))

    @cached_property
    def _tasks_by_id(self) -> dict[int, TaskSpec]:
        return {t.id: t for t in self.tasks}

    def task(self, task_id: int) -> TaskSpec:
        return self._tasks_by_id[task_id]

    def has_task(self, task_id: int) -> bool:
        return task_id in self._tasks_by_id

    def jitter(self, task_id: int) -> int:
        return self._tasks_by_id[task_id].max_jitter

    @cached_property
    def _ages(self) -> dict[tuple[int, int], int]:
        return {(e.parent, e.child): e.max_age for e in self.edges}

    def max_age(self, parent: int, child: int) -> int:
        """Entry d of matrix D for the edge parent -> child."""
        return self._ages[(parent, child)]

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.task_ids)
        g.add_edges_from((e.parent, e.child, {'max_age': e.max_age}) for e in self.edges)
        return g

    def parents(self, task_id: int) -> list[int]:
        """Γ_T: the dependencies of a task, ascending."""
        return sorted(self.graph.predecessors(task_id))

    def children(self, task_id: int) -> list[int]:
        return sorted(self.graph.successors(task_id))

    def job(self, job_id: int) -> JobSpec:
        for job in self.jobs:
            if job.id == job_id:
                return job
        raise KeyError(job_id)

    def job_graph(self, job: JobSpec) -> nx.DiGraph:
        """Dependency graph restricted to the job's members."""
        return self.graph.subgraph(job.members)

    def jobs_of(self, task_id: int) -> list[JobSpec]:
        """Jobs a task participates in."""
        return [j for j in self.jobs if task_id in j.members]

    # ------------------------------------------------------------------
    # Derived structure
    # ------------------------------------------------------------------

    @cached_property
    def hyperperiod(self) -> int:
        return hyperperiod(self)

    @cached_property
    def periods(self) -> dict[int, int]:
        """P_T: the shortest period of all jobs a task participates in."""
        result: dict[int, int] = {}
        for job in self.jobs:
            for member in job.members:
                result[member] = min(result.get(member, job.period), job.period)
        return result

    def period(self, task_id: int) -> int:
        return self.periods[task_id]

    def executions_per_hyperperiod(self, task_id: int) -> int:
        return self.hyperperiod // self.periods[task_id]

    @cached_property
    def entry_tasks(self) -> frozenset[int]:
        """E: tasks without dependencies inside some job."""
        return frozenset(e for job in self.jobs for e in job.entries)

    @cached_property
    def leaf_tasks(self) -> frozenset[int]:
        """L: the leaves of all jobs."""
        return frozenset(job.leaf for job in self.jobs)

    @cached_property
    def intersections(self) -> IntersectionMatrix:
        return intersection_matrix(self)

    @cached_property
    def path_sets(self) -> dict[tuple[int, int], PathSet]:
        return path_sets(self)

    def __len__(self) -> int:
        return len(self.tasks)


# ============================================================================
# Operations
# ============================================================================

def hyperperiod(taskset: TaskSet) -> int:
    """Least common multiple of all job periods."""
    return lcm_all([job.period for job in taskset.jobs])


def intersection_matrix(taskset: TaskSet) -> IntersectionMatrix:
    """Tasks intersect when they share a node, an edge, a parent or a child."""
    g = taskset.graph
    pairs: set[tuple[int, int]] = set()
    ids = taskset.task_ids
    for i, u in enumerate(ids):
        for t in ids[i + 1:]:
            if (
                taskset.task(u).node == taskset.task(t).node
                or g.has_edge(u, t)
                or g.has_edge(t, u)
                or set(g.predecessors(u)) & set(g.predecessors(t))
                or set(g.successors(u)) & set(g.successors(t))
            ):
                pairs.add((u, t))
    return IntersectionMatrix(ids, pairs)


def path_sets(taskset: TaskSet) -> dict[tuple[int, int], PathSet]:
    """Ω and Ω̆ for every (entry, leaf) pair of every job.

    Ω holds the members on paths from the entry to the leaf whose period
    equals the job period, Ω̆ those with a shorter period.
    """
    result: dict[tuple[int, int], PathSet] = {}
    for job in taskset.jobs:
        jg = taskset.job_graph(job)
        upstream = nx.ancestors(jg, job.leaf) | {job.leaf}
        for entry in job.entries:
            on_path = (nx.descendants(jg, entry) | {entry}) & upstream
            omega = frozenset(t for t in on_path if taskset.period(t) == job.period)
            breve = frozenset(t for t in on_path if taskset.period(t) < job.period)
            key = (entry, job.leaf)
            if key in result:
                prev = result[key]
                omega, breve = omega | prev.omega, breve | prev.omega_breve
            result[key] = PathSet(omega=omega, omega_breve=breve)
    return result


def _require_int(raw: dict, key: str, where: str, minimum: int | None = None) -> int:
    value = raw.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise TaskSetError(f"{where}: '{key}' must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise TaskSetError(f"{where}: '{key}' must be >= {minimum}, got {value}")
    return value


def build_taskset(raw: dict[str, Any], name: str = "") -> TaskSet:
    """Build and check a TaskSet from its file description.

    Args:
        raw: Parsed taskset document (channels, nodes, tasks, edges, jobs)
        name: Optional label carried for reporting

    Returns:
        A TaskSet whose invariants hold

    Raises:
        CyclicDependency, MultipleLeaves, DanglingReference,
        NonDividingPeriod, DuplicateId, EmptyJob, TaskSetError
    """
    channels = _require_int(raw, 'channels', 'taskset', minimum=1)

    tasks: dict[int, TaskSpec] = {}
    for entry in raw.get('tasks', []):
        task_id = _require_int(entry, 'id', 'task', minimum=0)
        if task_id in tasks:
            raise DuplicateId(f"task id {task_id} appears twice")
        jitter = _require_int({'maxJitter': entry.get('maxJitter', 0)}, 'maxJitter', f"task {task_id}", minimum=0)
        tasks[task_id] = TaskSpec(id=task_id, node=str(entry.get('node', task_id)), max_jitter=jitter)

    nodes = tuple(str(n) for n in raw.get('nodes', []))
    if nodes:
        unknown = {t.node for t in tasks.values()} - set(nodes)
        if unknown:
            raise DanglingReference(f"tasks run on undeclared nodes: {sorted(unknown)}")
    else:
        nodes = tuple(sorted({t.node for t in tasks.values()}))

    edges: dict[tuple[int, int], DependencyEdge] = {}
    for entry in raw.get('edges', []):
        parent = _require_int(entry, 'from', 'edge')
        child = _require_int(entry, 'to', 'edge')
        where = f"edge {parent}->{child}"
        if parent not in tasks or child not in tasks:
            raise DanglingReference(f"{where} references an unknown task")
        if parent == child:
            raise CyclicDependency([(parent, child)])
        if (parent, child) in edges:
            raise DuplicateId(f"{where} appears twice")
        edges[(parent, child)] = DependencyEdge(parent, child, _require_int(entry, 'maxAge', where, minimum=1))

    graph = nx.DiGraph()
    graph.add_nodes_from(tasks)
    graph.add_edges_from(edges)
    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        raise CyclicDependency([(u, v) for u, v in cycle])

    jobs: dict[int, JobSpec] = {}
    for entry in raw.get('jobs', []):
        job_id = _require_int(entry, 'id', 'job', minimum=0)
        where = f"job {job_id}"
        if job_id in jobs:
            raise DuplicateId(f"{where} appears twice")
        period = _require_int(entry, 'period', where)
        if period < 1:
            raise EmptyJob(f"{where}: period must be positive")
        if not entry.get('members'):
            raise EmptyJob(f"{where} has no members")
        members = sorted(set(entry['members']))
        leaf = _require_int(entry, 'leaf', where)
        if leaf not in members:
            members = sorted(set(members) | {leaf})
        missing = [m for m in members if m not in tasks]
        if missing:
            raise DanglingReference(f"{where} references unknown tasks {missing}")

        sub = graph.subgraph(members)
        leaves = sorted(m for m in members if sub.out_degree(m) == 0)
        if leaves != [leaf]:
            raise MultipleLeaves(job_id, leaves)
        unreachable = set(members) - nx.ancestors(sub, leaf) - {leaf}
        if unreachable:
            raise TaskSetError(f"{where}: members {sorted(unreachable)} do not reach leaf {leaf}")
        entries = tuple(sorted(m for m in members if sub.in_degree(m) == 0))
        declared = entry.get('entries')
        if declared is not None and sorted(declared) != list(entries):
            raise TaskSetError(f"{where}: declared entries {sorted(declared)} differ from {list(entries)}")
        jobs[job_id] = JobSpec(id=job_id, period=period, leaf=leaf, members=tuple(members), entries=entries)

    orphans = set(tasks) - {m for job in jobs.values() for m in job.members}
    if orphans:
        raise TaskSetError(f"tasks {sorted(orphans)} belong to no job")

    h = lcm_all([job.period for job in jobs.values()])
    declared_h = raw.get('hyperperiod')
    if declared_h is not None:
        for job in jobs.values():
            if declared_h % job.period:
                raise NonDividingPeriod(job.id, job.period, declared_h)
        if declared_h != h:
            logger.warning(f"declared hyperperiod {declared_h} differs from lcm {h}; using {h}")

    taskset = TaskSet(
        tasks=tuple(tasks[i] for i in sorted(tasks)),
        edges=tuple(edges[k] for k in sorted(edges)),
        jobs=tuple(jobs[i] for i in sorted(jobs)),
        channels=channels,
        nodes=nodes,
        name=name or str(raw.get('name', '')),
    )
    logger.debug(
        f"built taskset {taskset.name!r}: {len(tasks)} tasks, {len(edges)} edges, "
        f"{len(jobs)} jobs, H={taskset.hyperperiod}, M={channels}"
    )
    return taskset


def empty_taskset(channels: int = 1) -> TaskSet:
    """A taskset without tasks; its hyperperiod is 1."""
    return TaskSet(tasks=(), edges=(), jobs=(), channels=channels)
