"""Constructive job-by-job scheduler.

Jobs are scheduled one at a time, longest dependency path first. For
every subperiod k of the active job the leaf goes to the end of the
subperiod, executions of common tasks left by earlier jobs are reused
when they fall into the search box (the path from them to the leaf is
then placed forward), and the remaining members are placed backward
from the leaf. Occupied targets are resolved by time-first or
channel-first shifting inside the task's jitter bound; a backward
placement with no room there falls back to the rest of its dependency
window. A slot is only taken when every unplaced parent can still feed
it.

When a job instance does not fit, it is rebuilt with the leaf moved to
another slot of its subperiod. Jobs that are already placed are never
revisited.

The constructed schedule is checked by the validator before it is
reported feasible.
"""

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import networkx as nx

from ..config import LEAF_RETRIES
from ..errors import DegenerateDenominator, Unschedulable
from ..exact.merge import MergedClusters, merge_schedules
from ..logging_config import get_logger
from ..model.outcome import SolveOutcome, SolveStatus
from ..model.schedule import Schedule
from ..model.taskset import JobSpec, TaskSet
from ..utils import partial_jitter_ok, period_start, window_bounds, window_index
from ..validator import dependency_window, switch_over_bounds, validate, validate_transition
from .equations import backward_slot, forward_slot, leaf_target, search_box
from .modes import SchedulerMode, Shifting, order_siblings

logger = get_logger(__name__, namespace='heur')


@dataclass
class JobContext:
    """The active job and its per-member distances."""
    job: JobSpec
    graph: nx.DiGraph
    delta: dict[int, int]
    depth: dict[int, int]
    age_to_leaf: dict[int, int]
    k: int = 1
    subperiods: int = 1

    @property
    def size(self) -> int:
        return len(self.job.members)

    def children(self, task: int) -> list[int]:
        return sorted(self.graph.successors(task))

    def parents(self, task: int) -> list[int]:
        return sorted(self.graph.predecessors(task))

    @classmethod
    def for_job(cls, taskset: TaskSet, job: JobSpec, k: int = 1) -> "JobContext":
        graph = taskset.job_graph(job)
        order = list(nx.topological_sort(graph))
        delta: dict[int, int] = {}
        age_to_leaf: dict[int, int] = {}
        for task in reversed(order):
            children = list(graph.successors(task))
            delta[task] = max((delta[c] + 1 for c in children), default=0)
            age_to_leaf[task] = max((age_to_leaf[c] + taskset.max_age(task, c) for c in children), default=0)
        depth: dict[int, int] = {}
        for task in order:
            depth[task] = max((depth[p] + 1 for p in graph.predecessors(task)), default=0)
        return cls(
            job=job,
            graph=graph,
            delta=delta,
            depth=depth,
            age_to_leaf=age_to_leaf,
            k=k,
            subperiods=taskset.hyperperiod // job.period,
        )


def job_order(taskset: TaskSet) -> list[JobSpec]:
    """Jobs by descending longest path (edges), then ascending id."""
    return sorted(
        taskset.jobs,
        key=lambda job: (-nx.dag_longest_path_length(taskset.job_graph(job)), job.id),
    )


def _in_mode_order(times: Sequence[int], channels: range, mode: SchedulerMode) -> list[tuple[int, int]]:
    if mode.shifting is Shifting.TIME_FIRST:
        return [(t, c) for c in channels for t in times]
    return [(t, c) for t in times for c in channels]


def resolve_slot(
    task: int,
    target: int,
    schedule: Schedule,
    mode: SchedulerMode,
    taskset: TaskSet,
    accept: Optional[Callable[[int], bool]] = None,
    widen: bool = False,
) -> tuple[int, int]:
    """Find a free (time-slot, channel) near `target` within +/- J.

    A cell is unusable when it is filled or when a task in the same
    time-slot intersects with `task`. `accept` can veto whole time-slots.
    With `widen` the rest of the hyperperiod is searched afterwards,
    nearest slots first, in the same shifting order.

    Raises:
        Unschedulable: every candidate is unusable
    """
    jitter = taskset.jitter(task)
    window = [target] + [target + sign * i for i in range(1, jitter + 1) for sign in (1, -1)]
    channels = range(1, schedule.channels + 1)
    candidates = _in_mode_order(window, channels, mode)
    if widen:
        rest = sorted(
            (t for t in range(1, schedule.hyperperiod + 1) if t not in window),
            key=lambda t: (abs(t - target), t < target),
        )
        candidates += _in_mode_order(rest, channels, mode)

    verdicts: dict[int, bool] = {}

    def usable_slot(t: int) -> bool:
        if t not in verdicts:
            verdicts[t] = (
                1 <= t <= schedule.hyperperiod
                and not any(taskset.intersections(u, task) for u in schedule.tasks_at(t))
                and (accept is None or accept(t))
            )
        return verdicts[t]

    for t, c in candidates:
        if usable_slot(t) and schedule.is_free(t, c):
            return t, c
    where = "anywhere in the hyperperiod" if widen else f"within +/-{jitter} of t={target}"
    raise Unschedulable(f"task {task}: no usable slot {where}", task_id=task)


def place_leaf(
    ctx: JobContext,
    schedule: Schedule,
    mode: SchedulerMode,
    taskset: TaskSet,
    accept: Optional[Callable[[int], bool]] = None,
    widen: bool = False,
) -> int:
    """Place (or reuse) the leaf execution of subperiod k; returns its time-slot."""
    leaf = ctx.job.leaf
    low, high = window_bounds(ctx.k, ctx.job.period)
    existing = [s for s in schedule.slots(leaf) if low <= s <= high]
    if existing:
        return existing[-1]
    t, c = resolve_slot(leaf, leaf_target(ctx.job.period, ctx.k), schedule, mode, taskset, accept, widen)
    schedule.place(leaf, t, c)
    return t


def find_common_execution(
    common: int,
    ctx: JobContext,
    schedule: Schedule,
    taskset: TaskSet,
    previous: Optional[dict[int, int]] = None,
) -> Optional[int]:
    """Latest execution of a common task inside its search box, if any.

    `previous` maps members to their slots in subperiod k-1.
    """
    previous = previous or {}
    child_slots = [previous[c] for c in ctx.children(common) if c in previous]
    lower, upper = search_box(
        k=ctx.k,
        period=ctx.job.period,
        leaf_jitter=taskset.jitter(ctx.job.leaf),
        common_jitter=taskset.jitter(common),
        delta=ctx.delta[common],
        size=ctx.size,
        age_sum=ctx.age_to_leaf[common],
        t_child_prev=max(child_slots) if child_slots else None,
        t_common_prev=previous.get(common),
    )
    found = [s for s in schedule.slots(common) if lower <= s <= upper]
    return max(found) if found else None


@dataclass
class _Scheduler:
    taskset: TaskSet
    mode: SchedulerMode
    sources: Sequence[Schedule] = ()
    schedule: Schedule = field(init=False)
    history: dict[tuple[int, int], dict[int, int]] = field(default_factory=dict)
    first_bounds: dict[int, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        self.schedule = Schedule(self.taskset.hyperperiod, self.taskset.channels)
        for source in self.sources:
            for task in source.task_ids():
                if self.taskset.has_task(task):
                    self.first_bounds[task] = switch_over_bounds(
                        source, task, self.taskset.period(task), self.taskset.jitter(task)
                    )

    # ------------------------------------------------------------------
    # Placement rules
    # ------------------------------------------------------------------

    def _window_slots(self, task: int) -> list[Optional[int]]:
        period = self.taskset.period(task)
        slots: list[Optional[int]] = [None] * (self.taskset.hyperperiod // period)
        for s in self.schedule.slots(task):
            slots[window_index(s, period) - 1] = s
        return slots

    def _feeds(self, task: int, t: int, placed: dict[int, int], ctx: JobContext) -> bool:
        """t keeps every placed in-job child and parent of `task` in order."""
        for child in ctx.children(task):
            if child in placed:
                low, high = dependency_window(self.taskset, task, child, placed[child])
                if not low <= t <= high:
                    return False
        for parent in ctx.parents(task):
            if parent in placed:
                low, high = dependency_window(self.taskset, parent, task, t)
                if not low <= placed[parent] <= high:
                    return False
        return True

    def _parents_fit(self, task: int, t: int, placed: dict[int, int], ctx: JobContext) -> bool:
        """Every unplaced in-job parent can still feed `task` at t.

        A parent fits when one of its executions already lies in the
        dependency window, or when the window reaches a period of the
        parent that has no execution yet.
        """
        for parent in ctx.parents(task):
            if parent in placed:
                continue
            low, high = dependency_window(self.taskset, parent, task, t)
            existing = self.schedule.slots(parent)
            if any(low <= s <= high for s in existing):
                continue
            period = self.taskset.period(parent)
            taken = {window_index(s, period) for s in existing}
            if not any(
                window_index(s, period) not in taken and s - period_start(s, period) >= ctx.depth[parent]
                for s in range(low, high + 1)
            ):
                return False
        return True

    def _accepts(self, task: int, t: int, placed: dict[int, int], ctx: JobContext) -> bool:
        period = self.taskset.period(task)
        slots = self._window_slots(task)
        w = window_index(t, period)
        if slots[w - 1] is not None:
            return False
        slots[w - 1] = t
        if not partial_jitter_ok(slots, period, self.taskset.jitter(task), self.taskset.hyperperiod):
            return False
        if t - period_start(t, period) < ctx.depth[task]:
            return False
        if task == ctx.job.leaf:
            low, high = window_bounds(ctx.k, ctx.job.period)
            if not low <= t <= high:
                return False
        if w == 1 and task in self.first_bounds:
            lo, hi = self.first_bounds[task]
            if not lo <= t <= hi:
                return False
        return self._feeds(task, t, placed, ctx) and self._parents_fit(task, t, placed, ctx)

    def _reusable(self, task: int, placed: dict[int, int], ctx: JobContext) -> Optional[int]:
        found = [s for s in self.schedule.slots(task) if self._feeds(task, s, placed, ctx)]
        return max(found) if found else None

    def _resolve(self, task: int, target: int, placed: dict[int, int], ctx: JobContext, widen: bool = False) -> int:
        try:
            t, c = resolve_slot(
                task, target, self.schedule, self.mode, self.taskset,
                accept=lambda s: self._accepts(task, s, placed, ctx),
                widen=widen,
            )
        except Unschedulable as e:
            raise Unschedulable(
                f"job {ctx.job.id}, subperiod {ctx.k}: {e}", task_id=task, subperiod=ctx.k, job_id=ctx.job.id,
            ) from e
        self.schedule.place(task, t, c)
        return t

    # ------------------------------------------------------------------
    # Traversal
    # ------------------------------------------------------------------

    def _forward_from(self, common: int, slot: int, ctx: JobContext, placed: dict[int, int]) -> bool:
        """Reuse `common` at `slot` and place its path to the leaf forward.

        Leaves the schedule untouched and returns False when the path does
        not fit.
        """
        if not self._feeds(common, slot, placed, ctx):
            return False
        trial = dict(placed)
        trial[common] = slot
        added: list[tuple[int, int, int]] = []
        downstream = nx.descendants(ctx.graph, common)
        for task in nx.topological_sort(ctx.graph):
            if task not in downstream or task in trial:
                continue
            anchors = [p for p in ctx.parents(task) if p in trial]
            anchor = max(anchors, key=lambda p: (trial[p], p))
            later = [s for s in self.schedule.slots(common) if s > trial[common]]
            t_next = min(later) if anchor == common and ctx.k < ctx.subperiods and later else None
            try:
                target = forward_slot(
                    trial[anchor], ctx.k * ctx.job.period, ctx.delta[anchor],
                    self.taskset.max_age(anchor, task), t_next,
                )
            except DegenerateDenominator:
                target = trial[anchor] + 1
            reuse = self._reusable(task, trial, ctx)
            if reuse is not None:
                trial[task] = reuse
                continue
            try:
                trial[task] = self._resolve(task, target, trial, ctx)
            except Unschedulable:
                for t_task, t, c in added:
                    self.schedule.remove(t_task, t, c)
                return False
            t_placed = trial[task]
            channel = next(c for s, c in self.schedule.executions(task) if s == t_placed)
            added.append((task, t_placed, channel))
        placed.update(trial)
        return True

    def _backward_target(self, task: int, anchor: int, placed: dict[int, int], ctx: JobContext) -> int:
        previous = self.history.get((ctx.job.id, ctx.k - 1), {})
        try:
            target = backward_slot(
                placed[anchor], previous.get(anchor) if ctx.k > 1 else None,
                ctx.size, ctx.delta[task], self.taskset.max_age(task, anchor),
            )
        except DegenerateDenominator:
            target = max(1, placed[anchor] - 1)
        windows = [dependency_window(self.taskset, task, c, placed[c]) for c in ctx.children(task)]
        low = max(w[0] for w in windows)
        high = min(w[1] for w in windows)
        if low <= high:
            target = min(max(target, low), high)
        return target

    def _backward(self, ctx: JobContext, placed: dict[int, int]) -> None:
        remaining = set(ctx.job.members) - set(placed)
        while remaining:
            # A task is ready once all of its in-job children are placed
            ready = [t for t in remaining if all(c in placed for c in ctx.children(t))]
            anchors = {t: min(ctx.children(t), key=lambda c: (placed[c], c)) for t in ready}
            task = order_siblings(ready, self.mode, self.taskset, anchors)[0]
            reuse = self._reusable(task, placed, ctx)
            if reuse is not None:
                placed[task] = reuse
            else:
                target = self._backward_target(task, anchors[task], placed, ctx)
                placed[task] = self._resolve(task, target, placed, ctx, widen=True)
            remaining.discard(task)

    def _build_instance(self, ctx: JobContext, placed: dict[int, int], banned: set[int]) -> None:
        leaf = ctx.job.leaf
        try:
            placed[leaf] = place_leaf(
                ctx, self.schedule, self.mode, self.taskset,
                accept=lambda s: s not in banned and self._accepts(leaf, s, placed, ctx),
                widen=True,
            )
        except Unschedulable as e:
            raise Unschedulable(
                f"job {ctx.job.id}, subperiod {ctx.k}: {e}", task_id=leaf, subperiod=ctx.k, job_id=ctx.job.id,
            ) from e

        common = {m for m in ctx.job.members if m != leaf and self.schedule.slots(m)}
        frontier = [c for c in common if not (nx.descendants(ctx.graph, c) & common)]
        previous = self.history.get((ctx.job.id, ctx.k - 1))
        for task in sorted(frontier, key=lambda c: (ctx.delta[c], c)):
            if task in placed:
                continue
            slot = find_common_execution(task, ctx, self.schedule, self.taskset, previous)
            if slot is not None and self._forward_from(task, slot, ctx, placed):
                logger.debug(f"job {ctx.job.id} k={ctx.k}: reused task {task} at t={slot}")

        self._backward(ctx, placed)

    def _schedule_instance(self, ctx: JobContext) -> None:
        """Schedule subperiod k, moving the leaf when the members do not fit."""
        snapshot = self.schedule.copy()
        banned: set[int] = set()
        while True:
            placed: dict[int, int] = {}
            try:
                self._build_instance(ctx, placed, banned)
            except Unschedulable:
                leaf_slot = placed.get(ctx.job.leaf)
                if leaf_slot is None or leaf_slot in snapshot.slots(ctx.job.leaf) or len(banned) >= LEAF_RETRIES:
                    raise
                banned.add(leaf_slot)
                self.schedule = snapshot.copy()
                logger.debug(f"job {ctx.job.id} k={ctx.k}: leaf at t={leaf_slot} leaves no room, retrying")
                continue
            self.history[(ctx.job.id, ctx.k)] = placed
            return

    def run(self) -> Schedule:
        """Schedule every job in `job_order`; the first job that does not fit ends the run."""
        for job in job_order(self.taskset):
            ctx = JobContext.for_job(self.taskset, job)
            for k in range(1, ctx.subperiods + 1):
                ctx.k = k
                self._schedule_instance(ctx)
        return self.schedule


def schedule(
    taskset: TaskSet,
    mode: SchedulerMode | str = SchedulerMode(),
    sources: Sequence[Schedule] = (),
) -> SolveOutcome:
    """Build a schedule job by job.

    Args:
        taskset: Problem instance
        mode: SchedulerMode or its two-digit code
        sources: Schedules being replaced; their tasks keep the
            switch-over jitter bound

    Returns:
        FEASIBLE with a validated schedule, or UNSCHEDULABLE naming the
        blocking task and subperiod
    """
    if isinstance(mode, str):
        mode = SchedulerMode.from_code(mode)
    started = time.monotonic()
    builder = _Scheduler(taskset, mode, sources)

    def finish(status: SolveStatus, grid: Optional[Schedule], message: str = "") -> SolveOutcome:
        elapsed = time.monotonic() - started
        logger.info(f"{mode}: {status.value} in {elapsed:.3f}s" + (f" ({message})" if message else ""))
        return SolveOutcome(
            status=status,
            engine=str(mode),
            schedule=grid,
            nodes=builder.schedule.execution_count(),
            elapsed=elapsed,
            message=message,
        )

    try:
        grid = builder.run()
    except Unschedulable as e:
        return finish(SolveStatus.UNSCHEDULABLE, None, str(e))

    report = validate(grid, taskset)
    if not report.overall:
        return finish(SolveStatus.UNSCHEDULABLE, None, f"constructed schedule rejected: {report.summary()}")
    for source in sources:
        transition = validate_transition(source, grid, taskset)
        if not transition.overall:
            return finish(SolveStatus.UNSCHEDULABLE, None, f"switch-over rejected: {transition.summary()}")
    return finish(SolveStatus.FEASIBLE, grid)


def reschedule(merged: MergedClusters, mode: SchedulerMode | str = SchedulerMode()) -> SolveOutcome:
    """Schedule a merged taskset so both source clusters switch over safely."""
    return schedule(merged.taskset, mode, sources=merged.sources)


def adapt(
    first_set: TaskSet,
    first: Schedule,
    second_set: TaskSet,
    second: Schedule,
    mode: SchedulerMode | str = SchedulerMode(),
) -> SolveOutcome:
    """Merge two clusters and reschedule them with the same algorithm."""
    return reschedule(merge_schedules(first, second, first_set, second_set), mode)
