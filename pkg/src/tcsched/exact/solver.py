"""Exact scheduling by depth-first branch-and-bound.

The search space is the binary tensor a[T, c, t]. Channels inside a
time-slot are interchangeable, so the search branches on one time-slot
per (task, own-period window) unit and hands out channels when an
assignment is complete. Partial assignments are pruned by capacity,
intersection, jitter and dependency-window checks; complete ones are
accepted only if the validator accepts the resulting schedule.
"""

import random
import time
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence

from ..config import DEADLINE_CHECK_INTERVAL, DEFAULT_BRANCHING_SEED, DEFAULT_TIMEOUT_SECONDS, OBJECTIVE_NORMALIZE
from ..errors import DimensionMismatch, SchedulingError
from ..logging_config import get_logger
from ..model.outcome import SolveOutcome, SolveStatus
from ..model.schedule import Schedule
from ..model.taskset import TaskSet
from ..utils import partial_jitter_ok, period_start, window_bounds, window_index
from ..validator import switch_over_bounds, validate, validate_transition

logger = get_logger(__name__, namespace='exact')


class Objective(str, Enum):
    NONE = 'none'
    SLOT_CHANGES = 'jitter'
    STABILITY = 'stability'


@dataclass
class MilpInstance:
    """A taskset plus objective; adaptation instances also carry C.

    `sources` are the schedules being replaced, in merged task ids; the
    first execution of each of their tasks must keep the switch-over gap.
    """
    taskset: TaskSet
    objective: Objective = Objective.NONE
    combined: Optional[Schedule] = None
    sources: tuple[Schedule, ...] = ()

    @property
    def variable_count(self) -> int:
        return len(self.taskset) * self.taskset.channels * self.taskset.hyperperiod

    def variables(self) -> Iterator[tuple[int, int, int]]:
        """(task, channel, time-slot) index of every a[T, c, t]."""
        for task in self.taskset.task_ids:
            for c in range(1, self.taskset.channels + 1):
                for t in range(1, self.taskset.hyperperiod + 1):
                    yield task, c, t


def compared_period_pairs(taskset: TaskSet) -> int:
    """N: number of consecutive own-period pairs over all tasks."""
    return sum(taskset.executions_per_hyperperiod(t) - 1 for t in taskset.task_ids)


def slot_changes(schedule: Schedule, taskset: TaskSet) -> int:
    """Un-normalized slot-change objective.

    Sum over tasks and t in 1..H-P of |x[t] - x[t+P]| where x is the
    channel-collapsed occupancy of the task.
    """
    total = 0
    for task in taskset.task_ids:
        period = taskset.period(task)
        occupancy = Counter(schedule.slots(task))
        total += sum(abs(occupancy[t] - occupancy[t + period]) for t in range(1, taskset.hyperperiod - period + 1))
    return total


def slot_change_objective(schedule: Schedule, taskset: TaskSet, normalize: bool = OBJECTIVE_NORMALIZE) -> float:
    raw = slot_changes(schedule, taskset)
    pairs = compared_period_pairs(taskset)
    return raw / pairs if normalize and pairs else float(raw)


def unmoved_allocations(before: Schedule, after: Schedule) -> int:
    """Count of (task, time-slot) allocations present in both schedules."""
    return len(before.collapsed() & after.collapsed())


def covers_combined(schedule: Schedule, combined: Schedule, taskset: TaskSet) -> bool:
    """Every allocation of C has an execution of its task within +/- J."""
    for task, t in combined.collapsed():
        if not taskset.has_task(task):
            continue
        jitter = taskset.jitter(task)
        if not any(abs(s - t) <= jitter for s in schedule.slots(task)):
            return False
    return True


@dataclass(frozen=True)
class _Unit:
    task: int
    window: int
    domain: tuple[int, ...]


class _Deadline(Exception):
    pass


class _BranchAndBound:
    def __init__(self, instance: MilpInstance, deadline: float, seed: int):
        ts = instance.taskset
        self.instance = instance
        self.taskset = ts
        self.hyperperiod = ts.hyperperiod
        self.channels = ts.channels
        self.objective = instance.objective
        self.deadline = deadline

        self.period = {t: ts.period(t) for t in ts.task_ids}
        self.jitter = {t: ts.jitter(t) for t in ts.task_ids}
        self.in_edges = {t: [(u, ts.max_age(u, t)) for u in ts.parents(t)] for t in ts.task_ids}
        self.out_edges = {t: [(x, ts.max_age(t, x)) for x in ts.children(t)] for t in ts.task_ids}
        self.conflicts = {t: ts.intersections.neighbours(t) | {t} for t in ts.task_ids}

        self.c_slots: dict[int, set[int]] = defaultdict(set)
        if instance.combined is not None:
            for task, t in instance.combined.collapsed():
                self.c_slots[task].add(t)

        self.units = self._build_units(instance)
        self.rank = self._static_rank(seed)
        self.matchable = sum(1 for u in self.units if self.c_slots[u.task] & set(u.domain))

        self.slot_tasks: dict[int, list[int]] = defaultdict(list)
        self.task_slots: dict[int, list[Optional[int]]] = {
            t: [None] * ts.executions_per_hyperperiod(t) for t in ts.task_ids
        }
        self.open: set[int] = set(range(len(self.units)))
        self.nodes = 0
        self.done = False
        self.best: Optional[Schedule] = None
        self.best_value: Optional[int] = None

    # ------------------------------------------------------------------
    # Setup
    # ------------------------------------------------------------------

    def _build_units(self, instance: MilpInstance) -> list[_Unit]:
        first_bounds: dict[int, tuple[int, int]] = {}
        for source in instance.sources:
            for task in source.task_ids():
                if task in self.period:
                    first_bounds[task] = switch_over_bounds(source, task, self.period[task], self.jitter[task])

        units = []
        for task in self.taskset.task_ids:
            period = self.period[task]
            for w in range(1, self.hyperperiod // period + 1):
                low, high = window_bounds(w, period)
                domain = list(range(low, high + 1))
                if self.c_slots.get(task):
                    reach = self.jitter[task]
                    domain = [s for s in domain if any(abs(s - c) <= reach for c in self.c_slots[task])]
                if w == 1 and task in first_bounds:
                    lo, hi = first_bounds[task]
                    domain = [s for s in domain if lo <= s <= hi]
                units.append(_Unit(task, w, tuple(domain)))
        return units

    def _slack(self, unit: _Unit) -> int:
        slack = len(unit.domain)
        ages = [d for _, d in self.in_edges[unit.task]]
        if ages:
            slack = min(slack, min(ages))
        if self.taskset.executions_per_hyperperiod(unit.task) > 1:
            slack = min(slack, 2 * self.jitter[unit.task] + 1)
        return slack

    def _static_rank(self, seed: int) -> dict[int, int]:
        order = list(range(len(self.units)))
        if seed:
            random.Random(seed).shuffle(order)
            order.sort(key=lambda i: self._slack(self.units[i]))
        else:
            order.sort(key=lambda i: (self._slack(self.units[i]), self.units[i].task, self.units[i].window))
        return {ui: pos for pos, ui in enumerate(order)}

    # ------------------------------------------------------------------
    # Consistency checks
    # ------------------------------------------------------------------

    def _parent_status(self, parent: int, low: int, high: int) -> Optional[bool]:
        """True if parent runs in [low, high], False if it cannot, None if undecided."""
        if low > high:
            return False
        period = self.period[parent]
        slots = self.task_slots[parent]
        pending = False
        for w in range(window_index(low, period), window_index(high, period) + 1):
            s = slots[w - 1]
            if s is None:
                pending = True
            elif low <= s <= high:
                return True
        return None if pending else False

    def _admissible(self, ui: int, s: int) -> bool:
        unit = self.units[ui]
        task = unit.task
        occupants = self.slot_tasks[s]
        if len(occupants) >= self.channels:
            return False
        if any(u in self.conflicts[task] for u in occupants):
            return False

        slots = self.task_slots[task]
        slots[unit.window - 1] = s
        try:
            if not partial_jitter_ok(slots, self.period[task], self.jitter[task], self.hyperperiod):
                return False
            start = period_start(s, self.period[task])
            for parent, age in self.in_edges[task]:
                if self._parent_status(parent, max(1, s - age, start), s - 1) is False:
                    return False
            for child, age in self.out_edges[task]:
                child_period = self.period[child]
                for t_child in self.task_slots[child]:
                    if t_child is None:
                        continue
                    low = max(1, t_child - age, period_start(t_child, child_period))
                    if self._parent_status(task, low, t_child - 1) is False:
                        return False
            return True
        finally:
            slots[unit.window - 1] = None

    # ------------------------------------------------------------------
    # Search
    # ------------------------------------------------------------------

    def _assign(self, ui: int, s: int) -> None:
        unit = self.units[ui]
        self.task_slots[unit.task][unit.window - 1] = s
        self.slot_tasks[s].append(unit.task)
        self.open.discard(ui)

    def _unassign(self, ui: int, s: int) -> None:
        unit = self.units[ui]
        self.task_slots[unit.task][unit.window - 1] = None
        self.slot_tasks[s].remove(unit.task)
        self.open.add(ui)

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes % DEADLINE_CHECK_INTERVAL == 0 and time.monotonic() > self.deadline:
            raise _Deadline()

    def _slot_change_bound(self) -> int:
        bound = 0
        for task, slots in self.task_slots.items():
            period = self.period[task]
            for a, b in zip(slots, slots[1:]):
                if a is not None and b is not None and b != a + period:
                    bound += 2
        return bound

    def _matched(self) -> int:
        return sum(
            1 for task, slots in self.task_slots.items() for s in slots
            if s is not None and s in self.c_slots[task]
        )

    def _bound_allows(self, domains: dict[int, list[int]]) -> bool:
        if self.best_value is None:
            return True
        if self.objective is Objective.SLOT_CHANGES:
            return self._slot_change_bound() < self.best_value
        if self.objective is Objective.STABILITY:
            reachable = sum(1 for ui, vals in domains.items() if self.c_slots[self.units[ui].task] & set(vals))
            return self._matched() + reachable > self.best_value
        return True

    def _value_order(self, ui: int, values: list[int]) -> list[int]:
        unit = self.units[ui]
        if self.objective is Objective.SLOT_CHANGES:
            slots = self.task_slots[unit.task]
            period = self.period[unit.task]
            preferred = []
            if unit.window >= 2 and slots[unit.window - 2] is not None:
                preferred.append(slots[unit.window - 2] + period)
            if unit.window < len(slots) and slots[unit.window] is not None:
                preferred.append(slots[unit.window] - period)
            head = [s for s in dict.fromkeys(preferred) if s in values]
            return head + [s for s in values if s not in head]
        if self.objective is Objective.STABILITY:
            c_slots = self.c_slots[unit.task]
            if c_slots:
                return sorted(values, key=lambda s: (min(abs(s - c) for c in c_slots), s))
        return values

    def _complete(self) -> None:
        slots = {task: [s for s in ss if s is not None] for task, ss in self.task_slots.items()}
        schedule = Schedule.from_assignment(self.hyperperiod, self.channels, slots)
        if not validate(schedule, self.taskset).overall:
            return
        combined = self.instance.combined
        if combined is not None and not covers_combined(schedule, combined, self.taskset):
            return
        for source in self.instance.sources:
            if not validate_transition(source, schedule, self.taskset).overall:
                return

        if self.objective is Objective.NONE:
            self.best, self.best_value, self.done = schedule, 0, True
        elif self.objective is Objective.SLOT_CHANGES:
            value = slot_changes(schedule, self.taskset)
            if self.best_value is None or value < self.best_value:
                self.best, self.best_value = schedule, value
                self.done = value == 0
        else:
            value = self._matched()
            if self.best_value is None or value > self.best_value:
                self.best, self.best_value = schedule, value
                self.done = value == self.matchable

    def search(self) -> None:
        self._tick()
        if not self.open:
            self._complete()
            return

        domains: dict[int, list[int]] = {}
        for ui in self.open:
            values = [s for s in self.units[ui].domain if self._admissible(ui, s)]
            if not values:
                return
            domains[ui] = values
        if not self._bound_allows(domains):
            return

        ui = min(domains, key=lambda i: (len(domains[i]), self.rank[i]))
        for s in self._value_order(ui, domains[ui]):
            self._assign(ui, s)
            try:
                self.search()
            finally:
                self._unassign(ui, s)
            if self.done:
                return


def _run(instance: MilpInstance, time_budget: float, seed: int, engine: str) -> SolveOutcome:
    if time_budget <= 0:
        raise ValueError(f"time budget must be positive, got {time_budget}")
    started = time.monotonic()
    search = _BranchAndBound(instance, started + time_budget, seed)
    logger.debug(f"{engine}: {len(search.units)} units, {instance.variable_count} tensor variables")

    timed_out = False
    try:
        search.search()
    except _Deadline:
        timed_out = True
    elapsed = time.monotonic() - started

    objective_value: Optional[float] = None
    if search.best is not None:
        if instance.objective is Objective.SLOT_CHANGES:
            objective_value = slot_change_objective(search.best, instance.taskset)
        else:
            objective_value = float(search.best_value or 0)

    if timed_out:
        status = SolveStatus.TIMED_OUT
    elif search.best is not None:
        status = SolveStatus.FEASIBLE
    else:
        status = SolveStatus.INFEASIBLE

    logger.info(f"{engine}: {status.value} after {search.nodes} nodes in {elapsed:.3f}s")
    return SolveOutcome(
        status=status,
        engine=engine,
        schedule=search.best,
        objective_value=objective_value,
        nodes=search.nodes,
        elapsed=elapsed,
        message=f"time budget of {time_budget}s exhausted" if timed_out else "",
        proven=not timed_out,
    )


def solve(
    taskset: TaskSet,
    objective: Objective | str = Objective.NONE,
    time_budget: float = DEFAULT_TIMEOUT_SECONDS,
    seed: int = DEFAULT_BRANCHING_SEED,
) -> SolveOutcome:
    """Find a schedule, optionally minimizing slot changes between periods.

    Args:
        taskset: Problem instance
        objective: Objective.NONE or Objective.SLOT_CHANGES ('none' / 'jitter')
        time_budget: Wall-clock budget in seconds
        seed: Tie-break seed for the branching order

    Returns:
        SolveOutcome; FEASIBLE schedules always pass the validator
    """
    objective = Objective(objective)
    if objective is Objective.STABILITY:
        raise SchedulingError("the stability objective needs a combined schedule; use solve_adaptation")
    return _run(MilpInstance(taskset, objective), time_budget, seed, engine=f"exact-{objective.value}")


def solve_adaptation(
    taskset: TaskSet,
    combined: Schedule,
    time_budget: float = DEFAULT_TIMEOUT_SECONDS,
    sources: Sequence[Schedule] = (),
    seed: int = DEFAULT_BRANCHING_SEED,
) -> SolveOutcome:
    """Reschedule a merged taskset close to its combined schedule C.

    Every execution stays within +/- J of an allocation of C, every
    allocation of C keeps an execution within +/- J, and the switch-over
    from each source schedule keeps the jitter bound. The number of
    allocations left in place is maximized.
    """
    if combined.hyperperiod != taskset.hyperperiod or combined.channels != taskset.channels:
        raise DimensionMismatch(
            f"combined schedule is {combined.hyperperiod}x{combined.channels}, "
            f"merged taskset needs {taskset.hyperperiod}x{taskset.channels}"
        )
    instance = MilpInstance(taskset, Objective.STABILITY, combined=combined, sources=tuple(sources))
    return _run(instance, time_budget, seed, engine="exact-adapt")
