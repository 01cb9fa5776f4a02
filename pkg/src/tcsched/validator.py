"""Schedule validator.

Checks a schedule against the eight textual constraints and serves as
the ground-truth oracle for both scheduling engines:

  1  a slot (time-slot, channel) holds at most one task
  2  intersecting tasks never share a time-slot
  3  a dependency executes before its dependent, inside the dependent's period
  4  the dependency's data is at most max-age slots old
  5  all dependents of a task in one job instance use the same execution
  6  every task executes exactly once per own period
  7  execution gaps stay within the jitter bound
  8  the switch from an old to a new schedule respects the jitter bound
"""

from dataclasses import dataclass, field
from itertools import combinations

import networkx as nx

from .errors import DimensionMismatch, TaskMissing
from .logging_config import get_logger
from .model.schedule import Schedule
from .model.taskset import JobSpec, TaskSet
from .types import ReportDict, ViolationDict
from .utils import cyclic_gaps, jitter_violation, period_start, window_bounds

logger = get_logger(__name__, namespace='validate')


@dataclass
class Violation:
    """A broken constraint with the tasks and time-slots that witness it."""
    constraint: int
    tasks: list[int]
    slots: list[int]
    message: str

    def to_dict(self) -> ViolationDict:
        return {
            'constraint': self.constraint,
            'tasks': list(self.tasks),
            'slots': list(self.slots),
            'message': self.message,
        }


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return not self.violations

    def failed_constraints(self) -> set[int]:
        return {v.constraint for v in self.violations}

    def by_constraint(self, constraint: int) -> list[Violation]:
        return [v for v in self.violations if v.constraint == constraint]

    def to_dict(self) -> ReportDict:
        return {'overall': self.overall, 'violations': [v.to_dict() for v in self.violations]}

    def summary(self) -> str:
        if self.overall:
            return "valid"
        counts = {c: len(self.by_constraint(c)) for c in sorted(self.failed_constraints())}
        return "invalid: " + ", ".join(f"C{c}x{n}" for c, n in counts.items())


def _check_dimensions(schedule: Schedule, taskset: TaskSet) -> None:
    if schedule.hyperperiod != taskset.hyperperiod or schedule.channels != taskset.channels:
        raise DimensionMismatch(
            f"schedule is {schedule.hyperperiod}x{schedule.channels}, "
            f"taskset needs {taskset.hyperperiod}x{taskset.channels}"
        )
    unknown = [t for t in schedule.task_ids() if not taskset.has_task(t)]
    if unknown:
        raise TaskMissing(f"scheduled tasks {unknown} are not part of the taskset")


def dependency_window(taskset: TaskSet, parent: int, child: int, t: int) -> tuple[int, int]:
    """Slots where `parent` may run to feed `child` executing at t.

    The range may be empty (low > high).
    """
    low = max(1, t - taskset.max_age(parent, child), period_start(t, taskset.period(child)))
    return low, t - 1


def feeding_execution(schedule: Schedule, taskset: TaskSet, parent: int, child: int, t: int) -> int | None:
    """Nearest execution of `parent` inside the dependency window, if any."""
    low, high = dependency_window(taskset, parent, child, t)
    candidates = [s for s in schedule.slots(parent) if low <= s <= high]
    return max(candidates) if candidates else None


def _check_collisions(schedule: Schedule) -> list[Violation]:
    return [
        Violation(1, occupants, [t], f"{len(occupants)} tasks share slot (t={t}, c={c})")
        for t, c, occupants in schedule.collisions()
    ]


def _check_intersections(schedule: Schedule, taskset: TaskSet) -> list[Violation]:
    violations = []
    iota = taskset.intersections
    for t in sorted(schedule.used_slots()):
        present = sorted(schedule.tasks_at(t))
        for u, v in combinations(present, 2):
            if u == v:
                violations.append(Violation(2, [u], [t], f"task {u} executes twice in time-slot {t}"))
            elif iota(u, v):
                violations.append(Violation(2, [u, v], [t], f"intersecting tasks {u} and {v} share time-slot {t}"))
    return violations


def _check_dependencies(schedule: Schedule, taskset: TaskSet) -> list[Violation]:
    violations = []
    for child in taskset.task_ids:
        period = taskset.period(child)
        for t in schedule.slots(child):
            for parent in taskset.parents(child):
                if feeding_execution(schedule, taskset, parent, child, t) is not None:
                    continue
                start = period_start(t, period)
                if not any(start <= s < t for s in schedule.slots(parent)):
                    violations.append(Violation(
                        3, [parent, child], [t],
                        f"task {parent} does not run before task {child} at t={t} within its period",
                    ))
                else:
                    violations.append(Violation(
                        4, [parent, child], [t],
                        f"data of task {parent} is older than {taskset.max_age(parent, child)} slots at t={t}",
                    ))
    return violations


def _job_instance_violations(schedule: Schedule, taskset: TaskSet, job: JobSpec, leaf_slot: int) -> list[Violation]:
    jg = taskset.job_graph(job)
    chosen: dict[int, int] = {job.leaf: leaf_slot}
    picks: dict[int, dict[int, int]] = {}
    for task in reversed(list(nx.topological_sort(jg))):
        if task in picks:
            distinct = set(picks[task].values())
            if len(distinct) > 1:
                readers = sorted(picks[task])
                return [Violation(
                    5, [task] + readers, sorted(distinct),
                    f"job {job.id} instance at t={leaf_slot}: dependents {readers} "
                    f"read different executions of task {task}",
                )]
            chosen[task] = distinct.pop()
        if task not in chosen:
            continue
        for parent in jg.predecessors(task):
            slot = feeding_execution(schedule, taskset, parent, task, chosen[task])
            if slot is not None:
                picks.setdefault(parent, {})[task] = slot
    return []


def _check_job_consistency(schedule: Schedule, taskset: TaskSet) -> list[Violation]:
    violations = []
    for job in taskset.jobs:
        for leaf_slot in schedule.slots(job.leaf):
            violations.extend(_job_instance_violations(schedule, taskset, job, leaf_slot))
    return violations


def _check_periods(schedule: Schedule, taskset: TaskSet) -> list[Violation]:
    violations = []
    for task in taskset.task_ids:
        period = taskset.period(task)
        slots = schedule.slots(task)
        for p in range(1, taskset.hyperperiod // period + 1):
            low, high = window_bounds(p, period)
            inside = [s for s in slots if low <= s <= high]
            if len(inside) != 1:
                violations.append(Violation(
                    6, [task], inside or [low, high],
                    f"task {task} runs {len(inside)} times in window [{low}, {high}]",
                ))
    return violations


def _check_jitter(schedule: Schedule, taskset: TaskSet) -> list[Violation]:
    violations = []
    for task in taskset.task_ids:
        slots = schedule.slots(task)
        if len(slots) < 2:
            continue
        problem = jitter_violation(cyclic_gaps(slots, taskset.hyperperiod), taskset.period(task), taskset.jitter(task))
        if problem:
            violations.append(Violation(7, [task], slots, f"task {task}: {problem}"))
    return violations


def validate(schedule: Schedule, taskset: TaskSet) -> ValidationReport:
    """Check constraints 1-7.

    Raises:
        DimensionMismatch: schedule shape differs from (H, M)
        TaskMissing: the schedule names a task the taskset lacks
    """
    _check_dimensions(schedule, taskset)
    report = ValidationReport()
    report.violations.extend(_check_collisions(schedule))
    report.violations.extend(_check_intersections(schedule, taskset))
    report.violations.extend(_check_dependencies(schedule, taskset))
    report.violations.extend(_check_job_consistency(schedule, taskset))
    report.violations.extend(_check_periods(schedule, taskset))
    report.violations.extend(_check_jitter(schedule, taskset))
    if not report.overall:
        logger.debug(f"schedule rejected ({report.summary()})")
    return report


def transition_gap(old: Schedule, new: Schedule, task: int) -> int:
    """Distance between the last old and the first new execution of a task."""
    return old.hyperperiod - max(old.slots(task)) + min(new.slots(task))


def switch_over_bounds(old: Schedule, task: int, period: int, jitter: int) -> tuple[int, int]:
    """Range of first new time-slots that keep a task's switch-over gap legal."""
    tail = old.hyperperiod - max(old.slots(task))
    return period - jitter - tail, period + jitter - tail


def validate_transition(old: Schedule, new: Schedule, taskset: TaskSet) -> ValidationReport:
    """Check constraint 8 for a switch from `old` to `new`.

    `taskset` is the merged set the new schedule was built for. Tasks of
    the old schedule missing from it are skipped.

    Raises:
        TaskMissing: the new schedule names a task the taskset lacks
    """
    missing = [t for t in new.task_ids() if not taskset.has_task(t)]
    if missing:
        raise TaskMissing(f"new schedule tasks {missing} are not part of the merged taskset")

    report = ValidationReport()
    for task in old.task_ids():
        if not taskset.has_task(task) or not new.slots(task):
            continue
        gap = transition_gap(old, new, task)
        period = taskset.period(task)
        jitter = taskset.jitter(task)
        if abs(gap - period) > jitter:
            report.violations.append(Violation(
                8, [task], [max(old.slots(task)), min(new.slots(task))],
                f"task {task}: switch-over period {gap} deviates from {period} by more than {jitter}",
            ))
    return report
