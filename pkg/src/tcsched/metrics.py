"""Schedule quality measures.

This module provides:
- jitter: mean of the per-task mean offset from exact periodicity
- distribution: used-to-unused transitions per scheduled execution
- stability: unmoved allocations between two schedules
- slot_histogram: per-time-slot allocation probability over a corpus
- dense/sparse exemplar layouts and the shift they need when merged

All values are exact Fractions.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .errors import DimensionMismatch, EmptyCorpus
from .logging_config import get_logger
from .model.schedule import Placement, Schedule
from .model.taskset import TaskSet
from .types import MetricsDict

logger = get_logger(__name__, namespace='metrics')


def task_jitter(slots: list[int], period: int) -> Fraction:
    """Mean offset of a task's executions from its first one, modulo P."""
    if not slots:
        return Fraction(0)
    first = slots[0]
    return Fraction(sum((s - first) % period for s in slots), len(slots))


def jitter(schedule: Schedule, taskset: TaskSet) -> Fraction:
    """Mean of the per-task jitters; 0 for an empty taskset."""
    if len(taskset) == 0:
        return Fraction(0)
    total = sum(
        (task_jitter(schedule.slots(t), taskset.period(t)) for t in taskset.task_ids),
        Fraction(0),
    )
    return total / len(taskset)


def distribution(schedule: Schedule) -> Fraction:
    """Used-then-unused time-slot transitions per scheduled execution.

    Slot 0 counts as unused and the count does not wrap around H.
    Returns 0 for a schedule without executions.
    """
    executions = schedule.execution_count()
    if executions == 0:
        return Fraction(0)
    used = schedule.used_slots()
    transitions = sum(1 for t in range(2, schedule.hyperperiod + 1) if t - 1 in used and t not in used)
    return Fraction(transitions, executions)


def pair_distribution(first: Schedule, second: Schedule) -> Fraction:
    """Distribution of a schedule pair, in [0, 2]."""
    return distribution(first) + distribution(second)


def stability(before: Schedule, after: Schedule) -> int:
    """Number of (task, time-slot) allocations present in both schedules.

    Channels are ignored.

    Raises:
        DimensionMismatch: the hyperperiods differ (tile the shorter one first)
    """
    if before.hyperperiod != after.hyperperiod:
        raise DimensionMismatch(
            f"cannot compare H={before.hyperperiod} with H={after.hyperperiod}; tile to a common length first"
        )
    return len(before.collapsed() & after.collapsed())


def slot_histogram(corpus: Iterable[Schedule]) -> tuple[list[Fraction], Fraction]:
    """Per-time-slot probability of being used over a corpus.

    Returns:
        (probabilities for t = 1..H, uniform reference value). The
        reference is the mean used-slot fraction, i.e. what every slot
        would show if allocations were spread evenly.

    Raises:
        EmptyCorpus: no schedules given
        DimensionMismatch: schedules of different H
    """
    schedules = list(corpus)
    if not schedules:
        raise EmptyCorpus("slot histogram needs at least one schedule")
    horizon = schedules[0].hyperperiod
    if any(s.hyperperiod != horizon for s in schedules):
        raise DimensionMismatch("slot histogram needs schedules sharing one hyperperiod")
    counts = [0] * horizon
    for s in schedules:
        for t in s.used_slots():
            counts[t - 1] += 1
    probabilities = [Fraction(n, len(schedules)) for n in counts]
    reference = sum(probabilities, Fraction(0)) / horizon
    return probabilities, reference


def max_shift(before: Schedule, after: Schedule) -> int:
    """Largest time-slot displacement of any execution between two schedules.

    Executions of a task are paired in time order; tasks missing from
    `after` are ignored.
    """
    shift = 0
    for task in before.task_ids():
        for old, new in zip(before.slots(task), after.slots(task)):
            shift = max(shift, abs(new - old))
    return shift


def dense_sparse_examples() -> dict[str, tuple[Schedule, Schedule, Schedule]]:
    """Two pairs of three-task schedules (H=6, M=1) and their merges.

    Tasks 1-3 belong to the first schedule, 4-6 to the second. The dense
    pair packs both into slots 1-3 and the merge has to push the second
    schedule's last task three slots; the sparse pair uses every other
    slot and each task of the second schedule moves by one.
    """
    def build(slots: dict[int, int]) -> Schedule:
        return Schedule(6, 1, (Placement(t, 1, task) for task, t in slots.items()))

    return {
        'dense': (
            build({1: 1, 2: 2, 3: 3}),
            build({4: 1, 5: 2, 6: 3}),
            build({1: 1, 2: 2, 3: 3, 4: 4, 5: 5, 6: 6}),
        ),
        'sparse': (
            build({1: 1, 2: 3, 3: 5}),
            build({4: 1, 5: 3, 6: 5}),
            build({1: 1, 2: 3, 3: 5, 4: 2, 5: 4, 6: 6}),
        ),
    }


@dataclass
class MetricsReport:
    """Measures of one schedule, plus stability when a predecessor is known."""
    mean_jitter: Fraction
    distribution: Fraction
    min_task_jitter: Fraction = Fraction(0)
    max_task_jitter: Fraction = Fraction(0)
    executions: int = 0
    stability: Optional[int] = None
    per_task_jitter: dict[int, Fraction] = field(default_factory=dict)

    @classmethod
    def measure(cls, schedule: Schedule, taskset: TaskSet, before: Optional[Schedule] = None) -> "MetricsReport":
        per_task = {t: task_jitter(schedule.slots(t), taskset.period(t)) for t in taskset.task_ids}
        report = cls(
            mean_jitter=jitter(schedule, taskset),
            distribution=distribution(schedule),
            min_task_jitter=min(per_task.values(), default=Fraction(0)),
            max_task_jitter=max(per_task.values(), default=Fraction(0)),
            executions=schedule.execution_count(),
            stability=stability(before, schedule) if before is not None else None,
            per_task_jitter=per_task,
        )
        logger.debug(f"measured {len(per_task)} tasks: jitter={report.mean_jitter}, distribution={report.distribution}")
        return report

    def to_dict(self) -> MetricsDict:
        return {
            'mean_jitter': float(self.mean_jitter),
            'distribution': float(self.distribution),
            'min_task_jitter': float(self.min_task_jitter),
            'max_task_jitter': float(self.max_task_jitter),
            'executions': self.executions,
            'stability': self.stability,
        }
