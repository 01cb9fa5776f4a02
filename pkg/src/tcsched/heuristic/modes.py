"""Scheduler modes: conflict shifting strategy and sibling ordering."""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from ..model.taskset import TaskSet


class Shifting(str, Enum):
    TIME_FIRST = 'time'
    CHANNEL_FIRST = 'channel'


class Ordering(str, Enum):
    AGE_FIRST = 'age'
    JITTER_FIRST = 'jitter'


@dataclass(frozen=True)
class SchedulerMode:
    """One of the four modes, written as a two-digit code.

    The first digit picks the shifting strategy (0 time first, 1 channel
    first), the second the sibling ordering (0 age first, 1 jitter first).
    """
    shifting: Shifting = Shifting.CHANNEL_FIRST
    ordering: Ordering = Ordering.AGE_FIRST

    @property
    def code(self) -> str:
        return f"{int(self.shifting is Shifting.CHANNEL_FIRST)}{int(self.ordering is Ordering.JITTER_FIRST)}"

    @classmethod
    def from_code(cls, code: str) -> "SchedulerMode":
        if len(code) != 2 or any(ch not in '01' for ch in code):
            raise ValueError(f"mode must be one of 00, 01, 10, 11, got {code!r}")
        return cls(
            shifting=Shifting.CHANNEL_FIRST if code[0] == '1' else Shifting.TIME_FIRST,
            ordering=Ordering.JITTER_FIRST if code[1] == '1' else Ordering.AGE_FIRST,
        )

    def __str__(self) -> str:
        return f"heur-{self.code}"


ALL_MODES = tuple(SchedulerMode.from_code(code) for code in ('00', '01', '10', '11'))

# Sort key for tasks without an edge to the anchor
_NO_EDGE = 1 << 30


def _age(taskset: TaskSet, task: int, anchor: int | None) -> int:
    if anchor is None:
        return _NO_EDGE
    if taskset.graph.has_edge(task, anchor):
        return taskset.max_age(task, anchor)
    if taskset.graph.has_edge(anchor, task):
        return taskset.max_age(anchor, task)
    return _NO_EDGE


def order_siblings(
    tasks: Iterable[int],
    mode: SchedulerMode,
    taskset: TaskSet,
    anchor: int | Mapping[int, int] | None = None,
) -> list[int]:
    """Order tasks that compete at the same point of the traversal.

    Age first sorts by the max age of the edge between each task and its
    anchor (the shared child or parent); jitter first by the task's
    jitter bound. Ties go to the lower task id.
    """
    def anchor_of(task: int) -> int | None:
        if isinstance(anchor, Mapping):
            return anchor.get(task)
        return anchor

    if mode.ordering is Ordering.AGE_FIRST:
        return sorted(tasks, key=lambda t: (_age(taskset, t, anchor_of(t)), t))
    return sorted(tasks, key=lambda t: (taskset.jitter(t), t))
