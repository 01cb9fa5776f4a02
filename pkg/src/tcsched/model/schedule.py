"""Time-slot by channel schedule grid.

A Schedule is an H x M grid addressed by 1-indexed (time-slot, channel).
Cells normally hold at most one task; combined schedules built while
merging task clusters may hold several, so the grid stores a list of
occupants per cell and leaves collision checks to the validator.
"""

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..errors import DimensionMismatch
from ..types import ScheduleDict


@dataclass(frozen=True, order=True)
class Placement:
    """One execution: `task` runs in time-slot `t` on channel `c`."""
    t: int
    c: int
    task: int


class Schedule:
    """Mutable schedule grid with per-task execution lookup."""

    def __init__(self, hyperperiod: int, channels: int, placements: Iterable[Placement] = ()):
        if hyperperiod < 1 or channels < 1:
            raise DimensionMismatch(f"schedule needs H >= 1 and M >= 1, got H={hyperperiod}, M={channels}")
        self.hyperperiod = hyperperiod
        self.channels = channels
        self._cells: dict[tuple[int, int], list[int]] = defaultdict(list)
        self._by_task: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for p in placements:
            self.place(p.task, p.t, p.c)

    # ------------------------------------------------------------------
    # Mutation
    # ------------------------------------------------------------------

    def place(self, task: int, t: int, c: int) -> None:
        if not (1 <= t <= self.hyperperiod and 1 <= c <= self.channels):
            raise DimensionMismatch(
                f"cell (t={t}, c={c}) outside {self.hyperperiod}x{self.channels} grid"
            )
        self._cells[(t, c)].append(task)
        self._by_task[task].append((t, c))
        self._by_task[task].sort()

    def remove(self, task: int, t: int, c: int) -> None:
        self._cells[(t, c)].remove(task)
        if not self._cells[(t, c)]:
            del self._cells[(t, c)]
        self._by_task[task].remove((t, c))
        if not self._by_task[task]:
            del self._by_task[task]

    def copy(self) -> "Schedule":
        return Schedule(self.hyperperiod, self.channels, self.placements())

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def occupants(self, t: int, c: int) -> list[int]:
        return list(self._cells.get((t, c), ()))

    def is_free(self, t: int, c: int) -> bool:
        return not self._cells.get((t, c))

    def tasks_at(self, t: int) -> list[int]:
        """Every task executing in time-slot t, on any channel."""
        return [task for c in range(1, self.channels + 1) for task in self._cells.get((t, c), ())]

    def free_channels(self, t: int) -> list[int]:
        return [c for c in range(1, self.channels + 1) if self.is_free(t, c)]

    def executions(self, task: int) -> list[tuple[int, int]]:
        """(time-slot, channel) pairs of a task, ordered by time."""
        return list(self._by_task.get(task, ()))

    def slots(self, task: int) -> list[int]:
        """e_T: the ordered time-slots a task executes in."""
        return [t for t, _ in self._by_task.get(task, ())]

    def task_ids(self) -> list[int]:
        return sorted(self._by_task)

    def used_slots(self) -> set[int]:
        """Time-slots with a task on at least one channel."""
        return {t for (t, _), occ in self._cells.items() if occ}

    def execution_count(self) -> int:
        return sum(len(v) for v in self._by_task.values())

    def collisions(self) -> list[tuple[int, int, list[int]]]:
        return sorted((t, c, list(occ)) for (t, c), occ in self._cells.items() if len(occ) > 1)

    def placements(self) -> list[Placement]:
        return sorted(
            Placement(t, c, task) for (t, c), occ in self._cells.items() for task in occ
        )

    def collapsed(self) -> set[tuple[int, int]]:
        """Channel-collapsed occupancy as (task, time-slot) pairs."""
        return {(task, t) for task, execs in self._by_task.items() for t, _ in execs}

    def grid(self) -> list[list[int | None]]:
        """Row per time-slot, first occupant per channel."""
        return [
            [(self._cells.get((t, c)) or [None])[0] for c in range(1, self.channels + 1)]
            for t in range(1, self.hyperperiod + 1)
        ]

    # ------------------------------------------------------------------
    # Derived schedules
    # ------------------------------------------------------------------

    def tiled(self, hyperperiod: int) -> "Schedule":
        """Repeat the schedule until it spans `hyperperiod` time-slots."""
        if hyperperiod % self.hyperperiod:
            raise DimensionMismatch(f"cannot tile H={self.hyperperiod} to {hyperperiod}")
        reps = hyperperiod // self.hyperperiod
        return Schedule(hyperperiod, self.channels, (
            Placement(p.t + r * self.hyperperiod, p.c, p.task)
            for r in range(reps) for p in self.placements()
        ))

    def remapped(self, mapping: Mapping[int, int]) -> "Schedule":
        """Rename task ids; ids missing from the mapping keep their value."""
        return Schedule(self.hyperperiod, self.channels, (
            Placement(p.t, p.c, mapping.get(p.task, p.task)) for p in self.placements()
        ))

    def permuted_channels(self, order: Sequence[int]) -> "Schedule":
        """Move channel c to order[c - 1]; `order` is a permutation of 1..M."""
        if sorted(order) != list(range(1, self.channels + 1)):
            raise DimensionMismatch(f"{list(order)} is not a permutation of 1..{self.channels}")
        return Schedule(self.hyperperiod, self.channels, (
            Placement(p.t, order[p.c - 1], p.task) for p in self.placements()
        ))

    @classmethod
    def from_assignment(cls, hyperperiod: int, channels: int, slots: Mapping[int, Iterable[int]]) -> "Schedule":
        """Build a grid from per-task time-slots.

        Channels are handed out in ascending task order, lowest free
        channel first; a time-slot holding more than M tasks raises
        DimensionMismatch.
        """
        by_slot: dict[int, list[int]] = defaultdict(list)
        for task in sorted(slots):
            for t in slots[task]:
                by_slot[t].append(task)
        schedule = cls(hyperperiod, channels)
        for t in sorted(by_slot):
            if len(by_slot[t]) > channels:
                raise DimensionMismatch(f"{len(by_slot[t])} tasks in time-slot {t} with {channels} channels")
            for c, task in enumerate(by_slot[t], start=1):
                schedule.place(task, t, c)
        return schedule

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> ScheduleDict:
        return {
            'H': self.hyperperiod,
            'M': self.channels,
            'cells': [{'t': p.t, 'c': p.c, 'task': p.task} for p in self.placements()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Schedule":
        try:
            return cls(int(data['H']), int(data['M']), (
                Placement(int(cell['t']), int(cell['c']), int(cell['task'])) for cell in data.get('cells', [])
            ))
        except (KeyError, TypeError, ValueError) as e:
            raise DimensionMismatch(f"malformed schedule document: {e}") from e

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Schedule):
            return NotImplemented
        return (
            self.hyperperiod == other.hyperperiod
            and self.channels == other.channels
            and self.placements() == other.placements()
        )

    def __repr__(self) -> str:
        return f"Schedule(H={self.hyperperiod}, M={self.channels}, executions={self.execution_count()})"
