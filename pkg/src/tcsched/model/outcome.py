"""Result of one scheduling run, shared by both engines."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from ..types import OutcomeDict
from .schedule import Schedule


class SolveStatus(str, Enum):
    FEASIBLE = 'feasible'
    INFEASIBLE = 'infeasible'
    TIMED_OUT = 'timeout'
    UNSCHEDULABLE = 'unschedulable'


@dataclass
class SolveOutcome:
    """Status plus optional schedule and search statistics.

    A TIMED_OUT outcome may carry the best incumbent found so far with
    `proven` set to False.
    """
    status: SolveStatus
    engine: str
    schedule: Optional[Schedule] = None
    objective_value: Optional[float] = None
    nodes: int = 0
    elapsed: float = 0.0
    message: str = ""
    proven: bool = True

    @property
    def feasible(self) -> bool:
        return self.status is SolveStatus.FEASIBLE

    def to_dict(self) -> OutcomeDict:
        result: OutcomeDict = {
            'status': self.status.value,
            'engine': self.engine,
            'schedule': self.schedule.to_dict() if self.schedule is not None else None,
            'objective_value': self.objective_value,
            'nodes': self.nodes,
            'elapsed': round(self.elapsed, 6),
            'proven': self.proven,
        }
        if self.message:
            result['message'] = self.message
        return result
