"""Experiment plans, result rows and engine dispatch."""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

from ..config import DEFAULT_OUT_DIR, DEFAULT_TIMEOUT_SECONDS, DEFAULT_WORKERS
from ..exact import MergedClusters, solve, solve_adaptation
from ..heuristic import SchedulerMode, reschedule
from ..heuristic import schedule as heuristic_schedule
from ..model.outcome import SolveOutcome, SolveStatus
from ..model.taskset import TaskSet
from ..types import ExperimentRowDict

ENGINES = ('exact-none', 'exact-jitter', 'heur-00', 'heur-01', 'heur-10', 'heur-11')
STUDIES = ('schedulability', 'hypothesis', 'merge', 'jitter', 'histogram', 'runtime')

# Columns a schedulability summary can be grouped by
SWEPT_PARAMETERS = ('nodes', 'dependencies', 'jobs', 'hyperperiod')


@dataclass(frozen=True)
class ExperimentPlan:
    corpus: Path
    engines: tuple[str, ...] = ENGINES
    timeout: float = DEFAULT_TIMEOUT_SECONDS
    out_dir: Path = DEFAULT_OUT_DIR
    workers: int = DEFAULT_WORKERS

    def __post_init__(self):
        if not self.engines:
            raise ValueError("an experiment needs at least one engine")
        unknown = [e for e in self.engines if e not in ENGINES]
        if unknown:
            raise ValueError(f"unknown engines {unknown}; choose from {', '.join(ENGINES)}")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")
        if self.workers < 1:
            raise ValueError(f"worker count must be positive, got {self.workers}")
        if self.out_dir.resolve() == self.corpus.resolve():
            raise ValueError("the output directory must not be the corpus directory")


@dataclass
class ExperimentRow:
    """One (taskset, engine) result; merge rows also carry stability."""
    taskset_id: str
    engine: str
    status: str
    solve_ms: float
    jitter: Optional[float] = None
    distribution: Optional[float] = None
    stability: Optional[int] = None
    hyperperiod: int = 0
    tasks: int = 0
    dependencies: int = 0
    jobs: int = 0
    nodes: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == SolveStatus.FEASIBLE.value

    @property
    def timed_out(self) -> bool:
        return self.status == SolveStatus.TIMED_OUT.value

    @classmethod
    def describe(cls, taskset_id: str, engine: str, taskset: TaskSet, outcome: SolveOutcome) -> "ExperimentRow":
        return cls(
            taskset_id=taskset_id,
            engine=engine,
            status=outcome.status.value,
            solve_ms=round(outcome.elapsed * 1000, 3),
            hyperperiod=taskset.hyperperiod,
            tasks=len(taskset),
            dependencies=len(taskset.edges),
            jobs=len(taskset.jobs),
            nodes=len(taskset.nodes),
        )

    def to_dict(self) -> ExperimentRowDict:
        return {
            'id': self.taskset_id,
            'engine': self.engine,
            'status': self.status,
            'feasible': self.feasible,
            'solve_ms': self.solve_ms,
            'jitter': self.jitter,
            'distribution': self.distribution,
            'stability': self.stability,
            'hyperperiod': self.hyperperiod,
            'tasks': self.tasks,
            'dependencies': self.dependencies,
            'jobs': self.jobs,
            'nodes': self.nodes,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentRow":
        def optional(key: str, kind: type) -> Any:
            value = data.get(key)
            return None if value in (None, '') else kind(value)

        return cls(
            taskset_id=str(data['id']),
            engine=str(data['engine']),
            status=str(data['status']),
            solve_ms=float(data.get('solve_ms') or 0),
            jitter=optional('jitter', float),
            distribution=optional('distribution', float),
            stability=optional('stability', int),
            hyperperiod=int(data.get('hyperperiod') or 0),
            tasks=int(data.get('tasks') or 0),
            dependencies=int(data.get('dependencies') or 0),
            jobs=int(data.get('jobs') or 0),
            nodes=int(data.get('nodes') or 0),
        )


CSV_FIELDS = list(ExperimentRowDict.__annotations__)


def run_engine(taskset: TaskSet, engine: str, timeout: float) -> SolveOutcome:
    """Schedule a taskset with one named engine."""
    if engine == 'exact-none':
        return solve(taskset, 'none', timeout)
    if engine == 'exact-jitter':
        return solve(taskset, 'jitter', timeout)
    if engine.startswith('heur-'):
        return heuristic_schedule(taskset, SchedulerMode.from_code(engine.removeprefix('heur-')))
    raise ValueError(f"unknown engine {engine!r}")


def run_adaptation(merged: MergedClusters, engine: str, timeout: float) -> SolveOutcome:
    """Reschedule merged clusters; every exact engine adapts with the stability objective."""
    if engine.startswith('exact'):
        return solve_adaptation(merged.taskset, merged.combined, timeout, sources=merged.sources)
    if engine.startswith('heur-'):
        return reschedule(merged, SchedulerMode.from_code(engine.removeprefix('heur-')))
    raise ValueError(f"unknown engine {engine!r}")
