"""Type definitions for tc-sched file formats.

TypedDict definitions documenting the JSON structures read and written
by the CLI, the HTTP routes and the benchmark harness.
"""

from typing import TypedDict
from typing_extensions import NotRequired


class TaskDict(TypedDict):
    """One task entry of a taskset file."""
    id: int
    node: str | int
    maxJitter: int


# One dependency edge; 'from' is the dependency, 'to' the dependent.
# 'from' is a keyword, so the functional form is needed.
EdgeDict = TypedDict('EdgeDict', {'from': int, 'to': int, 'maxAge': int})


class JobDict(TypedDict):
    """One job entry; members must include the leaf."""
    id: int
    period: int
    leaf: int
    members: list[int]
    entries: NotRequired[list[int]]


class TaskSetDict(TypedDict):
    """Top-level taskset file."""
    channels: int
    nodes: list[str | int]
    tasks: list[TaskDict]
    edges: list[EdgeDict]
    jobs: list[JobDict]
    hyperperiod: NotRequired[int]
    name: NotRequired[str]


class CellDict(TypedDict):
    """One occupied slot of a schedule file."""
    t: int
    c: int
    task: int


class ScheduleDict(TypedDict):
    """Top-level schedule file."""
    H: int
    M: int
    cells: list[CellDict]


class ViolationDict(TypedDict):
    """One entry of a validation report."""
    constraint: int
    tasks: list[int]
    slots: list[int]
    message: str


class ReportDict(TypedDict):
    """A serialized validation report."""
    overall: bool
    violations: list[ViolationDict]


class OutcomeDict(TypedDict):
    """A serialized solve outcome."""
    status: str
    engine: str
    schedule: ScheduleDict | None
    objective_value: float | None
    nodes: int
    elapsed: float
    message: NotRequired[str]
    proven: NotRequired[bool]


class MetricsDict(TypedDict):
    """A serialized metrics report."""
    mean_jitter: float
    min_task_jitter: float
    max_task_jitter: float
    distribution: float
    executions: int
    stability: NotRequired[int | None]


class ManifestDict(TypedDict):
    """Corpus manifest written by the generator."""
    params: dict
    seeds: list[int]
    files: list[str]
    pairs: NotRequired[list[list[str]]]
    created: str


class ExperimentRowDict(TypedDict):
    """One row of an experiment CSV."""
    id: str
    engine: str
    status: str
    feasible: bool
    solve_ms: float
    jitter: float | None
    distribution: float | None
    stability: NotRequired[int | None]
    hyperperiod: int
    tasks: int
    dependencies: int
    jobs: int
    nodes: int


class StudyRunDict(TypedDict):
    """How one study was run, as recorded in the run manifest."""
    corpus: str
    corpus_params: dict
    corpus_seeds: list[int]
    engines: list[str]
    timeout: float
    workers: int
    outputs: list[str]
    created: str


class RunManifestDict(TypedDict):
    """Reproducibility record written next to the study outputs."""
    version: str
    studies: dict[str, StudyRunDict]
