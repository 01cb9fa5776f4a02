"""Scheduling, validation and metric routes."""

import tempfile
from pathlib import Path
from typing import Optional

from fastapi import APIRouter, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from ..bench.plan import run_adaptation, run_engine
from ..config import DEFAULT_TIMEOUT_SECONDS
from ..errors import SchedulingError
from ..exact import MilpInstance, Objective, export_milp, merge_schedules, solve
from ..heuristic import SchedulerMode
from ..heuristic import schedule as heuristic_schedule
from ..logging_config import get_logger
from ..metrics import MetricsReport, stability
from ..model.io import taskset_to_dict
from ..model.schedule import Schedule
from ..validator import validate, validate_transition
from .tasksets import parse_taskset

router = APIRouter(prefix="/api", tags=["schedules"])
logger = get_logger(__name__, namespace='api')

MODE_PATTERN = r"^[01]{2}$"


class ValidateRequest(BaseModel):
    taskset: dict
    schedule: dict


class TransitionRequest(BaseModel):
    taskset: dict
    old: dict
    new: dict


class ExactRequest(BaseModel):
    taskset: dict
    objective: str = Field("none", pattern=r"^(none|jitter)$")
    timeout: float = Field(DEFAULT_TIMEOUT_SECONDS, gt=0)


class HeuristicRequest(BaseModel):
    taskset: dict
    mode: str = Field("10", pattern=MODE_PATTERN)


class MergeRequest(BaseModel):
    first: dict
    second: dict
    first_schedule: Optional[dict] = None
    second_schedule: Optional[dict] = None
    engine: str = Field("10", pattern=r"^(exact|[01]{2})$")
    timeout: float = Field(DEFAULT_TIMEOUT_SECONDS, gt=0)


class MetricsRequest(BaseModel):
    taskset: dict
    schedule: dict
    before: Optional[dict] = None


class ExportRequest(BaseModel):
    taskset: dict
    objective: str = Field("none", pattern=r"^(none|jitter)$")


def _schedule(raw: dict) -> Schedule:
    try:
        return Schedule.from_dict(raw)
    except SchedulingError as e:
        raise HTTPException(422, str(e))


@router.post("/schedules/validate")
def validate_schedule(request: ValidateRequest):
    """Check a schedule against constraints 1-7."""
    taskset = parse_taskset(request.taskset)
    try:
        return validate(_schedule(request.schedule), taskset).to_dict()
    except SchedulingError as e:
        raise HTTPException(422, str(e))


@router.post("/schedules/transition")
def validate_switch_over(request: TransitionRequest):
    """Check the switch from an old to a new schedule (constraint 8)."""
    taskset = parse_taskset(request.taskset)
    try:
        return validate_transition(_schedule(request.old), _schedule(request.new), taskset).to_dict()
    except SchedulingError as e:
        raise HTTPException(422, str(e))


@router.post("/schedules/exact")
def solve_exact(request: ExactRequest):
    """Run the exact engine."""
    taskset = parse_taskset(request.taskset)
    return solve(taskset, request.objective, request.timeout).to_dict()


@router.post("/schedules/heuristic")
def solve_heuristic(request: HeuristicRequest):
    """Run the constructive scheduler in one of its four modes."""
    taskset = parse_taskset(request.taskset)
    return heuristic_schedule(taskset, SchedulerMode.from_code(request.mode)).to_dict()


@router.post("/schedules/merge")
def merge_clusters(request: MergeRequest):
    """Merge two clusters and reschedule them.

    Clusters without a given schedule are scheduled first with the
    same engine.
    """
    first_set = parse_taskset(request.first, name="a")
    second_set = parse_taskset(request.second, name="b")
    engine = "exact" if request.engine == "exact" else f"heur-{request.engine}"
    source_engine = "exact-none" if engine == "exact" else engine

    sources = []
    for label, taskset, raw in (("first", first_set, request.first_schedule), ("second", second_set, request.second_schedule)):
        if raw is not None:
            sources.append(_schedule(raw))
            continue
        outcome = run_engine(taskset, source_engine, request.timeout)
        if not outcome.feasible or outcome.schedule is None:
            raise HTTPException(422, f"{label} cluster is not schedulable: {outcome.status.value} {outcome.message}".strip())
        sources.append(outcome.schedule)

    try:
        merged = merge_schedules(sources[0], sources[1], first_set, second_set)
    except SchedulingError as e:
        raise HTTPException(422, str(e))
    outcome = run_adaptation(merged, engine, request.timeout)
    logger.info(f"merge with {engine}: {outcome.status.value}")
    return {
        "taskset": taskset_to_dict(merged.taskset),
        "combined": merged.combined.to_dict(),
        "outcome": outcome.to_dict(),
        "stability": stability(merged.combined, outcome.schedule) if outcome.feasible and outcome.schedule else None,
    }


@router.post("/schedules/metrics")
def schedule_metrics(request: MetricsRequest):
    """Jitter, distribution and (with `before`) stability of a schedule."""
    taskset = parse_taskset(request.taskset)
    before = _schedule(request.before) if request.before is not None else None
    try:
        return MetricsReport.measure(_schedule(request.schedule), taskset, before).to_dict()
    except SchedulingError as e:
        raise HTTPException(422, str(e))


@router.post("/schedules/export", response_class=PlainTextResponse)
def export_model(request: ExportRequest):
    """The scheduling model as CPLEX-LP text."""
    taskset = parse_taskset(request.taskset)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.lp"
        export_milp(MilpInstance(taskset, Objective(request.objective)), path)
        return path.read_text()
