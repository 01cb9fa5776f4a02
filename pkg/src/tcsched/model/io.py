"""Reading and writing taskset and schedule files."""

from pathlib import Path

from ..types import TaskSetDict
from ..utils import read_json, write_json
from .schedule import Schedule
from .taskset import TaskSet, build_taskset


def taskset_to_dict(taskset: TaskSet) -> TaskSetDict:
    """Canonical file form: every list in ascending id order."""
    data: TaskSetDict = {
        'channels': taskset.channels,
        'nodes': list(taskset.nodes),
        'tasks': [{'id': t.id, 'node': t.node, 'maxJitter': t.max_jitter} for t in taskset.tasks],
        'edges': [{'from': e.parent, 'to': e.child, 'maxAge': e.max_age} for e in taskset.edges],
        'jobs': [
            {'id': j.id, 'period': j.period, 'leaf': j.leaf, 'members': list(j.members), 'entries': list(j.entries)}
            for j in taskset.jobs
        ],
    }
    if taskset.name:
        data['name'] = taskset.name
    return data


def load_taskset(path: str | Path) -> TaskSet:
    path = Path(path)
    return build_taskset(read_json(path), name=path.stem)


def save_taskset(path: str | Path, taskset: TaskSet) -> None:
    write_json(path, taskset_to_dict(taskset))


def load_schedule(path: str | Path) -> Schedule:
    return Schedule.from_dict(read_json(path))


def save_schedule(path: str | Path, schedule: Schedule) -> None:
    write_json(path, schedule.to_dict())
