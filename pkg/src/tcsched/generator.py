"""Seeded random taskset generator.

Tasksets are built so that they pass build_taskset by construction:
tasks are laid out in a random topological order, every non-sink task
gets at least one edge to a later task, and jobs are the ancestor sets
of chosen leaves. Job periods are divisors of the requested hyperperiod
with one job pinned to the hyperperiod itself.
"""

from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

import networkx as nx
import numpy as np

from .config import DEFAULT_CHANNELS, DEFAULT_JITTER_RANGE, GENERATOR_MAX_ATTEMPTS
from .errors import InfeasibleParams, MissingCorpus
from .logging_config import get_logger
from .model.io import load_taskset, save_taskset
from .model.taskset import TaskSet, build_taskset
from .types import ManifestDict
from .utils import read_json, write_json

logger = get_logger(__name__, namespace='gen')

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class GenParams:
    hyperperiod: int = 12
    tasks: int = 8
    dependencies: int = 9
    jobs: int = 1
    nodes: int = 8
    channels: int = DEFAULT_CHANNELS
    seed: int = 0
    jitter_range: tuple[int, int] = DEFAULT_JITTER_RANGE
    # None means [1, period of the dependent task]
    age_range: Optional[tuple[int, int]] = None

    def check(self) -> None:
        """Raise InfeasibleParams when no taskset can satisfy the counts."""
        n = self.tasks
        if min(self.hyperperiod, n, self.nodes, self.channels, self.jobs) < 1:
            raise InfeasibleParams(f"hyperperiod, tasks, nodes, channels and jobs must be positive: {self}")
        if self.dependencies < 0:
            raise InfeasibleParams(f"dependency count must not be negative, got {self.dependencies}")
        if self.dependencies > n * (n - 1) // 2:
            raise InfeasibleParams(
                f"{self.dependencies} dependencies exceed the acyclic maximum {n * (n - 1) // 2} for {n} tasks"
            )
        if self.jobs > n:
            raise InfeasibleParams(f"{self.jobs} jobs need at least as many tasks, got {n}")
        if n - self.dependencies > self.jobs:
            raise InfeasibleParams(
                f"{n} tasks with {self.dependencies} dependencies leave at least "
                f"{n - self.dependencies} sinks, more than {self.jobs} jobs can cover"
            )
        low, high = self.jitter_range
        if low < 0 or high < low:
            raise InfeasibleParams(f"bad jitter range {self.jitter_range}")
        if self.age_range is not None and (self.age_range[0] < 1 or self.age_range[1] < self.age_range[0]):
            raise InfeasibleParams(f"bad age range {self.age_range}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GenParams":
        data = dict(data)
        for key in ('jitter_range', 'age_range'):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        return cls(**data)


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _attempt(params: GenParams, rng: np.random.Generator) -> Optional[dict[str, Any]]:
    n = params.tasks
    order = [int(t) for t in rng.permutation(n)]

    # Sink positions: the last one always, plus a random few
    low_sinks = max(1, n - params.dependencies)
    high_sinks = min(params.jobs, n)
    sink_count = int(rng.integers(low_sinks, high_sinks + 1))
    sinks = {n - 1} | {int(p) for p in rng.choice(n - 1, size=sink_count - 1, replace=False)} if n > 1 else {0}

    edges: set[tuple[int, int]] = set()
    for i in range(n - 1):
        if i not in sinks:
            edges.add((i, int(rng.integers(i + 1, n))))
    spare = [(i, j) for i in range(n) if i not in sinks for j in range(i + 1, n) if (i, j) not in edges]
    missing = params.dependencies - len(edges)
    if missing < 0 or missing > len(spare):
        return None
    for k in rng.choice(len(spare), size=missing, replace=False):
        edges.add(spare[int(k)])

    graph = nx.DiGraph()
    graph.add_nodes_from(order)
    graph.add_edges_from((order[i], order[j]) for i, j in edges)

    sink_tasks = [order[p] for p in sorted(sinks)]
    others = [t for t in order if t not in sink_tasks]
    extra = [others[int(k)] for k in rng.choice(len(others), size=params.jobs - len(sink_tasks), replace=False)]
    leaves = sink_tasks + extra

    divisors = _divisors(params.hyperperiod)
    periods = [int(rng.choice(divisors)) for _ in leaves]
    periods[int(rng.integers(len(leaves)))] = params.hyperperiod

    jobs = []
    task_period: dict[int, int] = {}
    for job_id, (leaf, period) in enumerate(zip(leaves, periods)):
        members = sorted(nx.ancestors(graph, leaf) | {leaf})
        for m in members:
            task_period[m] = min(task_period.get(m, period), period)
        jobs.append({'id': job_id, 'period': period, 'leaf': leaf, 'members': members})

    jitter_low, jitter_high = params.jitter_range
    node_names = [f"n{k}" for k in range(params.nodes)]
    tasks = [
        {
            'id': t,
            'node': node_names[int(rng.integers(params.nodes))],
            'maxJitter': int(rng.integers(jitter_low, jitter_high + 1)),
        }
        for t in range(n)
    ]
    dependencies = []
    for parent, child in sorted(graph.edges):
        low, high = params.age_range or (1, task_period[child])
        dependencies.append({'from': parent, 'to': child, 'maxAge': int(rng.integers(low, high + 1))})

    return {
        'channels': params.channels,
        'nodes': node_names,
        'tasks': tasks,
        'edges': dependencies,
        'jobs': jobs,
        'hyperperiod': params.hyperperiod,
    }


def generate(params: GenParams) -> TaskSet:
    """Generate one taskset; the same params always give the same taskset.

    Raises:
        InfeasibleParams: the requested counts cannot be met
    """
    params.check()
    for attempt in range(GENERATOR_MAX_ATTEMPTS):
        rng = np.random.default_rng([params.seed, attempt])
        raw = _attempt(params, rng)
        if raw is None:
            logger.debug(f"seed {params.seed}: attempt {attempt} missed the dependency count, retrying")
            continue
        return build_taskset(raw, name=f"gen-{params.seed}")
    raise InfeasibleParams(f"no taskset after {GENERATOR_MAX_ATTEMPTS} attempts for {params}")


def derive_seeds(seed: int, count: int) -> list[int]:
    """Deterministic per-taskset seeds for a corpus."""
    return [int(s) for s in np.random.default_rng(seed).integers(0, 2**62, size=count)]


def generate_pairs(params: GenParams, count: int) -> list[tuple[TaskSet, TaskSet]]:
    """Pairs of tasksets sharing hyperperiod, job count and node count."""
    seeds = derive_seeds(params.seed, 2 * count)
    return [
        (generate(replace(params, seed=seeds[2 * i])), generate(replace(params, seed=seeds[2 * i + 1])))
        for i in range(count)
    ]


def manifest(
    params: GenParams,
    seeds: list[int],
    files: list[str],
    pairs: Optional[list[list[str]]] = None,
) -> ManifestDict:
    data: ManifestDict = {
        'params': params.to_dict(),
        'seeds': list(seeds),
        'files': list(files),
        'created': datetime.now(timezone.utc).isoformat(),
    }
    if pairs is not None:
        data['pairs'] = pairs
    return data


def write_corpus(params: GenParams, count: int, out_dir: str | Path, pairs: bool = False) -> ManifestDict:
    """Generate `count` tasksets (or pairs) into a directory with a manifest."""
    out = Path(out_dir)
    seeds = derive_seeds(params.seed, 2 * count if pairs else count)
    files: list[str] = []
    for i, seed in enumerate(seeds):
        name = f"pair-{i // 2:05d}-{'ab'[i % 2]}.json" if pairs else f"ts-{i:05d}.json"
        save_taskset(out / name, generate(replace(params, seed=seed)))
        files.append(name)
    pair_files = [files[i:i + 2] for i in range(0, len(files), 2)] if pairs else None
    data = manifest(params, seeds, files, pair_files)
    write_json(out / MANIFEST_NAME, data)
    logger.info(f"wrote {len(files)} tasksets to {out}")
    return data


def load_manifest(corpus_dir: str | Path) -> ManifestDict:
    path = Path(corpus_dir) / MANIFEST_NAME
    if not path.is_file():
        raise MissingCorpus(f"no {MANIFEST_NAME} in {corpus_dir}")
    return read_json(path)


def load_corpus(corpus_dir: str | Path) -> list[TaskSet]:
    """Tasksets listed in a corpus manifest, in manifest order."""
    data = load_manifest(corpus_dir)
    return [load_taskset(Path(corpus_dir) / name) for name in data['files']]


def load_pair_corpus(corpus_dir: str | Path) -> list[tuple[TaskSet, TaskSet]]:
    data = load_manifest(corpus_dir)
    if 'pairs' not in data:
        raise MissingCorpus(f"{corpus_dir} holds single tasksets, not pairs")
    root = Path(corpus_dir)
    return [(load_taskset(root / a), load_taskset(root / b)) for a, b in data['pairs']]
