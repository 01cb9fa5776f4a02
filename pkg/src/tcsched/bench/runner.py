"""Experiment runner.

Every (taskset, engine) or (pair, engine) combination is an independent
work item run on a bounded process pool. Feasible schedules are checked
again by the validator in the parent process before they are counted;
a rejected schedule aborts the experiment with UnsoundSchedule.
"""

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, TypeVar

import numpy as np
from scipy.stats import spearmanr

from .. import __version__
from ..config import HEURISTIC_FAST_SECONDS, HYPOTHESIS_BINS, RESULTS_DB_NAME, RUN_MANIFEST_NAME
from ..errors import IoFailure, UnsoundSchedule
from ..exact import merge_schedules, merge_tasksets
from ..generator import load_corpus, load_manifest, load_pair_corpus
from ..logging_config import get_logger
from ..metrics import MetricsReport, jitter, pair_distribution, slot_histogram, stability
from ..model.io import taskset_to_dict
from ..model.schedule import Schedule
from ..model.taskset import TaskSet, build_taskset
from ..types import RunManifestDict, ScheduleDict, TaskSetDict
from ..utils import read_json, write_json
from ..validator import validate, validate_transition
from .plan import CSV_FIELDS, SWEPT_PARAMETERS, ExperimentPlan, ExperimentRow, run_adaptation, run_engine
from .plots import emit_cdf, emit_extrema, emit_histogram
from .store import init_database, save_rows

logger = get_logger(__name__, namespace='bench')

T = TypeVar('T')
R = TypeVar('R')


@dataclass
class RunResult:
    """A row plus the schedule it describes, in file form."""
    row: ExperimentRow
    schedule: Optional[ScheduleDict] = None
    sources: tuple[ScheduleDict, ...] = ()


@dataclass
class StudyResult:
    rows: list[ExperimentRow]
    table: list[dict[str, Any]]
    statistics: dict[str, Any] = field(default_factory=dict)


# ============================================================================
# Work items (module level so worker processes can import them)
# ============================================================================

def _solve_item(item: tuple[str, TaskSetDict, str, float]) -> RunResult:
    taskset_id, raw, engine, timeout = item
    taskset = build_taskset(dict(raw), name=taskset_id)
    outcome = run_engine(taskset, engine, timeout)
    row = ExperimentRow.describe(taskset_id, engine, taskset, outcome)
    if outcome.feasible and outcome.schedule is not None:
        report = MetricsReport.measure(outcome.schedule, taskset)
        row.jitter = float(report.mean_jitter)
        row.distribution = float(report.distribution)
        return RunResult(row, outcome.schedule.to_dict())
    return RunResult(row)


def _source_engine(engine: str) -> str:
    return 'exact-none' if engine.startswith('exact') and engine != 'exact-jitter' else engine


def _merge_item(item: tuple[str, TaskSetDict, TaskSetDict, str, float]) -> Optional[RunResult]:
    """Schedule both members of a pair, then merge them with the same engine.

    Returns None when a member cannot be scheduled on its own.
    """
    pair_id, raw_a, raw_b, engine, timeout = item
    first_set = build_taskset(dict(raw_a), name=f"{pair_id}/a")
    second_set = build_taskset(dict(raw_b), name=f"{pair_id}/b")
    first = run_engine(first_set, _source_engine(engine), timeout)
    second = run_engine(second_set, _source_engine(engine), timeout)
    if first.schedule is None or second.schedule is None or not (first.feasible and second.feasible):
        return None

    merged = merge_schedules(first.schedule, second.schedule, first_set, second_set)
    outcome = run_adaptation(merged, engine, timeout)
    row = ExperimentRow.describe(pair_id, engine, merged.taskset, outcome)
    row.distribution = float(pair_distribution(first.schedule, second.schedule))
    sources = tuple(s.to_dict() for s in merged.sources)
    if outcome.feasible and outcome.schedule is not None:
        row.stability = stability(merged.combined, outcome.schedule)
        row.jitter = float(jitter(outcome.schedule, merged.taskset))
        return RunResult(row, outcome.schedule.to_dict(), sources)
    return RunResult(row, None, sources)


def _map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _audit(result: RunResult, taskset: TaskSet) -> None:
    """Re-validate a feasible result; raise UnsoundSchedule if it fails."""
    if not result.row.feasible:
        return
    if result.schedule is None:
        raise UnsoundSchedule(f"{result.row.engine} reported {result.row.taskset_id} feasible without a schedule")
    schedule = Schedule.from_dict(result.schedule)
    reports = [validate(schedule, taskset)]
    reports += [validate_transition(Schedule.from_dict(src), schedule, taskset) for src in result.sources]
    failed = [r for r in reports if not r.overall]
    if failed:
        summary = "; ".join(r.summary() for r in failed)
        logger.error(f"{result.row.engine} emitted an invalid schedule for {result.row.taskset_id}: {summary}")
        raise UnsoundSchedule(f"{result.row.engine} on {result.row.taskset_id}: {summary}")


# ============================================================================
# CSV output
# ============================================================================

def write_rows_csv(path: Path, rows: Sequence[ExperimentRow]) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=CSV_FIELDS)
            writer.writeheader()
            for row in rows:
                writer.writerow(row.to_dict())
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
    return path


def write_table_csv(path: Path, table: Sequence[dict[str, Any]]) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as f:
            if table:
                writer = csv.DictWriter(f, fieldnames=list(table[0]))
                writer.writeheader()
                writer.writerows(table)
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
    return path


def read_rows_csv(path: str | Path) -> list[dict[str, str]]:
    try:
        with open(path, newline='') as f:
            return list(csv.DictReader(f))
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e


def _record(plan: ExperimentPlan, study: str, rows: Sequence[ExperimentRow]) -> None:
    db_path = plan.out_dir / RESULTS_DB_NAME
    init_database(db_path)
    save_rows(db_path, study, rows)
    write_run_manifest(plan, study)


def write_run_manifest(plan: ExperimentPlan, study: str) -> Path:
    """Record how a study was run next to its outputs.

    Studies run into the same directory share one manifest; each run
    replaces only its own study entry.
    """
    path = plan.out_dir / RUN_MANIFEST_NAME
    manifest: RunManifestDict = {'version': __version__, 'studies': {}}
    if path.is_file():
        manifest['studies'] = dict(read_json(path).get('studies', {}))
    corpus = load_manifest(plan.corpus)
    outputs = sorted(p.name for p in plan.out_dir.iterdir() if p.is_file() and p.name != RUN_MANIFEST_NAME)
    manifest['studies'][study] = {
        'corpus': str(plan.corpus),
        'corpus_params': corpus['params'],
        'corpus_seeds': list(corpus['seeds']),
        'engines': list(plan.engines),
        'timeout': plan.timeout,
        'workers': plan.workers,
        'outputs': outputs,
        'created': datetime.now(timezone.utc).isoformat(timespec='seconds'),
    }
    write_json(path, manifest)
    logger.debug(f"run manifest updated for {study} at {path}")
    return path


# ============================================================================
# Aggregation
# ============================================================================

def summarize(rows: Sequence[ExperimentRow], parameter: str) -> list[dict[str, Any]]:
    """Schedulable fraction per (engine, parameter value).

    Timeouts are counted separately and left out of the fraction.
    """
    groups: dict[tuple[str, int], list[ExperimentRow]] = {}
    for row in rows:
        groups.setdefault((row.engine, getattr(row, parameter)), []).append(row)
    table = []
    for (engine, value), members in sorted(groups.items()):
        decided = [r for r in members if not r.timed_out]
        feasible = sum(r.feasible for r in decided)
        table.append({
            'parameter': parameter,
            'value': value,
            'engine': engine,
            'feasible': feasible,
            'decided': len(decided),
            'timeouts': len(members) - len(decided),
            'fraction': feasible / len(decided) if decided else None,
        })
    return table


def success_rates(rows: Sequence[ExperimentRow]) -> list[dict[str, Any]]:
    """Per-engine success rate; timeouts are left out of the rate."""
    engines = sorted({r.engine for r in rows})
    table = []
    for engine in engines:
        members = [r for r in rows if r.engine == engine]
        decided = [r for r in members if not r.timed_out]
        feasible = sum(r.feasible for r in decided)
        table.append({
            'engine': engine,
            'pairs': len(members),
            'feasible': feasible,
            'decided': len(decided),
            'timeouts': len(members) - len(decided),
            'rate': feasible / len(decided) if decided else None,
        })
    return table


def binned(rows: Sequence[ExperimentRow], bins: int = HYPOTHESIS_BINS) -> list[dict[str, Any]]:
    """Reschedulable fraction per engine and pair-distribution bin over [0, 2]."""
    width = 2 / bins
    groups: dict[tuple[str, int], list[ExperimentRow]] = {}
    for row in rows:
        if row.timed_out or row.distribution is None:
            continue
        index = min(int(row.distribution / width), bins - 1)
        groups.setdefault((row.engine, index), []).append(row)
    table = []
    for (engine, index), members in sorted(groups.items()):
        feasible = sum(r.feasible for r in members)
        table.append({
            'engine': engine,
            'bin_low': round(index * width, 6),
            'bin_high': round((index + 1) * width, 6),
            'pairs': len(members),
            'reschedulable': feasible,
            'fraction': feasible / len(members),
        })
    return table


def rank_correlation(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Spearman rank correlation; None when either side is constant."""
    if len(xs) < 2 or len(set(xs)) < 2 or len(set(ys)) < 2:
        return None
    rho, _ = spearmanr(xs, ys)
    return float(rho)


def bin_correlation(table: Sequence[dict[str, Any]], engine: str) -> Optional[float]:
    """Spearman correlation of bin midpoints against per-bin reschedulable fractions."""
    entries = [e for e in table if e['engine'] == engine]
    return rank_correlation(
        [(e['bin_low'] + e['bin_high']) / 2 for e in entries],
        [e['fraction'] for e in entries],
    )


def _quartiles(values: Sequence[float]) -> tuple[float, float, float]:
    q1, median, q3 = np.percentile(np.asarray(values, dtype=float), [25, 50, 75])
    return float(q1), float(median), float(q3)


def runtime_summary(
    rows: Sequence[ExperimentRow],
    fast_seconds: float = HEURISTIC_FAST_SECONDS,
) -> list[dict[str, Any]]:
    """Solve-time quartiles per engine and the share of runs under `fast_seconds`.

    Every run counts, timed-out ones included, since their solve time is
    the budget they exhausted.
    """
    threshold_ms = fast_seconds * 1000
    table = []
    for engine in sorted({r.engine for r in rows}):
        times = [r.solve_ms for r in rows if r.engine == engine]
        q1, median, q3 = _quartiles(times)
        fast = sum(t < threshold_ms for t in times)
        table.append({
            'engine': engine,
            'tasksets': len(times),
            'fast': fast,
            'fast_fraction': fast / len(times),
            'q1_ms': round(q1, 3),
            'median_ms': round(median, 3),
            'q3_ms': round(q3, 3),
            'iqr_ms': round(q3 - q1, 3),
        })
    return table


def _cross_check(rows: Sequence[ExperimentRow]) -> None:
    """No engine may schedule a taskset the exact engine proved infeasible."""
    infeasible = {r.taskset_id for r in rows if r.engine.startswith('exact') and r.status == 'infeasible'}
    for row in rows:
        if row.feasible and row.taskset_id in infeasible:
            logger.error(f"{row.engine} scheduled {row.taskset_id}, which the exact engine proved infeasible")
            raise UnsoundSchedule(f"{row.engine} contradicts the exact engine on {row.taskset_id}")


# ============================================================================
# Studies
# ============================================================================

def solve_corpus(plan: ExperimentPlan) -> list[RunResult]:
    """Run every engine of the plan on every taskset of the corpus."""
    tasksets = {ts.name: ts for ts in load_corpus(plan.corpus)}
    items = [
        (name, taskset_to_dict(ts), engine, plan.timeout)
        for name, ts in tasksets.items()
        for engine in plan.engines
    ]
    logger.info(f"solving {len(tasksets)} tasksets with {len(plan.engines)} engines on {plan.workers} workers")
    results = _map(_solve_item, items, plan.workers)
    for result in results:
        _audit(result, tasksets[result.row.taskset_id])
    results.sort(key=lambda r: (r.row.taskset_id, r.row.engine))
    _cross_check([r.row for r in results])
    return results


def merge_corpus(plan: ExperimentPlan) -> list[RunResult]:
    """Schedule and merge every pair of a pair corpus with every engine."""
    pairs = load_pair_corpus(plan.corpus)
    items = [
        (f"{a.name}+{b.name}", taskset_to_dict(a), taskset_to_dict(b), engine, plan.timeout)
        for a, b in pairs
        for engine in plan.engines
    ]
    merged_sets = {f"{a.name}+{b.name}": merge_tasksets(a, b)[0] for a, b in pairs}
    logger.info(f"merging {len(pairs)} pairs with {len(plan.engines)} engines on {plan.workers} workers")
    results = [r for r in _map(_merge_item, items, plan.workers) if r is not None]
    for result in results:
        _audit(result, merged_sets[result.row.taskset_id])
    results.sort(key=lambda r: (r.row.taskset_id, r.row.engine))
    return results


def run_schedulability(plan: ExperimentPlan) -> StudyResult:
    rows = [r.row for r in solve_corpus(plan)]
    table = [entry for parameter in SWEPT_PARAMETERS for entry in summarize(rows, parameter)]
    write_rows_csv(plan.out_dir / "schedulability_rows.csv", rows)
    write_table_csv(plan.out_dir / "schedulability_summary.csv", table)
    _record(plan, 'schedulability', rows)
    return StudyResult(rows, table)


def run_jitter_study(plan: ExperimentPlan) -> StudyResult:
    """Jitter extrema per engine over tasksets every engine schedules."""
    rows = [r.row for r in solve_corpus(plan)]
    by_id: dict[str, list[ExperimentRow]] = {}
    for row in rows:
        by_id.setdefault(row.taskset_id, []).append(row)
    common = {i for i, members in by_id.items() if all(r.feasible for r in members)}

    table = []
    for engine in plan.engines:
        values = [r.jitter for r in rows if r.engine == engine and r.taskset_id in common and r.jitter is not None]
        if values:
            table.append({
                'engine': engine,
                'tasksets': len(values),
                'min': min(values),
                'mean': sum(values) / len(values),
                'max': max(values),
            })
    write_table_csv(plan.out_dir / "jitter_comparison.csv", table)
    if table:
        emit_extrema({e['engine']: e for e in table}, plan.out_dir / "jitter_comparison.svg")
    _record(plan, 'jitter', rows)
    return StudyResult(rows, table, {'common_tasksets': len(common)})


def run_histogram_study(plan: ExperimentPlan) -> StudyResult:
    """Slot allocation probability per engine, for each hyperperiod in the corpus."""
    results = solve_corpus(plan)
    groups: dict[tuple[str, int], list[Schedule]] = {}
    for result in results:
        if result.row.feasible and result.schedule is not None:
            schedule = Schedule.from_dict(result.schedule)
            groups.setdefault((result.row.engine, schedule.hyperperiod), []).append(schedule)

    table = []
    for (engine, horizon), schedules in sorted(groups.items()):
        probabilities, reference = slot_histogram(schedules)
        for t, p in enumerate(probabilities, start=1):
            table.append({
                'engine': engine,
                'hyperperiod': horizon,
                't': t,
                'probability': float(p),
                'reference': float(reference),
            })
        emit_histogram(
            [float(p) for p in probabilities], float(reference),
            plan.out_dir / f"histogram_{engine}_H{horizon}.svg",
            title=f"{engine}, H={horizon}, {len(schedules)} schedules",
        )
    write_table_csv(plan.out_dir / "slot_histogram.csv", table)
    rows = [r.row for r in results]
    _record(plan, 'histogram', rows)
    return StudyResult(rows, table)


def run_merge_benchmark(plan: ExperimentPlan) -> StudyResult:
    rows = [r.row for r in merge_corpus(plan)]
    table = success_rates(rows)
    write_rows_csv(plan.out_dir / "merge_rows.csv", rows)
    write_table_csv(plan.out_dir / "merge_success.csv", table)
    _record(plan, 'merge', rows)
    return StudyResult(rows, table)


def run_hypothesis(plan: ExperimentPlan) -> StudyResult:
    """Reschedulability of pairs against their combined distribution.

    The reported correlation is taken over the bins, not over single
    pairs, so each engine yields one coefficient per corpus.
    """
    rows = [r.row for r in merge_corpus(plan)]
    table = binned(rows)
    statistics = {engine: bin_correlation(table, engine) for engine in plan.engines}
    write_rows_csv(plan.out_dir / "hypothesis_rows.csv", rows)
    write_table_csv(plan.out_dir / "hypothesis.csv", table)
    _record(plan, 'hypothesis', rows)
    logger.info(f"rank correlation of distribution and reschedulability: {statistics}")
    return StudyResult(rows, table, {'spearman': statistics})


def run_runtime_study(plan: ExperimentPlan) -> StudyResult:
    """Solve-time spread per engine, overall and per hyperperiod.

    The statistics carry each engine's fast fraction and IQR, plus the
    IQR of every heuristic engine relative to the reference exact engine.
    """
    rows = [r.row for r in solve_corpus(plan)]
    table = runtime_summary(rows)
    by_horizon = []
    for engine, horizon in sorted({(r.engine, r.hyperperiod) for r in rows}):
        q1, median, q3 = _quartiles([r.solve_ms for r in rows if r.engine == engine and r.hyperperiod == horizon])
        by_horizon.append({
            'engine': engine,
            'hyperperiod': horizon,
            'median_ms': round(median, 3),
            'iqr_ms': round(q3 - q1, 3),
        })
    write_rows_csv(plan.out_dir / "runtime_rows.csv", rows)
    write_table_csv(plan.out_dir / "runtime.csv", table)
    write_table_csv(plan.out_dir / "runtime_by_hyperperiod.csv", by_horizon)
    emit_cdf(rows, 'solve_ms', plan.out_dir, group_by='engine')

    by_engine = {e['engine']: e for e in table}
    statistics: dict[str, Any] = {
        'fast_fraction': {e: s['fast_fraction'] for e, s in by_engine.items()},
        'iqr_ms': {e: s['iqr_ms'] for e, s in by_engine.items()},
    }
    reference = 'exact-none' if 'exact-none' in by_engine else next(
        (e for e in plan.engines if e.startswith('exact')), None)
    if reference is not None and by_engine[reference]['iqr_ms'] > 0:
        statistics['iqr_ratio'] = {
            e: s['iqr_ms'] / by_engine[reference]['iqr_ms']
            for e, s in by_engine.items() if e.startswith('heur-')
        }
    _record(plan, 'runtime', rows)
    logger.info(f"fast fraction per engine: {statistics['fast_fraction']}")
    return StudyResult(rows, table, statistics)


STUDY_RUNNERS: dict[str, Callable[[ExperimentPlan], StudyResult]] = {
    'schedulability': run_schedulability,
    'hypothesis': run_hypothesis,
    'merge': run_merge_benchmark,
    'jitter': run_jitter_study,
    'histogram': run_histogram_study,
    'runtime': run_runtime_study,
}


def run_study(plan: ExperimentPlan, study: str) -> StudyResult:
    if study not in STUDY_RUNNERS:
        raise ValueError(f"unknown study {study!r}; choose from {', '.join(STUDY_RUNNERS)}")
    return STUDY_RUNNERS[study](plan)
