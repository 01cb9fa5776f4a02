#!/usr/bin/env python3
"""tc-sched command line.

Usage:
    # Generate a corpus of 20 tasksets
    tc-sched gen --count 20 --out corpus --hyperperiod 12 --tasks 8 --deps 9

    # Schedule one taskset exactly, minimizing slot changes
    tc-sched exact --taskset corpus/ts-00000.json --objective jitter --timeout 60 --out s.json

    # Schedule it with the constructive scheduler, channel first / age first
    tc-sched heur --taskset corpus/ts-00000.json --mode 10 --out s.json

    # Check a schedule (exit code 1 when it violates a constraint)
    tc-sched validate --taskset corpus/ts-00000.json --schedule s.json

    # Run a study over a corpus
    tc-sched bench --corpus corpus --study schedulability --engines exact-none heur-10 --out results

    # Success rates recorded by earlier runs
    tc-sched results --out results --study schedulability
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv

from .config import DEFAULT_CHANNELS, DEFAULT_HOST, DEFAULT_OUT_DIR, DEFAULT_PORT, DEFAULT_TIMEOUT_SECONDS, DEFAULT_WORKERS
from .errors import IoFailure, SchedulingError
from .logging_config import get_logger, setup_logging

logger = get_logger(__name__, namespace='bench')

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ERROR = 2


def _print_json(data: Any) -> None:
    print(json.dumps(data, indent=2))


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e


# ============================================================================
# Commands
# ============================================================================

def cmd_gen(args: argparse.Namespace) -> int:
    from .generator import GenParams, write_corpus

    params = GenParams(
        hyperperiod=args.hyperperiod,
        tasks=args.tasks,
        dependencies=args.deps,
        jobs=args.jobs,
        nodes=args.nodes,
        channels=args.channels,
        seed=args.seed,
    )
    data = write_corpus(params, args.count, args.out, pairs=args.pairs)
    print(f"wrote {len(data['files'])} tasksets to {args.out}")
    return EXIT_OK


def _report_outcome(outcome, out: Optional[str]) -> int:
    from .model.io import save_schedule

    _print_json({k: v for k, v in outcome.to_dict().items() if k != 'schedule'})
    if out and outcome.schedule is not None:
        save_schedule(out, outcome.schedule)
    return EXIT_OK if outcome.feasible else EXIT_INVALID


def cmd_exact(args: argparse.Namespace) -> int:
    from .exact import solve
    from .model.io import load_taskset

    return _report_outcome(solve(load_taskset(args.taskset), args.objective, args.timeout), args.out)


def cmd_heur(args: argparse.Namespace) -> int:
    from .heuristic import SchedulerMode, schedule
    from .model.io import load_taskset

    return _report_outcome(schedule(load_taskset(args.taskset), SchedulerMode.from_code(args.mode)), args.out)


def cmd_merge(args: argparse.Namespace) -> int:
    from .bench.plan import run_adaptation, run_engine
    from .exact import merge_schedules
    from .metrics import stability
    from .model.io import load_schedule, load_taskset, save_taskset

    engine = 'exact' if args.mode == 'exact' else f"heur-{args.mode}"
    first_set, second_set = load_taskset(args.a), load_taskset(args.b)
    sources = []
    for taskset, path in ((first_set, args.schedule_a), (second_set, args.schedule_b)):
        if path:
            sources.append(load_schedule(path))
            continue
        outcome = run_engine(taskset, 'exact-none' if engine == 'exact' else engine, args.timeout)
        if outcome.schedule is None or not outcome.feasible:
            print(f"{taskset.name} cannot be scheduled on its own: {outcome.status.value}", file=sys.stderr)
            return EXIT_INVALID
        sources.append(outcome.schedule)

    merged = merge_schedules(sources[0], sources[1], first_set, second_set)
    outcome = run_adaptation(merged, engine, args.timeout)
    if args.out:
        save_taskset(Path(args.out).with_suffix('.taskset.json'), merged.taskset)
    code = _report_outcome(outcome, args.out)
    if outcome.feasible and outcome.schedule is not None:
        print(f"unmoved allocations: {stability(merged.combined, outcome.schedule)}")
    return code


def cmd_validate(args: argparse.Namespace) -> int:
    from .model.io import load_schedule, load_taskset
    from .validator import validate, validate_transition

    taskset = load_taskset(args.taskset)
    schedule = load_schedule(args.schedule)
    report = validate(schedule, taskset)
    result = {'schedule': report.to_dict()}
    ok = report.overall
    if args.old:
        transition = validate_transition(load_schedule(args.old), schedule, taskset)
        result['transition'] = transition.to_dict()
        ok = ok and transition.overall
    _print_json(result)
    return EXIT_OK if ok else EXIT_INVALID


def cmd_bench(args: argparse.Namespace) -> int:
    from .bench.plan import ExperimentPlan
    from .bench.runner import run_study

    plan = ExperimentPlan(
        corpus=Path(args.corpus),
        engines=tuple(args.engines),
        timeout=args.timeout,
        out_dir=Path(args.out),
        workers=args.jobs,
    )
    result = run_study(plan, args.study)
    _print_json({'rows': len(result.rows), 'table': result.table, 'statistics': result.statistics})
    return EXIT_OK


def cmd_results(args: argparse.Namespace) -> int:
    from .bench.store import get_rows, get_success_rates
    from .config import RESULTS_DB_NAME

    db_path = Path(args.out) / RESULTS_DB_NAME
    if not db_path.is_file():
        raise IoFailure(f"no {RESULTS_DB_NAME} in {args.out}; run a study first")
    rates = get_success_rates(db_path, args.study)
    if args.engine:
        rates = {e: r for e, r in rates.items() if e == args.engine}
    result: dict[str, Any] = {'study': args.study, 'success': rates}
    if args.rows:
        result['rows'] = [row.to_dict() for row in get_rows(db_path, args.study, args.engine)]
    _print_json(result)
    return EXIT_OK


def cmd_cdf(args: argparse.Namespace) -> int:
    from .bench.plots import emit_cdf
    from .bench.runner import read_rows_csv

    artifacts = emit_cdf(
        read_rows_csv(args.rows), args.field, args.out,
        group_by=args.group_by, zoom=tuple(args.zoom) if args.zoom else None,
    )
    print(f"wrote {artifacts.csv_path} and {artifacts.svg_path}")
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    from .exact import MilpInstance, Objective, export_milp
    from .model.io import load_taskset

    problem = export_milp(MilpInstance(load_taskset(args.taskset), Objective(args.objective)), args.out)
    print(f"wrote {len(problem.variables())} variables and {len(problem.constraints)} rows to {args.out}")
    return EXIT_OK


def cmd_import_solution(args: argparse.Namespace) -> int:
    from .exact import import_solution
    from .model.io import load_taskset, save_schedule

    schedule = import_solution(load_taskset(args.taskset), _read_text(args.solution), args.channels)
    save_schedule(args.out, schedule)
    print(f"wrote {schedule.execution_count()} executions to {args.out}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import run

    run(args.host, args.port)
    return EXIT_OK


# ============================================================================
# Parser
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    from .bench.plan import ENGINES, STUDIES

    parser = argparse.ArgumentParser(
        prog='tc-sched',
        description="Collision-free multi-channel slot scheduling",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    parser.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR (default: TCS_LOG_LEVEL or INFO)')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('gen', help='Generate a taskset corpus')
    p.add_argument('--count', type=int, required=True, metavar='N')
    p.add_argument('--out', required=True, metavar='DIR')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--hyperperiod', type=int, default=12)
    p.add_argument('--tasks', type=int, default=8)
    p.add_argument('--deps', type=int, default=9)
    p.add_argument('--jobs', type=int, default=1)
    p.add_argument('--nodes', type=int, default=8)
    p.add_argument('--channels', type=int, default=DEFAULT_CHANNELS)
    p.add_argument('--pairs', action='store_true', help='Generate pairs for merge studies')
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser('exact', help='Schedule a taskset with the exact engine')
    p.add_argument('--taskset', required=True, metavar='FILE')
    p.add_argument('--objective', choices=['none', 'jitter'], default='none')
    p.add_argument('--timeout', type=float, default=DEFAULT_TIMEOUT_SECONDS, metavar='SECS')
    p.add_argument('--out', metavar='FILE')
    p.set_defaults(handler=cmd_exact)

    p = sub.add_parser('heur', help='Schedule a taskset with the constructive scheduler')
    p.add_argument('--taskset', required=True, metavar='FILE')
    p.add_argument('--mode', choices=['00', '01', '10', '11'], default='10')
    p.add_argument('--out', metavar='FILE')
    p.set_defaults(handler=cmd_heur)

    p = sub.add_parser('merge', help='Merge two clusters and reschedule them')
    p.add_argument('--a', required=True, metavar='FILE')
    p.add_argument('--b', required=True, metavar='FILE')
    p.add_argument('--schedule-a', metavar='FILE')
    p.add_argument('--schedule-b', metavar='FILE')
    p.add_argument('--mode', choices=['exact', '00', '01', '10', '11'], default='10')
    p.add_argument('--timeout', type=float, default=DEFAULT_TIMEOUT_SECONDS, metavar='SECS')
    p.add_argument('--out', metavar='FILE')
    p.set_defaults(handler=cmd_merge)

    p = sub.add_parser('validate', help='Check a schedule against a taskset')
    p.add_argument('--taskset', required=True, metavar='FILE')
    p.add_argument('--schedule', required=True, metavar='FILE')
    p.add_argument('--old', metavar='FILE', help='Previous schedule; also checks the switch-over')
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser('bench', help='Run a study over a corpus')
    p.add_argument('--corpus', required=True, metavar='DIR')
    p.add_argument('--engines', nargs='+', choices=ENGINES, default=list(ENGINES))
    p.add_argument('--timeout', type=float, default=DEFAULT_TIMEOUT_SECONDS, metavar='SECS')
    p.add_argument('--jobs', type=int, default=DEFAULT_WORKERS, metavar='N', help='Worker processes')
    p.add_argument('--out', default=str(DEFAULT_OUT_DIR), metavar='DIR')
    p.add_argument('--study', choices=STUDIES, default='schedulability')
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser('results', help='Show recorded results of a study')
    p.add_argument('--out', default=str(DEFAULT_OUT_DIR), metavar='DIR')
    p.add_argument('--study', choices=STUDIES, default='schedulability')
    p.add_argument('--engine', choices=ENGINES)
    p.add_argument('--rows', action='store_true', help='Also list every recorded row')
    p.set_defaults(handler=cmd_results)

    p = sub.add_parser('cdf', help='Plot the CDF of a CSV column')
    p.add_argument('--rows', required=True, metavar='CSV')
    p.add_argument('--field', required=True)
    p.add_argument('--out', required=True, metavar='DIR')
    p.add_argument('--group-by', metavar='COLUMN')
    p.add_argument('--zoom', type=float, nargs=2, metavar=('LOW', 'HIGH'))
    p.set_defaults(handler=cmd_cdf)

    p = sub.add_parser('export', help='Write the scheduling model in CPLEX-LP format')
    p.add_argument('--taskset', required=True, metavar='FILE')
    p.add_argument('--objective', choices=['none', 'jitter'], default='none')
    p.add_argument('--out', required=True, metavar='FILE')
    p.set_defaults(handler=cmd_export)

    p = sub.add_parser('import-solution', help='Turn an external solver solution into a schedule')
    p.add_argument('--taskset', required=True, metavar='FILE')
    p.add_argument('--solution', required=True, metavar='FILE')
    p.add_argument('--channels', type=int, metavar='M')
    p.add_argument('--out', required=True, metavar='FILE')
    p.set_defaults(handler=cmd_import_solution)

    p = sub.add_parser('serve', help='Run the HTTP API')
    p.add_argument('--host', default=DEFAULT_HOST)
    p.add_argument('--port', type=int, default=DEFAULT_PORT)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """CLI entry point."""
    load_dotenv()
    args = build_parser().parse_args(argv)
    setup_logging()
    if args.log_level:
        from .logging_config import set_log_level
        set_log_level(args.log_level)

    try:
        return args.handler(args)
    except (SchedulingError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        logger.debug(f"{args.command} failed", exc_info=True)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
