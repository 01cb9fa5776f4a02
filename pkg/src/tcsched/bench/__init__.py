"""Experiment harness: corpus runs, aggregation, CSV, SVG and the results store."""

from .plan import ENGINES, STUDIES, ExperimentPlan, ExperimentRow, run_adaptation, run_engine
from .plots import empirical_cdf, emit_cdf, emit_extrema, emit_histogram
from .runner import (
    StudyResult,
    bin_correlation,
    binned,
    rank_correlation,
    read_rows_csv,
    run_histogram_study,
    run_hypothesis,
    run_jitter_study,
    run_merge_benchmark,
    run_runtime_study,
    run_schedulability,
    run_study,
    runtime_summary,
    success_rates,
    summarize,
    write_run_manifest,
)
from .store import get_rows, get_success_rates, init_database, save_rows

__all__ = [
    # Plans
    'ENGINES',
    'STUDIES',
    'ExperimentPlan',
    'ExperimentRow',
    'run_adaptation',
    'run_engine',
    # Studies
    'StudyResult',
    'bin_correlation',
    'binned',
    'rank_correlation',
    'read_rows_csv',
    'run_histogram_study',
    'run_hypothesis',
    'run_jitter_study',
    'run_merge_benchmark',
    'run_runtime_study',
    'run_schedulability',
    'run_study',
    'runtime_summary',
    'success_rates',
    'summarize',
    'write_run_manifest',
    # Plots
    'empirical_cdf',
    'emit_cdf',
    'emit_extrema',
    'emit_histogram',
    # Store
    'get_rows',
    'get_success_rates',
    'init_database',
    'save_rows',
]
