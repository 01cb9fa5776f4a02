"""SQLite record of experiment rows.

Rows are keyed by (study, taskset id, engine); re-running an experiment
replaces its rows instead of adding duplicates.
"""

import sqlite3
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from ..logging_config import get_logger
from .plan import ExperimentRow

logger = get_logger(__name__, namespace='bench')


def init_database(db_path: Path) -> None:
    """Create the results schema if it does not exist yet."""
    db_path.parent.mkdir(parents=True, exist_ok=True)
    with sqlite3.connect(db_path) as conn:
        c = conn.cursor()

        c.execute('''
            CREATE TABLE IF NOT EXISTS experiment_rows (
                study TEXT NOT NULL,
                taskset_id TEXT NOT NULL,
                engine TEXT NOT NULL,
                status TEXT NOT NULL,
                solve_ms REAL,
                jitter REAL,
                distribution REAL,
                stability INTEGER,
                hyperperiod INTEGER,
                tasks INTEGER,
                dependencies INTEGER,
                jobs INTEGER,
                nodes INTEGER,
                recorded_at TEXT NOT NULL,
                PRIMARY KEY (study, taskset_id, engine)
            )
        ''')

        c.execute('''
            CREATE INDEX IF NOT EXISTS idx_rows_study_engine
            ON experiment_rows(study, engine)
        ''')

        conn.commit()


def save_rows(db_path: Path, study: str, rows: Iterable[ExperimentRow]) -> int:
    """Insert or replace rows of one study; returns the number written."""
    now = datetime.now(timezone.utc).isoformat()
    values = [
        (
            study, r.taskset_id, r.engine, r.status, r.solve_ms, r.jitter, r.distribution,
            r.stability, r.hyperperiod, r.tasks, r.dependencies, r.jobs, r.nodes, now,
        )
        for r in rows
    ]
    with sqlite3.connect(db_path) as conn:
        conn.executemany('''
            INSERT OR REPLACE INTO experiment_rows
            (study, taskset_id, engine, status, solve_ms, jitter, distribution,
             stability, hyperperiod, tasks, dependencies, jobs, nodes, recorded_at)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
        ''', values)
        conn.commit()
    logger.debug(f"recorded {len(values)} {study} rows in {db_path}")
    return len(values)


def get_rows(db_path: Path, study: str, engine: Optional[str] = None) -> list[ExperimentRow]:
    """Rows of a study ordered by taskset id and engine."""
    query = '''
        SELECT taskset_id, engine, status, solve_ms, jitter, distribution, stability,
               hyperperiod, tasks, dependencies, jobs, nodes
        FROM experiment_rows WHERE study = ?
    '''
    params: list = [study]
    if engine is not None:
        query += ' AND engine = ?'
        params.append(engine)
    query += ' ORDER BY taskset_id, engine'

    with sqlite3.connect(db_path) as conn:
        conn.row_factory = sqlite3.Row
        return [
            ExperimentRow(
                taskset_id=row['taskset_id'],
                engine=row['engine'],
                status=row['status'],
                solve_ms=row['solve_ms'] or 0.0,
                jitter=row['jitter'],
                distribution=row['distribution'],
                stability=row['stability'],
                hyperperiod=row['hyperperiod'] or 0,
                tasks=row['tasks'] or 0,
                dependencies=row['dependencies'] or 0,
                jobs=row['jobs'] or 0,
                nodes=row['nodes'] or 0,
            )
            for row in conn.execute(query, params)
        ]


def get_success_rates(db_path: Path, study: str) -> dict[str, dict]:
    """Per-engine feasible count, decided count and timeouts of a study.

    Timeouts are not decided and stay out of the rate.
    """
    with sqlite3.connect(db_path) as conn:
        c = conn.cursor()
        c.execute('''
            SELECT engine,
                   SUM(CASE WHEN status = 'feasible' THEN 1 ELSE 0 END),
                   SUM(CASE WHEN status != 'timeout' THEN 1 ELSE 0 END),
                   SUM(CASE WHEN status = 'timeout' THEN 1 ELSE 0 END)
            FROM experiment_rows
            WHERE study = ?
            GROUP BY engine
            ORDER BY engine
        ''', (study,))
        return {
            engine: {
                'feasible': feasible,
                'decided': decided,
                'timeouts': timeouts,
                'rate': feasible / decided if decided else None,
            }
            for engine, feasible, decided, timeouts in c.fetchall()
        }
