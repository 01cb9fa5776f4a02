"""Shared utilities for tc-sched.

Slot/window arithmetic used by the validator and both engines, plus
small JSON helpers shared by the CLI and the benchmark harness.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any

from .errors import IoFailure

logger = logging.getLogger(__name__)


def lcm_all(values) -> int:
    """Least common multiple of an iterable; 1 for an empty one."""
    return math.lcm(*values) if values else 1


def window_index(t: int, period: int) -> int:
    """1-indexed own-period window containing time-slot t.

    Example:
        window_index(5, 5) -> 1
        window_index(6, 5) -> 2
    """
    return (t - 1) // period + 1


def window_bounds(p: int, period: int) -> tuple[int, int]:
    """Inclusive slot range of the p-th window of length `period`."""
    return (p - 1) * period + 1, p * period


def period_start(t: int, period: int) -> int:
    """First slot of the period containing t (1-indexed slots)."""
    return ((t - 1) // period) * period + 1


def cyclic_gaps(slots: list[int], hyperperiod: int) -> list[int]:
    """Gaps between consecutive executions, wrapping over the hyperperiod.

    A single execution has one gap of length H.
    """
    if not slots:
        return []
    ordered = sorted(slots)
    gaps = [b - a for a, b in zip(ordered, ordered[1:])]
    gaps.append(hyperperiod - ordered[-1] + ordered[0])
    return gaps


def jitter_violation(gaps: list[int], period: int, max_jitter: int) -> str | None:
    """Describe the first jitter-bound breach in a cyclic gap sequence.

    Each gap must stay within P +/- J and two consecutive gaps must not
    differ by more than J. Returns None when the sequence is fine.
    """
    for i, gap in enumerate(gaps):
        if abs(gap - period) > max_jitter:
            return f"period {gap} deviates from {period} by more than {max_jitter}"
        if len(gaps) > 1:
            nxt = gaps[(i + 1) % len(gaps)]
            if abs(nxt - gap) > max_jitter:
                return f"period change {gap} -> {nxt} exceeds jitter {max_jitter}"
    return None


def partial_jitter_ok(slots: list[int | None], period: int, max_jitter: int, hyperperiod: int) -> bool:
    """Jitter check over per-window slots where some windows are still open.

    Only gaps whose two ends are known, and gap pairs whose three ends
    are known, are checked.
    """
    n = len(slots)
    if n < 2:
        return True
    gaps: list[int | None] = []
    for i in range(n):
        a, b = slots[i], slots[(i + 1) % n]
        if a is None or b is None:
            gaps.append(None)
        else:
            gaps.append(b - a if i < n - 1 else hyperperiod - a + b)
    for i, gap in enumerate(gaps):
        if gap is None:
            continue
        if abs(gap - period) > max_jitter:
            return False
        nxt = gaps[(i + 1) % n]
        if nxt is not None and abs(nxt - gap) > max_jitter:
            return False
    return True


def parse_solution_line(line: str | bytes) -> tuple[str, float] | None:
    """Parse one `name value` line of an external solver solution.

    Returns:
        (name, value) or None for blank, comment or malformed lines
    """
    try:
        if isinstance(line, bytes):
            line = line.decode('utf-8')
        parts = line.split()
        if len(parts) < 2 or parts[0].startswith(('#', '*')):
            return None
        return parts[0], float(parts[1])
    except (ValueError, UnicodeDecodeError):
        return None


def read_json(path: str | Path) -> Any:
    """Load a JSON document, wrapping OS and decode errors."""
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise IoFailure(f"cannot read {path}: {e}") from e


def write_json(path: str | Path, data: Any) -> None:
    """Write JSON with a stable layout so equal data gives equal bytes."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
