"""CSV and SVG output for experiment results.

This module provides:
- empirical_cdf: step points of an empirical distribution
- emit_cdf: CDF CSV plus SVG, optionally one line per group and a zoomed copy
- emit_extrema: min / mean / max markers per engine
- emit_histogram: per-slot allocation probability with a uniform reference
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..errors import EmptyInput, IoFailure  # noqa: E402
from ..logging_config import get_logger  # noqa: E402

logger = get_logger(__name__, namespace='bench')


@dataclass
class CdfArtifacts:
    csv_path: Path
    svg_path: Path
    zoom_path: Optional[Path]
    points: dict[str, list[tuple[float, float]]]


def empirical_cdf(values: Iterable[float]) -> list[tuple[float, float]]:
    """(value, fraction of samples <= value) for every distinct value.

    Raises:
        EmptyInput: no values
    """
    data = np.sort(np.asarray(list(values), dtype=float))
    if data.size == 0:
        raise EmptyInput("a CDF needs at least one value")
    distinct, counts = np.unique(data, return_counts=True)
    fractions = np.cumsum(counts) / data.size
    return [(float(v), float(f)) for v, f in zip(distinct, fractions)]


def _field(row: Any, name: str) -> Any:
    if isinstance(row, Mapping):
        return row.get(name)
    return getattr(row, name, None)


def _grouped_values(rows: Iterable[Any], field: str, group_by: Optional[str]) -> dict[str, list[float]]:
    groups: dict[str, list[float]] = {}
    for row in rows:
        value = _field(row, field)
        if value in (None, ''):
            continue
        key = str(_field(row, group_by)) if group_by else field
        groups.setdefault(key, []).append(float(value))
    return groups


def _save(fig, path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format='svg')
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
    finally:
        plt.close(fig)


def _sort_key(label: str) -> tuple:
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


def emit_cdf(
    rows: Iterable[Any],
    field: str,
    out_dir: str | Path,
    group_by: Optional[str] = None,
    zoom: Optional[tuple[float, float]] = None,
    name: Optional[str] = None,
) -> CdfArtifacts:
    """Write the empirical CDF of one column as CSV and SVG.

    Rows may be mappings (CSV rows) or ExperimentRow objects. With
    `group_by` every distinct value of that column gets its own line.
    The maximum of each line is marked. `zoom` writes a second SVG
    limited to that x range.

    Raises:
        EmptyInput: no row carries a value for `field`
    """
    out = Path(out_dir)
    stem = name or (f"cdf_{field}_by_{group_by}" if group_by else f"cdf_{field}")
    groups = _grouped_values(rows, field, group_by)
    if not groups:
        raise EmptyInput(f"no values for {field!r}")
    points = {label: empirical_cdf(groups[label]) for label in sorted(groups, key=_sort_key)}

    csv_path = out / f"{stem}.csv"
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(csv_path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(['group', 'value', 'cumulative'])
            for label, series in points.items():
                for value, fraction in series:
                    writer.writerow([label, value, round(fraction, 6)])
    except OSError as e:
        raise IoFailure(f"cannot write {csv_path}: {e}") from e

    def render(path: Path, xlim: Optional[tuple[float, float]]) -> None:
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, series in points.items():
            xs = [v for v, _ in series]
            ys = [f for _, f in series]
            (line,) = ax.step(xs, ys, where='post', label=label if group_by else None)
            ax.plot([xs[-1]], [ys[-1]], marker='x', color=line.get_color())
        ax.set_xlabel(field)
        ax.set_ylabel('CDF')
        ax.set_ylim(0, 1.02)
        if xlim is not None:
            ax.set_xlim(*xlim)
        if group_by:
            ax.legend(title=group_by)
        _save(fig, path)

    svg_path = out / f"{stem}.svg"
    render(svg_path, None)
    zoom_path = None
    if zoom is not None:
        zoom_path = out / f"{stem}_zoom.svg"
        render(zoom_path, zoom)

    logger.info(f"wrote CDF of {field} ({len(points)} groups) to {svg_path}")
    return CdfArtifacts(csv_path=csv_path, svg_path=svg_path, zoom_path=zoom_path, points=points)


def emit_extrema(table: Mapping[str, Mapping[str, float]], path: str | Path, label: str = 'jitter') -> Path:
    """Plot min / mean / max per engine as a vertical range with a mean marker."""
    if not table:
        raise EmptyInput("no engines to plot")
    path = Path(path)
    engines = list(table)
    fig, ax = plt.subplots(figsize=(6, 4))
    for x, engine in enumerate(engines):
        stats = table[engine]
        ax.vlines(x, stats['min'], stats['max'], color='tab:gray')
        ax.plot([x, x], [stats['min'], stats['max']], linestyle='none', marker='_', markersize=12, color='tab:gray')
        ax.plot([x], [stats['mean']], marker='o', color='tab:blue')
    ax.set_xticks(range(len(engines)))
    ax.set_xticklabels(engines)
    ax.set_ylabel(label)
    _save(fig, path)
    return path


def emit_histogram(probabilities: list[float], reference: float, path: str | Path, title: str = '') -> Path:
    """Bar per time-slot plus a horizontal line at the uniform reference."""
    if not probabilities:
        raise EmptyInput("no time-slots to plot")
    path = Path(path)
    slots = np.arange(1, len(probabilities) + 1)
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.bar(slots, probabilities, color='tab:blue')
    ax.axhline(reference, color='tab:red', linestyle='--')
    ax.set_xlabel('time-slot')
    ax.set_ylabel('allocation probability')
    ax.set_ylim(0, 1)
    if title:
        ax.set_title(title)
    _save(fig, path)
    return path
