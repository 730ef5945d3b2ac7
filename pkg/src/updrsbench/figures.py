"""Chart rendering of a benchmark result to PNG files.

Two charts mirror the report: a per-classifier correlation bar chart and a
grouped bar chart of the two relative error percentages.  Uses matplotlib's
object API directly (no global pyplot state).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .bench import BenchmarkResult

CATEGORY_COLORS = {
    "Functions": "#4878a8",
    "Rules": "#d1605e",
    "Trees": "#6aa56a",
    "Lazy": "#b8860b",
    "Meta": "#8064a2",
}

CORRELATION_FILENAME = "correlation.png"
RELATIVE_ERROR_FILENAME = "relative_errors.png"


def _successful(result: BenchmarkResult):
    outcomes = [o for o in result.outcomes if o.succeeded]
    if not outcomes:
        raise ValueError("no successful learner rows to chart")
    return outcomes


def _category_axis(axes, outcomes):
    axes.set_xticks(range(len(outcomes)))
    axes.set_xticklabels([o.display_name for o in outcomes],
                         rotation=30, ha="right", fontsize=8)
    axes.grid(axis="y", linewidth=0.4, alpha=0.5)
    axes.set_axisbelow(True)


def correlation_figure(result: BenchmarkResult) -> Figure:
    outcomes = _successful(result)
    figure = Figure(figsize=(9.0, 4.5))
    FigureCanvasAgg(figure)
    axes = figure.add_subplot(111)
    positions = np.arange(len(outcomes))
    values = [o.report.correlation if o.report.correlation is not None else 0.0
              for o in outcomes]
    colors = [CATEGORY_COLORS.get(o.category, "#777777") for o in outcomes]
    axes.bar(positions, values, color=colors)
    for x, v in zip(positions, values):
        axes.annotate(f"{v:.4f}", (x, v), ha="center", va="bottom", fontsize=7)
    axes.set_ylabel("Correlation coefficient")
    axes.set_ylim(0.0, 1.05)
    axes.set_title(f"Test correlation by classifier "
                   f"(target {result.config.target}, seed {result.config.seed})")
    _category_axis(axes, outcomes)
    figure.tight_layout()
    return figure


def relative_error_figure(result: BenchmarkResult) -> Figure:
    outcomes = _successful(result)
    figure = Figure(figsize=(9.0, 4.5))
    FigureCanvasAgg(figure)
    axes = figure.add_subplot(111)
    positions = np.arange(len(outcomes))
    width = 0.38
    rae = [o.report.relative_absolute_error_pct for o in outcomes]
    rrse = [o.report.root_relative_squared_error_pct for o in outcomes]
    axes.bar(positions - width / 2, rae, width, label="Relative absolute error (%)",
             color="#4878a8")
    axes.bar(positions + width / 2, rrse, width,
             label="Root relative squared error (%)", color="#d1605e")
    axes.set_ylabel("Error relative to mean baseline (%)")
    axes.set_title(f"Test relative errors by classifier "
                   f"(target {result.config.target}, seed {result.config.seed})")
    axes.legend(fontsize=8)
    _category_axis(axes, outcomes)
    figure.tight_layout()
    return figure


def save_figures(result: BenchmarkResult, directory) -> list[Path]:
    """Write both charts into directory (created if missing); returns paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in ((CORRELATION_FILENAME, correlation_figure),
                        (RELATIVE_ERROR_FILENAME, relative_error_figure)):
        path = directory / name
        build(result).savefig(path, dpi=150)
        written.append(path)
    return written
