"""Regression learners and a benchmark harness for voice-based UPDRS telemonitoring."""

from .bench import (
    LEARNER_KEYS,
    LEARNERS,
    BenchmarkResult,
    ExperimentConfig,
    LearnerOutcome,
    config_text,
    parse_config,
    render_chart_data,
    render_report,
    run_benchmark,
)
from .dataset import (
    TELEMONITORING_SCHEMA,
    DataTable,
    SplitSpec,
    TaskView,
    load_table,
    make_task,
    split,
    validate_ranges,
)
from .metrics import BaselinePredictor, EvaluationReport, correlation_coefficient, evaluate
from .synthetic import synthetic_table

__version__ = "0.1.0"

__all__ = [
    "BaselinePredictor",
    "BenchmarkResult",
    "DataTable",
    "EvaluationReport",
    "ExperimentConfig",
    "LEARNERS",
    "LEARNER_KEYS",
    "LearnerOutcome",
    "SplitSpec",
    "TELEMONITORING_SCHEMA",
    "TaskView",
    "config_text",
    "correlation_coefficient",
    "evaluate",
    "load_table",
    "make_task",
    "parse_config",
    "render_chart_data",
    "render_report",
    "run_benchmark",
    "split",
    "synthetic_table",
    "validate_ranges",
]
