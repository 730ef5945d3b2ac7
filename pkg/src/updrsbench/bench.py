"""Benchmark harness: one shared train/test split, a registry of eleven
learners in fixed category order, and a comparative report renderer.

Per-learner randomness is seeded from the master seed and the learner key, so
adding or removing a learner never perturbs the others.  Timings are kept on
the result object but never rendered into a report: two runs with the same
configuration must produce byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from typing import Callable

from .dataset import DataTable, SplitSpec, TaskView, load_table, make_task, split, validate_ranges
from .learners.common import Regressor
from .learners.functions import train_mlp, train_slr, train_smoreg
from .learners.lazy import train_ibk, train_lwl
from .learners.meta import ClassTreeParams, train_reg_by_disc
from .learners.rules import train_decision_table, train_m5rules
from .learners.trees import M5Params, RepTreeParams, train_decision_stump, train_m5p, train_reptree
from .metrics import BaselinePredictor, EvaluationReport, evaluate
from .numeric import KernelSpec, RngStream, derive_seed

REPORT_FORMATS = ("text", "markdown", "csv", "json")
FAILURE_MARKER = "failed"

REPORT_COLUMNS = (
    "Category",
    "Classifier",
    "Correlation coefficient",
    "Mean absolute error",
    "Root mean squared error",
    "Relative absolute error (%)",
    "Root relative squared error (%)",
)

CSV_COLUMNS = (
    "category",
    "classifier",
    "correlation_coefficient",
    "mean_absolute_error",
    "root_mean_squared_error",
    "relative_absolute_error_pct",
    "root_relative_squared_error_pct",
    "n_test",
    "error",
)


# ---------------------------------------------------------------------------
# Learner registry


def _reject_unknown(key: str, overrides: dict, allowed: tuple[str, ...]):
    unknown = sorted(set(overrides) - set(allowed))
    if unknown:
        raise ValueError(f"unknown parameter(s) {unknown} for learner {key!r}; "
                         f"allowed: {sorted(allowed) or 'none'}")


def _build_slr(task, seed, overrides):
    _reject_unknown("slr", overrides, ())
    return train_slr(task)


def _build_mlp(task, seed, overrides):
    _reject_unknown("mlp", overrides,
                    ("epochs", "learning_rate", "momentum", "hidden_units"))
    return train_mlp(task,
                     epochs=int(overrides.get("epochs", 500)),
                     learning_rate=float(overrides.get("learning_rate", 0.3)),
                     momentum=float(overrides.get("momentum", 0.2)),
                     hidden_units=int(overrides.get("hidden_units", 13)),
                     rng=RngStream(seed))


def _build_smoreg(task, seed, overrides):
    _reject_unknown("smoreg", overrides,
                    ("C", "epsilon", "tolerance", "exponent", "inhomogeneous",
                     "max_updates"))
    kernel = KernelSpec(exponent=int(overrides.get("exponent", 1)),
                        inhomogeneous=bool(overrides.get("inhomogeneous", False)))
    return train_smoreg(task, kernel=kernel,
                        C=float(overrides.get("C", 1.0)),
                        epsilon=float(overrides.get("epsilon", 1e-3)),
                        tolerance=float(overrides.get("tolerance", 1e-3)),
                        max_updates=int(overrides.get("max_updates", 10 ** 6)))


def _m5_params(overrides, default_min_instances):
    return M5Params(min_instances=int(overrides.get("min_instances",
                                                    default_min_instances)),
                    smoothing=bool(overrides.get("smoothing", True)),
                    pruning=bool(overrides.get("pruning", True)))


def _build_m5rules(task, seed, overrides):
    _reject_unknown("m5rules", overrides, ("min_instances", "smoothing", "pruning"))
    return train_m5rules(task, _m5_params(overrides, 4))


def _build_decision_table(task, seed, overrides):
    _reject_unknown("decision_table", overrides, ("search_width", "n_bins"))
    return train_decision_table(task,
                                search_width=int(overrides.get("search_width", 5)),
                                n_bins=int(overrides.get("n_bins", 10)))


def _build_m5p(task, seed, overrides):
    _reject_unknown("m5p", overrides, ("min_instances", "smoothing", "pruning"))
    return train_m5p(task, _m5_params(overrides, 2))


def _build_reptree(task, seed, overrides):
    _reject_unknown("reptree", overrides,
                    ("max_depth", "min_instances", "min_variance_proportion",
                     "pruning_folds"))
    params = RepTreeParams(
        max_depth=int(overrides.get("max_depth", -1)),
        min_instances=int(overrides.get("min_instances", 2)),
        min_variance_proportion=float(overrides.get("min_variance_proportion", 1e-3)),
        pruning_folds=int(overrides.get("pruning_folds", 3)))
    return train_reptree(task, params, rng=RngStream(seed))


def _build_decision_stump(task, seed, overrides):
    _reject_unknown("decision_stump", overrides, ())
    return train_decision_stump(task)


def _build_ibk(task, seed, overrides):
    _reject_unknown("ibk", overrides, ())
    return train_ibk(task)


def _build_lwl(task, seed, overrides):
    _reject_unknown("lwl", overrides, ())
    return train_lwl(task)


def _build_reg_by_disc(task, seed, overrides):
    _reject_unknown("reg_by_disc", overrides,
                    ("n_bins", "mode", "confidence", "min_instances"))
    tree_params = ClassTreeParams(
        confidence=float(overrides.get("confidence", 0.25)),
        min_instances=int(overrides.get("min_instances", 2)))
    return train_reg_by_disc(task,
                             n_bins=int(overrides.get("n_bins", 10)),
                             mode=str(overrides.get("mode", "expected")),
                             tree_params=tree_params)


@dataclass(frozen=True)
class LearnerSpec:
    """Registry entry: stable key, report labels, tunable parameter names and
    the builder mapping (train view, derived seed, overrides) to a model.
    """

    key: str
    display_name: str
    category: str
    parameters: tuple[str, ...]
    build: Callable[[TaskView, int, dict], Regressor]


LEARNERS: tuple[LearnerSpec, ...] = (
    LearnerSpec("slr", "Simple Linear Regression (SLR)", "Functions",
                (), _build_slr),
    LearnerSpec("mlp", "Multi-Layer Perceptron (MLP)", "Functions",
                ("epochs", "learning_rate", "momentum", "hidden_units"),
                _build_mlp),
    LearnerSpec("smoreg", "SMOreg", "Functions",
                ("C", "epsilon", "tolerance", "exponent", "inhomogeneous",
                 "max_updates"),
                _build_smoreg),
    LearnerSpec("m5rules", "M5Rules", "Rules",
                ("min_instances", "smoothing", "pruning"), _build_m5rules),
    LearnerSpec("decision_table", "Decision Table", "Rules",
                ("search_width", "n_bins"), _build_decision_table),
    LearnerSpec("m5p", "M5P", "Trees",
                ("min_instances", "smoothing", "pruning"), _build_m5p),
    LearnerSpec("reptree", "REPTree", "Trees",
                ("max_depth", "min_instances", "min_variance_proportion",
                 "pruning_folds"),
                _build_reptree),
    LearnerSpec("decision_stump", "Decision Stump", "Trees",
                (), _build_decision_stump),
    LearnerSpec("ibk", "IBk", "Lazy", (), _build_ibk),
    LearnerSpec("lwl", "LWL", "Lazy", (), _build_lwl),
    LearnerSpec("reg_by_disc", "Regression By Discretization", "Meta",
                ("n_bins", "mode", "confidence", "min_instances"),
                _build_reg_by_disc),
)

LEARNER_KEYS = tuple(spec.key for spec in LEARNERS)
_LEARNERS_BY_KEY = {spec.key: spec for spec in LEARNERS}


def learner_spec(key: str) -> LearnerSpec:
    canonical = key.strip().lower().replace("-", "_")
    spec = _LEARNERS_BY_KEY.get(canonical)
    if spec is None:
        raise ValueError(f"unknown learner {key!r}; choose from {LEARNER_KEYS}")
    return spec


# ---------------------------------------------------------------------------
# Configuration


def parse_scalar(text: str):
    """Config values: int, then float, then boolean words, else plain text."""
    word = text.strip()
    try:
        return int(word)
    except ValueError:
        pass
    try:
        return float(word)
    except ValueError:
        pass
    if word.lower() in ("true", "false"):
        return word.lower() == "true"
    return word


def format_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one benchmark run.

    learners are stored in registry order regardless of how they were given;
    overrides are (learner key, parameter, value) triples.
    """

    data_path: str
    target: str = "total_UPDRS"
    excluded: tuple[str, ...] = ()
    seed: int = 1
    train_fraction: float = 0.75
    learners: tuple[str, ...] = LEARNER_KEYS
    overrides: tuple[tuple[str, str, object], ...] = ()
    report_format: str = "text"
    output_path: str | None = None

    def __post_init__(self):
        if self.report_format not in REPORT_FORMATS:
            raise ValueError(f"unknown report format {self.report_format!r}; "
                             f"choose from {REPORT_FORMATS}")
        if not self.learners:
            raise ValueError("at least one learner must be selected")
        selected = []
        for key in self.learners:
            canonical = learner_spec(key).key
            if canonical not in selected:
                selected.append(canonical)
        ordered = tuple(k for k in LEARNER_KEYS if k in selected)
        object.__setattr__(self, "learners", ordered)
        object.__setattr__(self, "excluded", tuple(self.excluded))
        checked = []
        for learner, parameter, value in self.overrides:
            spec = learner_spec(learner)
            if parameter not in spec.parameters:
                raise ValueError(f"learner {spec.key!r} has no parameter "
                                 f"{parameter!r}; allowed: {spec.parameters or 'none'}")
            checked.append((spec.key, parameter, value))
        object.__setattr__(self, "overrides", tuple(checked))

    def overrides_for(self, key: str) -> dict:
        return {parameter: value
                for learner, parameter, value in self.overrides
                if learner == key}


def config_text(config: ExperimentConfig) -> str:
    """Render a configuration as the plain key-value file format."""
    lines = [f"data = {config.data_path}",
             f"target = {config.target}",
             f"seed = {config.seed}",
             f"train_fraction = {format_scalar(config.train_fraction)}",
             f"learners = {', '.join(config.learners)}",
             f"format = {config.report_format}"]
    if config.excluded:
        lines.insert(2, f"exclude = {', '.join(config.excluded)}")
    if config.output_path is not None:
        lines.append(f"out = {config.output_path}")
    for learner, parameter, value in config.overrides:
        lines.append(f"set = {learner}.{parameter}={format_scalar(value)}")
    return "\n".join(lines) + "\n"


def parse_override(text: str) -> tuple[str, str, object]:
    """LEARNER.PARAM=VALUE, e.g. mlp.epochs=200."""
    head, eq, raw_value = text.partition("=")
    learner, dot, parameter = head.partition(".")
    if not eq or not dot or not learner.strip() or not parameter.strip():
        raise ValueError(f"malformed override {text!r}; "
                         f"expected LEARNER.PARAM=VALUE")
    return learner.strip(), parameter.strip(), parse_scalar(raw_value)


def parse_config(text: str) -> ExperimentConfig:
    """Parse the key-value config format; inverse of config_text."""
    values: dict[str, str] = {}
    overrides: list[tuple[str, str, object]] = []
    for i, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ValueError(f"config line {i} is not 'key = value': {raw_line!r}")
        key = key.strip().lower()
        value = value.strip()
        if key == "set":
            overrides.append(parse_override(value))
        elif key in values:
            raise ValueError(f"config line {i} repeats key {key!r}")
        else:
            values[key] = value
    known = {"data", "target", "exclude", "seed", "train_fraction",
             "learners", "format", "out"}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ValueError(f"unknown config key(s): {unknown}")
    if "data" not in values:
        raise ValueError("config must set 'data'")

    def comma_list(key):
        if key not in values:
            return None
        return tuple(part.strip() for part in values[key].split(",") if part.strip())

    kwargs: dict = {"data_path": values["data"]}
    if "target" in values:
        kwargs["target"] = values["target"]
    if (excluded := comma_list("exclude")) is not None:
        kwargs["excluded"] = excluded
    if "seed" in values:
        kwargs["seed"] = int(values["seed"])
    if "train_fraction" in values:
        kwargs["train_fraction"] = float(values["train_fraction"])
    if (learners := comma_list("learners")) is not None:
        kwargs["learners"] = learners
    if "format" in values:
        kwargs["report_format"] = values["format"]
    if "out" in values:
        kwargs["output_path"] = values["out"]
    kwargs["overrides"] = tuple(overrides)
    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------
# Running


@dataclass(frozen=True)
class LearnerOutcome:
    """One learner's row: its scores, or the error that replaced them."""

    key: str
    display_name: str
    category: str
    report: EvaluationReport | None
    error: str | None
    seconds: float

    @property
    def succeeded(self) -> bool:
        return self.report is not None


@dataclass(frozen=True)
class BenchmarkResult:
    config: ExperimentConfig
    n_train: int
    n_test: int
    outcomes: tuple[LearnerOutcome, ...]
    range_warnings: tuple[str, ...] = ()

    @property
    def n_failed(self) -> int:
        return sum(1 for o in self.outcomes if not o.succeeded)

    @property
    def all_succeeded(self) -> bool:
        return self.n_failed == 0


def run_benchmark(config: ExperimentConfig,
                  table: DataTable | None = None) -> BenchmarkResult:
    """Load, validate, project, split once, then train and score each
    selected learner on the identical train/test views.

    A learner failure is captured on its row and never aborts the others.
    Pass a preloaded table to skip reading config.data_path.
    """
    if table is None:
        table = load_table(config.data_path)
    warnings = tuple(str(w) for w in validate_ranges(table))
    task = make_task(table, config.target, config.excluded)
    train_view, test_view = split(task, SplitSpec(config.seed, config.train_fraction))
    baseline = BaselinePredictor(float(train_view.target.mean()))
    outcomes = []
    for key in config.learners:
        spec = _LEARNERS_BY_KEY[key]
        seed = derive_seed(config.seed, spec.key)
        started = time.perf_counter()
        try:
            model = spec.build(train_view, seed, config.overrides_for(key))
            predictions = model.predict_many(test_view.predictors)
            report = evaluate(predictions, test_view.target, baseline,
                              spec.display_name)
            error = None
        except Exception as exc:
            report = None
            error = f"{type(exc).__name__}: {exc}"
        outcomes.append(LearnerOutcome(spec.key, spec.display_name,
                                       spec.category, report, error,
                                       time.perf_counter() - started))
    return BenchmarkResult(config, train_view.n_rows, test_view.n_rows,
                           tuple(outcomes), warnings)


# ---------------------------------------------------------------------------
# Rendering


def _metric_cells(outcome: LearnerOutcome) -> tuple[str, ...]:
    if outcome.report is not None:
        return outcome.report.metric_cells()
    return (FAILURE_MARKER,) * 5


def _failure_lines(result: BenchmarkResult) -> list[str]:
    return [f"{FAILURE_MARKER} {o.display_name}: {o.error}"
            for o in result.outcomes if not o.succeeded]


def _render_text(result: BenchmarkResult) -> str:
    config = result.config
    rows = [(o.category, o.display_name) + _metric_cells(o)
            for o in result.outcomes]
    widths = [len(h) for h in REPORT_COLUMNS]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]

    def line(cells):
        parts = []
        for i, (cell, w) in enumerate(zip(cells, widths)):
            parts.append(cell.ljust(w) if i < 2 else cell.rjust(w))
        return "  ".join(parts).rstrip()

    out = [f"Target {config.target}, seed {config.seed}: "
           f"{result.n_train} train / {result.n_test} test rows.",
           "",
           line(REPORT_COLUMNS),
           line(tuple("-" * w for w in widths))]
    out.extend(line(row) for row in rows)
    failures = _failure_lines(result)
    if failures:
        out.append("")
        out.extend(failures)
    return "\n".join(out) + "\n"


def _render_markdown(result: BenchmarkResult) -> str:
    out = ["| " + " | ".join(REPORT_COLUMNS) + " |",
           "|" + "|".join(" --- " for _ in REPORT_COLUMNS) + "|"]
    for o in result.outcomes:
        cells = (o.category, o.display_name) + _metric_cells(o)
        out.append("| " + " | ".join(cells) + " |")
    failures = _failure_lines(result)
    if failures:
        out.append("")
        out.extend(f"- {text}" for text in failures)
    return "\n".join(out) + "\n"


def _render_csv(result: BenchmarkResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for o in result.outcomes:
        if o.report is not None:
            writer.writerow((o.category, o.display_name)
                            + o.report.metric_cells()
                            + (str(o.report.n_test), ""))
        else:
            writer.writerow((o.category, o.display_name) + ("",) * 5
                            + ("", o.error))
    return buffer.getvalue()


def _render_json(result: BenchmarkResult) -> str:
    config = result.config
    rows = []
    for o in result.outcomes:
        row: dict = {"key": o.key, "category": o.category,
                     "classifier": o.display_name, "error": o.error}
        cells = _metric_cells(o)
        for name, cell in zip(CSV_COLUMNS[2:7], cells):
            try:
                row[name] = float(cell)
            except ValueError:
                row[name] = None
        row["n_test"] = o.report.n_test if o.report is not None else None
        rows.append(row)
    payload = {"target": config.target, "seed": config.seed,
               "train_fraction": config.train_fraction,
               "excluded": list(config.excluded),
               "n_train": result.n_train, "n_test": result.n_test,
               "rows": rows}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


_RENDERERS = {"text": _render_text, "markdown": _render_markdown,
              "csv": _render_csv, "json": _render_json}


def render_report(result: BenchmarkResult, report_format: str | None = None) -> str:
    """Render the comparative table; the format defaults to the config's.

    Formats only change presentation: every numeric value is the same
    canonically rounded figure in all of them.
    """
    fmt = report_format if report_format is not None else result.config.report_format
    renderer = _RENDERERS.get(fmt)
    if renderer is None:
        raise ValueError(f"unknown report format {fmt!r}; choose from {REPORT_FORMATS}")
    if not result.outcomes:
        raise ValueError("benchmark result has no learner rows")
    return renderer(result)


def render_chart_data(result: BenchmarkResult) -> str:
    """Columnar series for external plotting: one (classifier, correlation)
    block and one (classifier, relative errors) block.  Failed learners have
    no values and are omitted.
    """
    if not result.outcomes:
        raise ValueError("benchmark result has no learner rows")
    ok = [o for o in result.outcomes if o.succeeded]
    lines = ["# correlation", "classifier\tcorrelation_coefficient"]
    for o in ok:
        lines.append(f"{o.display_name}\t{o.report.metric_cells()[0]}")
    lines.append("")
    lines.append("# relative errors")
    lines.append("classifier\trelative_absolute_error_pct\t"
                 "root_relative_squared_error_pct")
    for o in ok:
        cells = o.report.metric_cells()
        lines.append(f"{o.display_name}\t{cells[3]}\t{cells[4]}")
    return "\n".join(lines) + "\n"
