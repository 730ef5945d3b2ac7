"""Telemonitoring table handling: schema, loading, validation, task projection
and the seeded train/test split.

The table is the UCI Parkinson's telemonitoring export: one row per voice
recording, 22 columns, no missing values.  All schema knowledge (canonical
column names, column kinds, documented value ranges, header aliases) lives
here so the rest of the package never touches raw CSV details.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from .numeric import RngStream

KIND_IDENTIFIER = "identifier"
KIND_DEMOGRAPHIC = "demographic"
KIND_CLOCK = "clock"
KIND_TARGET = "target-candidate"
KIND_VOICE = "voice-feature"


@dataclass(frozen=True)
class Column:
    """One table column: canonical name, role, and documented value range.

    The expected range is advisory; it mirrors the published summary of the
    dataset and is used only to warn about suspicious cells, never to reject
    them.  Columns without a documented range carry None bounds.
    """

    name: str
    kind: str
    expected_min: float | None = None
    expected_max: float | None = None


_COLUMNS = (
    Column("subject#", KIND_IDENTIFIER),
    Column("age", KIND_DEMOGRAPHIC),
    Column("sex", KIND_DEMOGRAPHIC),
    Column("test_time", KIND_CLOCK),
    Column("motor_UPDRS", KIND_TARGET, 5.0, 41.0),
    Column("total_UPDRS", KIND_TARGET, 7.0, 55.0),
    Column("Jitter(%)", KIND_VOICE, 8e-4, 0.10),
    Column("Jitter(Abs)", KIND_VOICE, 2e-6, 4e-4),
    Column("Jitter:RAP", KIND_VOICE, 3e-4, 0.057),
    Column("Jitter:PPQ5", KIND_VOICE, 4e-4, 0.069),
    Column("Jitter:DDP", KIND_VOICE, 1e-3, 0.173),
    Column("Shimmer", KIND_VOICE, 3e-3, 0.269),
    Column("Shimmer(dB)", KIND_VOICE, 0.026, 2.107),
    Column("Shimmer:APQ3", KIND_VOICE, 2e-3, 0.163),
    Column("Shimmer:APQ5", KIND_VOICE, 2e-3, 0.167),
    Column("Shimmer:APQ11", KIND_VOICE, 3e-3, 0.276),
    Column("Shimmer:DDA", KIND_VOICE),
    Column("NHR", KIND_VOICE, 3e-4, 0.749),
    Column("HNR", KIND_VOICE, 1.659, 37.875),
    Column("RPDE", KIND_VOICE, 0.151, 0.966),
    Column("DFA", KIND_VOICE, 0.514, 0.866),
    Column("PPE", KIND_VOICE, 0.022, 0.732),
)

EXPECTED_COLUMN_COUNT = 22

# Alternative header spellings seen in mirrors of the voice datasets; each maps
# to a canonical column after normalisation.
_EXTRA_ALIASES = {
    "subject": "subject#",
    "subject_no": "subject#",
    "mdvp:jitter(%)": "Jitter(%)",
    "mdvp:jitter(abs)": "Jitter(Abs)",
    "mdvp:rap": "Jitter:RAP",
    "mdvp:jitter:rap": "Jitter:RAP",
    "mdvp:ppq5": "Jitter:PPQ5",
    "mdvp:jitter:ppq5": "Jitter:PPQ5",
    "mdvp:ddp": "Jitter:DDP",
    "mdvp:shimmer": "Shimmer",
    "mdvp:shimmer(db)": "Shimmer(dB)",
    "mdvp:apq3": "Shimmer:APQ3",
    "mdvp:shimmer:apq3": "Shimmer:APQ3",
    "mdvp:apq5": "Shimmer:APQ5",
    "mdvp:shimmer:apq5": "Shimmer:APQ5",
    "mdvp:apq11": "Shimmer:APQ11",
    "mdvp:shimmer:apq11": "Shimmer:APQ11",
    "mdvp:dda": "Shimmer:DDA",
    "mdvp:shimmer:dda": "Shimmer:DDA",
}


def _normalise_name(name: str) -> str:
    return " ".join(name.split()).strip().casefold().replace("-", "_").replace(" ", "")


class Schema:
    """The fixed 22-column layout, with name resolution through aliases."""

    def __init__(self, columns: tuple[Column, ...] = _COLUMNS):
        if len(columns) != EXPECTED_COLUMN_COUNT:
            raise ValueError(f"schema must have exactly {EXPECTED_COLUMN_COUNT} columns")
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names in schema")
        targets = [c.name for c in columns if c.kind == KIND_TARGET]
        if len(targets) != 2:
            raise ValueError("schema must have exactly two target-candidate columns")
        self.columns = columns
        self.names = tuple(names)
        self._index = {name: i for i, name in enumerate(names)}
        self._aliases = {_normalise_name(name): name for name in names}
        for alias, canonical in _EXTRA_ALIASES.items():
            self._aliases.setdefault(_normalise_name(alias), canonical)

    def resolve(self, name: str) -> str:
        """Canonical column name for an exact name or a known alias."""
        canonical = self._aliases.get(_normalise_name(name))
        if canonical is None:
            raise KeyError(f"unknown column name {name!r}")
        return canonical

    def index_of(self, name: str) -> int:
        return self._index[self.resolve(name)]

    def column(self, name: str) -> Column:
        return self.columns[self.index_of(name)]

    @property
    def target_candidates(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns if c.kind == KIND_TARGET)


TELEMONITORING_SCHEMA = Schema()


class DataFormatError(ValueError):
    """Raised when the byte stream cannot be understood as the expected table.

    Carries the 1-based data row (0 for header-level problems) and the column
    name or position when one is identifiable.
    """

    def __init__(self, message: str, row: int = 0, column: str | None = None):
        prefix = ""
        if row > 0:
            prefix = f"row {row}"
            if column is not None:
                prefix += f", column {column}"
            prefix += ": "
        elif column is not None:
            prefix = f"column {column}: "
        super().__init__(prefix + message)
        self.row = row
        self.column = column


@dataclass(frozen=True)
class DataTable:
    """An immutable, fully numeric table in canonical column order."""

    schema: Schema
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != len(self.schema.columns):
            raise ValueError("rows must be a matrix with one column per schema column")
        if not np.all(np.isfinite(rows)):
            raise ValueError("table cells must all be finite")
        rows = rows.copy()
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def row_count(self) -> int:
        return int(self.rows.shape[0])

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.schema.index_of(name)]

    def restrict(self, indices) -> "DataTable":
        return DataTable(self.schema, self.rows[np.asarray(indices, dtype=int)])


def load_table(source, schema: Schema = TELEMONITORING_SCHEMA) -> DataTable:
    """Parse a comma-separated byte stream (or a path to one) into a DataTable.

    The header row must contain every schema column exactly once, in any
    order; data columns are reordered into canonical order.  Every cell must
    parse as a finite number.  Problems raise DataFormatError with the 1-based
    data row and column name.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as handle:
            raw = handle.read()
    elif isinstance(source, bytes):
        raw = source
    elif hasattr(source, "read"):
        raw = source.read()
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
    else:
        raise TypeError("source must be a path, bytes, or a readable stream")

    text = raw.decode("utf-8-sig")
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise DataFormatError("empty file: no header row")

    header = [cell.strip() for cell in lines[0].split(",")]
    seen: dict[str, int] = {}
    for pos, cell in enumerate(header):
        try:
            canonical = schema.resolve(cell)
        except KeyError:
            raise DataFormatError(f"unrecognised header name {cell!r}", column=cell) from None
        if canonical in seen:
            raise DataFormatError(f"duplicated in header", column=canonical)
        seen[canonical] = pos
    missing = [name for name in schema.names if name not in seen]
    if missing:
        raise DataFormatError(f"header is missing columns: {', '.join(missing)}")

    n_rows = len(lines) - 1
    if n_rows == 0:
        raise DataFormatError("empty file: header but no data rows")

    order = [seen[name] for name in schema.names]
    values = np.empty((n_rows, len(schema.names)), dtype=float)
    n_fields = len(header)
    for r, line in enumerate(lines[1:], start=1):
        cells = line.split(",")
        if len(cells) != n_fields:
            raise DataFormatError(f"expected {n_fields} fields, found {len(cells)}", row=r)
        for out_col, src_col in enumerate(order):
            cell = cells[src_col].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataFormatError(f"could not parse {cell!r} as a number",
                                      row=r, column=schema.names[out_col]) from None
            if not math.isfinite(v):
                raise DataFormatError(f"non-finite value {cell!r}",
                                      row=r, column=schema.names[out_col])
            values[r - 1, out_col] = v
    return DataTable(schema, values)


def serialize_table(table: DataTable) -> str:
    """Text form of a table that load_table reads back to an identical table."""
    out = io.StringIO()
    out.write(",".join(table.schema.names))
    out.write("\n")
    for row in table.rows:
        out.write(",".join(repr(float(v)) for v in row))
        out.write("\n")
    return out.getvalue()


@dataclass(frozen=True)
class RangeWarning:
    """A cell outside its column's documented range.  Advisory only."""

    row: int
    column: str
    value: float
    expected_min: float
    expected_max: float

    def __str__(self):
        return (f"row {self.row}, column {self.column}: value {self.value!r} outside "
                f"documented range [{self.expected_min}, {self.expected_max}]")


def validate_ranges(table: DataTable) -> list[RangeWarning]:
    """Check every cell against its column's documented range.

    Returns one warning per offending cell (1-based rows).  Never raises: the
    documented ranges summarise a publication and the live export is allowed
    to disagree with them.
    """
    warnings = []
    for j, col in enumerate(table.schema.columns):
        if col.expected_min is None:
            continue
        values = table.rows[:, j]
        bad = np.flatnonzero((values < col.expected_min) | (values > col.expected_max))
        for i in bad:
            warnings.append(RangeWarning(int(i) + 1, col.name, float(values[i]),
                                         col.expected_min, col.expected_max))
    warnings.sort(key=lambda w: (w.row, table.schema.index_of(w.column)))
    return warnings


@dataclass(frozen=True)
class TaskView:
    """A regression task: predictor matrix, target vector, and their names.

    Rows keep the order of the table they were projected from.  The matrix
    and vector are read-only.
    """

    predictors: np.ndarray
    predictor_names: tuple[str, ...]
    target: np.ndarray
    target_name: str
    excluded: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.predictors, dtype=float))
        y = np.asarray(self.target, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ValueError("predictors and target must have matching row counts")
        if X.shape[1] != len(self.predictor_names):
            raise ValueError("predictor_names length must match predictor columns")
        X = X.copy() if X.flags.writeable else X
        y = y.copy() if y.flags.writeable else y
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "predictors", X)
        object.__setattr__(self, "target", y)

    @property
    def n_rows(self) -> int:
        return int(self.predictors.shape[0])

    @property
    def n_predictors(self) -> int:
        return int(self.predictors.shape[1])

    def restrict(self, indices) -> "TaskView":
        idx = np.asarray(indices, dtype=int)
        return TaskView(self.predictors[idx], self.predictor_names,
                        self.target[idx], self.target_name, self.excluded)


def make_task(table: DataTable, target: str, excluded=()) -> TaskView:
    """Project a table onto a prediction task.

    target must be one of the target-candidate columns.  excluded names are
    dropped from the predictors (the target never appears there regardless).
    Predictors keep canonical column order.
    """
    schema = table.schema
    target_name = schema.resolve(target)
    if schema.column(target_name).kind != KIND_TARGET:
        raise ValueError(f"{target_name!r} is not a target candidate; "
                         f"choose one of {schema.target_candidates}")
    resolved: list[str] = []
    for name in excluded:
        canonical = schema.resolve(name)
        if canonical == target_name:
            raise ValueError(f"cannot exclude the target column {target_name!r}")
        if canonical in resolved:
            raise ValueError(f"column {canonical!r} excluded twice")
        resolved.append(canonical)
    dropped = set(resolved) | {target_name}
    keep = [i for i, name in enumerate(schema.names) if name not in dropped]
    names = tuple(schema.names[i] for i in keep)
    excluded_in_order = tuple(n for n in schema.names if n in set(resolved))
    return TaskView(table.rows[:, keep], names,
                    table.rows[:, schema.index_of(target_name)], target_name,
                    excluded_in_order)


@dataclass(frozen=True)
class SplitSpec:
    """Seeded shuffle split: floor(train_fraction * n) rows train, rest test."""

    seed: int
    train_fraction: float = 0.75


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint, exhaustive train/test row indices for a table of n rows.

    A seeded uniform permutation is cut at floor(train_fraction * n); both
    sides are returned in ascending order so that restrictions preserve the
    source row order.  Both sides must end up non-empty.
    """
    if not 0.0 < spec.train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n_train = int(math.floor(spec.train_fraction * n))
    if n_train < 1 or n - n_train < 1:
        raise ValueError(f"split of {n} rows at fraction {spec.train_fraction} "
                         f"leaves an empty side")
    perm = RngStream(spec.seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split(task: TaskView, spec: SplitSpec) -> tuple[TaskView, TaskView]:
    train_idx, test_idx = split_indices(task.n_rows, spec)
    return task.restrict(train_idx), task.restrict(test_idx)


def split_table(table: DataTable, spec: SplitSpec) -> tuple[DataTable, DataTable]:
    train_idx, test_idx = split_indices(table.row_count, spec)
    return table.restrict(train_idx), table.restrict(test_idx)


@dataclass(frozen=True)
class ColumnStats:
    """Per-column summaries of a training matrix, for scaling decisions."""

    names: tuple[str, ...]
    minimum: np.ndarray
    maximum: np.ndarray
    mean: np.ndarray
    stddev: np.ndarray

    @property
    def is_constant(self) -> np.ndarray:
        return self.maximum == self.minimum


def normalization_stats(task: TaskView) -> ColumnStats:
    """Column minima, maxima, means and sample standard deviations of the
    predictors.  A single row gives stddev 0 and flags every column constant.
    """
    X = task.predictors
    if X.shape[0] == 0:
        raise ValueError("cannot compute statistics of an empty task")
    ddof = 1 if X.shape[0] > 1 else 0
    std = np.std(X, axis=0, ddof=ddof) if X.shape[0] > 1 else np.zeros(X.shape[1])
    return ColumnStats(task.predictor_names,
                       X.min(axis=0), X.max(axis=0), X.mean(axis=0), std)
