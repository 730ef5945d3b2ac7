"""Small builders shared across test modules."""

import numpy as np

from updrsbench.dataset import TELEMONITORING_SCHEMA, DataTable


def random_table(n_rows: int, seed: int = 0) -> DataTable:
    """A valid table with every cell inside its documented range."""
    rng = np.random.default_rng(seed)
    cols = {}
    cols["subject#"] = rng.integers(1, 43, n_rows).astype(float)
    cols["age"] = rng.integers(36, 86, n_rows).astype(float)
    cols["sex"] = rng.integers(0, 2, n_rows).astype(float)
    cols["test_time"] = rng.uniform(0, 180, n_rows)
    cols["motor_UPDRS"] = rng.uniform(5, 41, n_rows)
    cols["total_UPDRS"] = rng.uniform(7, 55, n_rows)
    for col in TELEMONITORING_SCHEMA.columns:
        if col.name in cols:
            continue
        lo = col.expected_min if col.expected_min is not None else 0.0
        hi = col.expected_max if col.expected_max is not None else 1.0
        cols[col.name] = rng.uniform(lo, hi, n_rows)
    matrix = np.column_stack([cols[name] for name in TELEMONITORING_SCHEMA.names])
    return DataTable(TELEMONITORING_SCHEMA, matrix)


def table_csv_text(table: DataTable, header=None) -> str:
    names = header if header is not None else table.schema.names
    lines = [",".join(names)]
    for row in table.rows:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
