"""Synthetic stand-in for the telemonitoring export.

Generates a table with the same shape and value ranges as the real file:
per-subject UPDRS baselines progressing roughly linearly over six months of
recording sessions, voice measures that degrade with severity, and noise on
top.  Useful for exercising the harness end to end when the real export is
not on disk; scores on it say nothing about scores on the real data.
"""

from __future__ import annotations

import numpy as np

from .dataset import TELEMONITORING_SCHEMA, DataTable, serialize_table
from .numeric import RngStream

DEFAULT_ROWS = 5875
DEFAULT_SUBJECTS = 42


def _rows_per_subject(n_rows: int, n_subjects: int) -> list[int]:
    base, extra = divmod(n_rows, n_subjects)
    return [base + (1 if i < extra else 0) for i in range(n_subjects)]


def synthetic_table(n_rows: int = DEFAULT_ROWS, seed: int = 0) -> DataTable:
    if n_rows < 1:
        raise ValueError("n_rows must be positive")
    rng = RngStream(seed)
    n_subjects = max(1, min(DEFAULT_SUBJECTS, n_rows // 2)) if n_rows > 1 else 1
    counts = _rows_per_subject(n_rows, n_subjects)

    columns = {name: np.empty(n_rows) for name in TELEMONITORING_SCHEMA.names}
    start = 0
    for subject in range(n_subjects):
        count = counts[subject]
        stop = start + count
        rows = slice(start, stop)
        start = stop
        age = float(rng.integers(36, 86))
        sex = float(rng.integers(0, 2))
        baseline = rng.uniform(10.0, 38.0)
        progression = rng.uniform(0.01, 0.06)
        times = np.sort(rng.uniform(0.0, 180.0, size=count))

        total = baseline + progression * times + 0.3 * rng.standard_normal(count)
        total = np.clip(total, 7.0, 55.0)
        motor = 2.0 + 0.68 * total + 0.2 * rng.standard_normal(count)
        motor = np.clip(motor, 5.0, 41.0)
        severity = (total - 7.0) / 48.0

        jitter_pct = np.clip(0.002 + 0.02 * severity
                             + np.abs(0.003 * rng.standard_normal(count)),
                             8e-4, 0.10)
        shimmer = np.clip(0.01 + 0.12 * severity
                          + np.abs(0.02 * rng.standard_normal(count)),
                          3e-3, 0.269)

        columns["subject#"][rows] = subject + 1
        columns["age"][rows] = age
        columns["sex"][rows] = sex
        columns["test_time"][rows] = times
        columns["motor_UPDRS"][rows] = motor
        columns["total_UPDRS"][rows] = total
        columns["Jitter(%)"][rows] = jitter_pct
        columns["Jitter(Abs)"][rows] = np.clip(jitter_pct * 0.004, 2e-6, 4e-4)
        columns["Jitter:RAP"][rows] = np.clip(jitter_pct * 0.5, 3e-4, 0.057)
        columns["Jitter:PPQ5"][rows] = np.clip(jitter_pct * 0.55, 4e-4, 0.069)
        columns["Jitter:DDP"][rows] = np.clip(jitter_pct * 1.5, 1e-3, 0.173)
        columns["Shimmer"][rows] = shimmer
        columns["Shimmer(dB)"][rows] = np.clip(shimmer * 7.5, 0.026, 2.107)
        columns["Shimmer:APQ3"][rows] = np.clip(shimmer * 0.5, 2e-3, 0.163)
        columns["Shimmer:APQ5"][rows] = np.clip(shimmer * 0.55, 2e-3, 0.167)
        columns["Shimmer:APQ11"][rows] = np.clip(shimmer * 0.7, 3e-3, 0.276)
        columns["Shimmer:DDA"][rows] = np.clip(shimmer * 1.5, 6e-3, 0.489)
        columns["NHR"][rows] = np.clip(0.005 + 0.1 * severity ** 2
                                       + np.abs(0.01 * rng.standard_normal(count)),
                                       3e-4, 0.749)
        columns["HNR"][rows] = np.clip(28.0 - 12.0 * severity
                                       + rng.standard_normal(count),
                                       1.659, 37.875)
        columns["RPDE"][rows] = np.clip(0.35 + 0.3 * severity
                                        + 0.05 * rng.standard_normal(count),
                                        0.151, 0.966)
        columns["DFA"][rows] = np.clip(0.55 + 0.15 * severity
                                       + 0.03 * rng.standard_normal(count),
                                       0.514, 0.866)
        columns["PPE"][rows] = np.clip(0.08 + 0.4 * severity
                                       + 0.05 * rng.standard_normal(count),
                                       0.022, 0.732)

    matrix = np.column_stack([columns[name] for name in TELEMONITORING_SCHEMA.names])
    return DataTable(TELEMONITORING_SCHEMA, matrix)


def write_synthetic_csv(path, n_rows: int = DEFAULT_ROWS, seed: int = 0) -> None:
    table = synthetic_table(n_rows, seed)
    with open(path, "w", encoding="ascii") as handle:
        handle.write(serialize_table(table))
