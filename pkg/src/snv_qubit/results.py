"""Scan results and their CSV representation."""

import csv
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

FLOAT_FORMAT = ".10g"


def _fmt(value):
    return format(float(value), FLOAT_FORMAT)


@dataclass
class ScanResult:
    """One experiment: axes, values on the axis grid and per-point errors.

    ``values`` has shape ``tuple(len(axis) for axis in axes)``. Two-axis scans
    are written in long format, one row per grid point.
    """

    axis_names: Tuple[str, ...]
    axes: Tuple[np.ndarray, ...]
    values: np.ndarray
    value_name: str = "value"
    stderr: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.axis_names) != len(self.axes):
            raise ValueError("one axis name per axis required")
        shape = tuple(len(a) for a in self.axes)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match axes {shape}")
        if self.stderr is None:
            self.stderr = np.zeros(shape)
        else:
            self.stderr = np.asarray(self.stderr, dtype=float)
            if self.stderr.shape != shape:
                raise ValueError("stderr shape must match values")

    @property
    def header(self):
        return list(self.axis_names) + [self.value_name, "stderr"]

    def rows(self):
        for idx in np.ndindex(*self.values.shape):
            coords = [self.axes[k][i] for k, i in enumerate(idx)]
            yield coords + [self.values[idx], self.stderr[idx]]

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(self.header)
            for row in self.rows():
                writer.writerow([_fmt(v) for v in row])

    def within_unit_interval(self, n_sigma=3.0):
        """Populations lie in [0, 1] up to ``n_sigma`` Monte-Carlo errors."""
        slack = n_sigma * self.stderr + 1e-12
        return bool(np.all(self.values >= -slack) and np.all(self.values <= 1.0 + slack))


def write_table(path, header, rows):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (int, float, np.floating)) else v for v in row])


def read_columns(path):
    """Read a numeric CSV into ``{column: array}`` preserving header order."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        data = [[] for _ in header]
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            for column, value in zip(data, row):
                column.append(float(value))
    return {name: np.asarray(col) for name, col in zip(header, data)}
