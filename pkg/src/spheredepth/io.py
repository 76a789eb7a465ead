"""Labeled-dataset ingestion and machine-readable experiment reports.

CSV files are expected to hold numeric feature columns plus one 0/1 label
column (1 = anomaly); a header row is auto-detected when its first row
does not parse as numbers.  Reports are plain JSON with sorted keys so a
rerun with the same seed produces byte-identical output; files are written
atomically (temp file + rename).
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SampleSet

__all__ = [
    "LabeledDataset",
    "ExperimentReport",
    "load_labeled_csv",
    "load_features_csv",
    "write_text_atomic",
]


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature matrix with binary anomaly labels (1 = anomaly)."""

    samples: SampleSet
    labels: np.ndarray
    name: str = ""

    def __post_init__(self):
        labels = np.asarray(self.labels).reshape(-1)
        if labels.size != self.samples.n:
            raise ValueError(
                f"label count {labels.size} does not match sample count {self.samples.n}"
            )
        if not np.all(np.isin(labels, (0, 1))):
            raise ValueError("labels must be 0 or 1")
        labels = labels.astype(np.int64)
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def anomaly_rate(self) -> float:
        return float(self.labels.mean())


@dataclass
class ExperimentReport:
    """Self-describing result record: inputs, metrics, and provenance.

    ``parameters`` must contain everything needed to replay the run; for
    seeded commands replaying reproduces ``metrics`` bit-for-bit (wall-time
    metrics are exempt).
    """

    command: str
    parameters: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "parameters": self.parameters,
            "metrics": self.metrics,
            "provenance": self.provenance,
        }
        return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"

    def write(self, path) -> None:
        write_text_atomic(path, self.to_json())


def write_text_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_cell(cell: str, row: int, col: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ValueError(
            f"row {row}, column {col}: cannot parse {cell!r} as a number"
        ) from None
    if not math.isfinite(value):
        raise ValueError(f"row {row}, column {col}: non-finite value {cell!r}")
    return value


def _looks_numeric(row: list[str]) -> bool:
    for cell in row:
        try:
            float(cell)
        except ValueError:
            return False
    return True


def _read_rows(path: Path, delimiter: str) -> tuple[list[list[str]], bool]:
    with open(path, newline="", encoding="utf-8") as handle:
        rows = [row for row in csv.reader(handle, delimiter=delimiter) if row]
    if not rows:
        raise ValueError(f"{path}: file is empty")
    has_header = not _looks_numeric(rows[0])
    if has_header and len(rows) == 1:
        raise ValueError(f"{path}: no data rows")
    return rows, has_header


def load_features_csv(path, delimiter: str = ",") -> SampleSet:
    """Read an all-numeric CSV (every column a feature) as a SampleSet."""
    path = Path(path)
    rows, has_header = _read_rows(path, delimiter)
    data_rows = rows[1:] if has_header else rows
    width = len(data_rows[0])
    offset = 2 if has_header else 1
    out = np.empty((len(data_rows), width))
    for i, row in enumerate(data_rows):
        if len(row) != width:
            raise ValueError(
                f"{path}: row {i + offset} has {len(row)} cells, expected {width}"
            )
        for j, cell in enumerate(row):
            out[i, j] = _parse_cell(cell.strip(), i + offset, j + 1)
    return SampleSet(out)


def load_labeled_csv(path, label_column, delimiter: str = ",") -> LabeledDataset:
    """Read a numeric CSV with one 0/1 label column.

    ``label_column`` is either a header name or a 0-based column index.
    Row order is preserved.  Errors name the offending cell by file row
    and column (both 1-based in messages).
    """
    path = Path(path)
    rows, has_header = _read_rows(path, delimiter)
    header = rows[0] if has_header else None
    data_rows = rows[1:] if has_header else rows

    width = len(data_rows[0])
    if width < 2:
        raise ValueError(f"{path}: need at least one feature column and a label column")

    if isinstance(label_column, str):
        if header is None:
            raise ValueError(f"{path}: label column {label_column!r} needs a header row")
        stripped = [name.strip() for name in header]
        if label_column not in stripped:
            raise ValueError(f"{path}: no column named {label_column!r} in header")
        label_idx = stripped.index(label_column)
    else:
        label_idx = int(label_column)
        if label_idx < 0:
            label_idx += width
        if not 0 <= label_idx < width:
            raise ValueError(f"{path}: label column index {label_column} out of range")

    features = np.empty((len(data_rows), width - 1))
    labels = np.empty(len(data_rows), dtype=np.int64)
    offset = 2 if has_header else 1  # 1-based file row of the first data row
    for i, row in enumerate(data_rows):
        if len(row) != width:
            raise ValueError(
                f"{path}: row {i + offset} has {len(row)} cells, expected {width}"
            )
        feat_j = 0
        for j, cell in enumerate(row):
            value = _parse_cell(cell.strip(), i + offset, j + 1)
            if j == label_idx:
                if value not in (0.0, 1.0):
                    raise ValueError(
                        f"{path}: row {i + offset}, column {j + 1}: "
                        f"label must be 0 or 1, got {cell!r}"
                    )
                labels[i] = int(value)
            else:
                features[i, feat_j] = value
                feat_j += 1
    return LabeledDataset(samples=SampleSet(features), labels=labels, name=path.stem)
