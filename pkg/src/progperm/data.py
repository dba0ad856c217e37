"""Feature tables, outcome vectors and analysis configuration.

Everything here is immutable after construction: arrays are copied and
marked read-only so they can be shared between worker threads.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    CardinalityError,
    DuplicateId,
    MissingColumn,
    NegativeValue,
    ParseError,
    UnknownFeature,
    UnmatchedSamples,
    ValidationError,
)


class Orientation(str, enum.Enum):
    SAMPLES_AS_ROWS = "samples"
    FEATURES_AS_ROWS = "features"


class OutcomeKind(str, enum.Enum):
    BINARY = "binary"
    CONTINUOUS = "continuous"


class TestKind(str, enum.Enum):
    __test__ = False  # keep pytest from collecting it

    WILCOXON = "wilcoxon"
    KRUSKAL = "kruskal"
    KENDALL = "kendall"
    SPEARMAN = "spearman"
    # known-variance Z test; only meaningful for the Gaussian oracle runs
    Z = "z"

    @property
    def outcome_kind(self) -> OutcomeKind:
        if self in (TestKind.KENDALL, TestKind.SPEARMAN):
            return OutcomeKind.CONTINUOUS
        return OutcomeKind.BINARY


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_unique(ids: Sequence[str], what: str) -> None:
    seen = set()
    for i in ids:
        if i in seen:
            raise DuplicateId(f"duplicate {what} identifier {i!r}")
        seen.add(i)


@dataclass(frozen=True, eq=False)
class FeatureTable:
    """N x p nonnegative abundance matrix (samples as rows)."""

    sample_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sample_ids", tuple(str(s) for s in self.sample_ids))
        object.__setattr__(self, "feature_names", tuple(str(f) for f in self.feature_names))
        values = _frozen(self.values)
        if values.ndim != 2:
            raise ValidationError("values must be a 2-D matrix")
        if values.shape != (len(self.sample_ids), len(self.feature_names)):
            raise ValidationError(
                f"values shape {values.shape} does not match "
                f"{len(self.sample_ids)} samples x {len(self.feature_names)} features"
            )
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValidationError("table needs at least one sample and one feature")
        if not np.all(np.isfinite(values)):
            raise ValidationError("values contain NaN or infinity")
        if np.any(values < 0):
            raise NegativeValue("values must be nonnegative")
        _check_unique(self.sample_ids, "sample")
        _check_unique(self.feature_names, "feature")
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, FeatureTable):
            return NotImplemented
        return (
            self.sample_ids == other.sample_ids
            and self.feature_names == other.feature_names
            and np.array_equal(self.values, other.values)
        )

    def feature_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise UnknownFeature(f"unknown feature {name!r}") from None


@dataclass(frozen=True, eq=False)
class OutcomeVector:
    """Binary group labels (1/2) or a continuous outcome, one per sample."""

    kind: OutcomeKind
    sample_ids: tuple[str, ...]
    binary_labels: np.ndarray | None = None
    continuous_values: np.ndarray | None = None
    # raw values mapped to labels 1 and 2
    levels: tuple[str, str] | None = None

    def __post_init__(self):
        kind = OutcomeKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "sample_ids", tuple(str(s) for s in self.sample_ids))
        _check_unique(self.sample_ids, "sample")
        n = len(self.sample_ids)
        if kind is OutcomeKind.BINARY:
            if self.binary_labels is None:
                raise ValidationError("binary outcome needs labels")
            labels = _frozen(self.binary_labels, dtype=np.int8)
            if labels.shape != (n,):
                raise ValidationError("label vector length differs from sample count")
            if not np.all((labels == 1) | (labels == 2)):
                raise ValidationError("binary labels must be 1 or 2")
            n1 = int(np.sum(labels == 1))
            n2 = n - n1
            if n1 < 2 or n2 < 2:
                raise ValidationError(f"each group needs at least 2 samples (n1={n1}, n2={n2})")
            object.__setattr__(self, "binary_labels", labels)
            object.__setattr__(self, "continuous_values", None)
        else:
            if self.continuous_values is None:
                raise ValidationError("continuous outcome needs values")
            vals = _frozen(self.continuous_values)
            if vals.shape != (n,):
                raise ValidationError("outcome length differs from sample count")
            if not np.all(np.isfinite(vals)):
                raise ValidationError("continuous outcome contains non-finite values")
            if np.unique(vals).size < 3:
                raise ValidationError("continuous outcome needs at least 3 distinct values")
            object.__setattr__(self, "continuous_values", vals)
            object.__setattr__(self, "binary_labels", None)

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)

    @property
    def n1(self) -> int | None:
        if self.kind is not OutcomeKind.BINARY:
            return None
        return int(np.sum(self.binary_labels == 1))

    @property
    def n2(self) -> int | None:
        if self.kind is not OutcomeKind.BINARY:
            return None
        return int(np.sum(self.binary_labels == 2))

    def __eq__(self, other):
        if not isinstance(other, OutcomeVector):
            return NotImplemented
        if self.kind != other.kind or self.sample_ids != other.sample_ids:
            return False
        if self.kind is OutcomeKind.BINARY:
            return np.array_equal(self.binary_labels, other.binary_labels)
        return np.array_equal(self.continuous_values, other.continuous_values)

    def reorder(self, order: Sequence[int]) -> OutcomeVector:
        order = np.asarray(order, dtype=int)
        ids = tuple(self.sample_ids[i] for i in order)
        if self.kind is OutcomeKind.BINARY:
            return replace(self, sample_ids=ids, binary_labels=self.binary_labels[order])
        return replace(self, sample_ids=ids, continuous_values=self.continuous_values[order])


@dataclass(frozen=True)
class AnalysisConfig:
    alpha: float = 0.05
    master_seed: int = 0
    draw_scale: float = 1.0
    scenario_stride: int = 1
    top_m: int = 50
    test: TestKind = TestKind.WILCOXON
    # population sd for TestKind.Z only
    z_sigma: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "test", TestKind(self.test))
        if not 0 < self.alpha < 1:
            raise ValidationError("alpha must lie in (0, 1)")
        if not (0 <= int(self.master_seed) < 2**64):
            raise ValidationError("master_seed must be an unsigned 64-bit integer")
        if not (self.draw_scale > 0 and math.isfinite(self.draw_scale)):
            raise ValidationError("draw_scale must be positive")
        if int(self.scenario_stride) < 1:
            raise ValidationError("scenario_stride must be >= 1")
        if int(self.top_m) < 1:
            raise ValidationError("top_m must be >= 1")
        if self.test is TestKind.Z and not (self.z_sigma and self.z_sigma > 0):
            raise ValidationError("the Z test needs a positive z_sigma")

    def check_compatible(self, table: FeatureTable, outcome: OutcomeVector) -> None:
        if self.test.outcome_kind is not outcome.kind:
            raise ValidationError(
                f"test {self.test.value!r} cannot be used with a {outcome.kind.value} outcome"
            )
        if table.n_samples < 4:
            raise ValidationError("at least 4 samples are required")

    def effective_top_m(self, n_features: int) -> int:
        return min(int(self.top_m), n_features)


# ---------------------------------------------------------------------------
# delimited-text I/O


def _delimiter(path: Path) -> str:
    return "\t" if path.suffix.lower() in (".tsv", ".txt") else ","


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=_delimiter(path)) if r]
    if not rows:
        raise ParseError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} cells, got {len(r)}")
    return header, body


def _id_position(header: list[str], id_column: str | None, path) -> int:
    if id_column is None:
        return 0
    try:
        return header.index(id_column)
    except ValueError:
        raise MissingColumn(f"{path}: no ID column {id_column!r}") from None


def load_feature_table(
    path,
    orientation: Orientation | str = Orientation.SAMPLES_AS_ROWS,
    id_column: str | None = None,
) -> FeatureTable:
    """Read a delimited abundance table.

    The ID column (first column unless ``id_column`` is given) labels the
    rows; the remaining header cells label the columns. With
    ``orientation="features"`` rows are features and the matrix is
    transposed to the canonical samples x features layout.
    """
    orientation = Orientation(orientation)
    header, body = _read_rows(path)
    pos = _id_position(header, id_column, path)
    col_names = [h for i, h in enumerate(header) if i != pos]
    row_names = []
    values = np.empty((len(body), len(col_names)))
    for r, row in enumerate(body):
        row_names.append(row[pos])
        cells = [c for i, c in enumerate(row) if i != pos]
        for c, cell in enumerate(cells):
            try:
                values[r, c] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric cell {cell!r} at row {row[pos]!r}, column {col_names[c]!r}"
                ) from None
    if orientation is Orientation.FEATURES_AS_ROWS:
        return FeatureTable(col_names, row_names, values.T)
    return FeatureTable(row_names, col_names, values)


def write_feature_table(table: FeatureTable, path, id_header: str = "sample_id") -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=_delimiter(path), lineterminator="\n")
        w.writerow([id_header, *table.feature_names])
        for sid, row in zip(table.sample_ids, table.values):
            w.writerow([sid, *(repr(float(v)) for v in row)])


def load_outcome(
    path,
    column: str,
    kind: OutcomeKind | str,
    id_column: str | None = None,
) -> OutcomeVector:
    """Read one outcome column from a metadata file.

    Binary outcomes map the two observed values to labels 1 and 2 in
    lexicographic order of their string form.
    """
    kind = OutcomeKind(kind)
    header, body = _read_rows(path)
    pos = _id_position(header, id_column, path)
    try:
        col = header.index(column)
    except ValueError:
        raise MissingColumn(f"{path}: no column {column!r}") from None
    ids = [row[pos] for row in body]
    raw = [row[col].strip() for row in body]
    if any(v == "" for v in raw):
        raise ParseError(f"{path}: missing values in column {column!r}")
    if kind is OutcomeKind.BINARY:
        levels = sorted(set(raw))
        if len(levels) != 2:
            raise CardinalityError(
                f"binary outcome {column!r} has {len(levels)} distinct values, expected 2"
            )
        labels = [1 if v == levels[0] else 2 for v in raw]
        return OutcomeVector(kind, ids, binary_labels=labels, levels=(levels[0], levels[1]))
    try:
        vals = [float(v) for v in raw]
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric continuous outcome: {exc}") from None
    return OutcomeVector(kind, ids, continuous_values=vals)


def write_outcome(outcome: OutcomeVector, path, column: str = "group") -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=_delimiter(path), lineterminator="\n")
        w.writerow(["sample_id", column])
        if outcome.kind is OutcomeKind.BINARY:
            names = outcome.levels or ("1", "2")
            for sid, lab in zip(outcome.sample_ids, outcome.binary_labels):
                w.writerow([sid, names[lab - 1]])
        else:
            for sid, v in zip(outcome.sample_ids, outcome.continuous_values):
                w.writerow([sid, repr(float(v))])


def align(table: FeatureTable, outcome: OutcomeVector) -> tuple[FeatureTable, OutcomeVector]:
    """Put table rows in outcome order, with group 1 ahead of group 2.

    The group reordering is a stable sort, so aligning twice is a no-op.
    """
    if set(table.sample_ids) != set(outcome.sample_ids) or table.n_samples != outcome.n_samples:
        missing = set(outcome.sample_ids) ^ set(table.sample_ids)
        raise UnmatchedSamples(
            f"sample IDs differ between table and outcome ({len(missing)} unmatched)"
        )
    if outcome.kind is OutcomeKind.BINARY:
        order = np.argsort(outcome.binary_labels, kind="stable")
        outcome = outcome.reorder(order)
    pos = {sid: i for i, sid in enumerate(table.sample_ids)}
    rows = [pos[sid] for sid in outcome.sample_ids]
    aligned = FeatureTable(outcome.sample_ids, table.feature_names, table.values[rows])
    return aligned, outcome
