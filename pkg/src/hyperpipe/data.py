"""Dataset representation: feature matrix, targets, extra data channels.

Data is dense float64 throughout; missing values are encoded as NaN and are
expected to be imputed before reaching an estimator.  All containers are
immutable after construction so they can be shared freely across concurrent
fold evaluations.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

CLASSIFICATION = "classification"
REGRESSION = "regression"


def _frozen(arr, dtype=np.float64, ndim=None):
    out = np.array(arr, dtype=dtype, order="C", copy=True)
    if ndim is not None and out.ndim != ndim:
        raise ValueError(f"expected {ndim}-d array, got {out.ndim}-d")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """One analysis dataset: features ``x`` (n, p), targets ``y`` (n,), extras.

    ``extras`` maps channel names to per-sample float matrices that ride along
    with the feature matrix through resampling and cross-validation splits.
    """

    x: np.ndarray
    y: np.ndarray
    kind: str
    extras: dict = field(default_factory=dict)
    feature_names: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x, ndim=2))
        object.__setattr__(self, "y", _frozen(self.y, ndim=1))
        if self.x.shape[0] < 1 or self.x.shape[1] < 1:
            raise ValueError("dataset needs at least one row and one feature")
        if self.y.shape[0] != self.x.shape[0]:
            raise ValueError(
                f"target length {self.y.shape[0]} != row count {self.x.shape[0]}"
            )
        if self.kind not in (CLASSIFICATION, REGRESSION):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if not np.all(np.isfinite(self.y)):
            raise ValueError("targets must be finite")
        if self.kind == CLASSIFICATION and not np.array_equal(self.y, np.floor(self.y)):
            raise ValueError("classification targets must be integral")
        channels = {}
        for name, chan in dict(self.extras).items():
            chan = _frozen(chan)
            if chan.ndim == 1:
                chan = _frozen(chan.reshape(-1, 1))
            if chan.ndim != 2 or chan.shape[0] != self.x.shape[0]:
                raise ValueError(f"extras channel {name!r} must have one row per sample")
            channels[str(name)] = chan
        object.__setattr__(self, "extras", channels)
        if self.feature_names is not None:
            names = tuple(str(n) for n in self.feature_names)
            if len(names) != self.x.shape[1]:
                raise ValueError("feature_names length must equal column count")
            object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    def classes(self) -> np.ndarray:
        if self.kind != CLASSIFICATION:
            raise ValueError("classes() is only defined for classification targets")
        return np.unique(self.y)


def load_csv_dataset(path, target_column, kind: str) -> Dataset:
    """Load a comma-separated, headered, UTF-8 numeric CSV into a Dataset.

    ``target_column`` is a header name or a 0-based column index.  Empty
    feature cells become NaN; empty or non-numeric target cells are errors.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        rows = [row for row in reader if row]

    header = [h.strip() for h in header]
    if isinstance(target_column, int) and not isinstance(target_column, bool):
        if not 0 <= target_column < len(header):
            raise ValueError(f"unknown target column index {target_column}")
        target_idx = target_column
    else:
        try:
            target_idx = header.index(str(target_column))
        except ValueError:
            raise ValueError(f"unknown target column {target_column!r}") from None

    if not rows:
        raise ValueError(f"{path}: no data rows")
    n_cols = len(header)
    x = np.empty((len(rows), n_cols - 1), dtype=np.float64)
    y = np.empty(len(rows), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != n_cols:
            raise ValueError(f"{path}: row {i + 2} has {len(row)} cells, expected {n_cols}")
        k = 0
        for j, cell in enumerate(row):
            cell = cell.strip()
            if j == target_idx:
                if cell == "":
                    raise ValueError(f"{path}: empty target cell in row {i + 2}")
                try:
                    y[i] = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric target {cell!r} in row {i + 2}"
                    ) from None
                continue
            if cell == "":
                x[i, k] = math.nan
            else:
                try:
                    x[i, k] = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric cell {cell!r} in row {i + 2}, column {header[j]!r}"
                    ) from None
            k += 1

    names = tuple(h for j, h in enumerate(header) if j != target_idx)
    return Dataset(x=x, y=y, kind=kind, feature_names=names)


def subset(dataset: Dataset, indices) -> Dataset:
    """Row subset/reordering; duplicate indices are allowed (oversampling)."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1 or idx.size == 0:
        raise ValueError("indices must be a non-empty 1-d sequence")
    n = dataset.n_samples
    if np.any(idx < 0) or np.any(idx >= n):
        bad = idx[(idx < 0) | (idx >= n)][0]
        raise IndexError(f"row index {bad} out of range [0, {n})")
    return Dataset(
        x=dataset.x[idx],
        y=dataset.y[idx],
        kind=dataset.kind,
        extras={name: chan[idx] for name, chan in dataset.extras.items()},
        feature_names=dataset.feature_names,
    )


def fingerprint_arrays(x: np.ndarray, y: np.ndarray | None, extras: dict | None) -> bytes:
    """32-byte digest over shapes and raw float bit patterns (NaN-stable)."""
    h = hashlib.sha256()
    x = np.ascontiguousarray(x, dtype=np.float64)
    h.update(b"x")
    h.update(np.asarray(x.shape, dtype=np.int64).tobytes())
    h.update(x.tobytes())
    if y is not None:
        y = np.ascontiguousarray(y, dtype=np.float64)
        h.update(b"y")
        h.update(np.asarray(y.shape, dtype=np.int64).tobytes())
        h.update(y.tobytes())
    for name in sorted(extras or {}):
        chan = np.ascontiguousarray(extras[name], dtype=np.float64)
        raw = name.encode("utf-8")
        h.update(len(raw).to_bytes(4, "little"))
        h.update(raw)
        h.update(np.asarray(chan.shape, dtype=np.int64).tobytes())
        h.update(chan.tobytes())
    return h.digest()


def fingerprint(dataset: Dataset) -> bytes:
    """Deterministic digest of a dataset; order- and bit-sensitive."""
    return fingerprint_arrays(dataset.x, dataset.y, dataset.extras)
