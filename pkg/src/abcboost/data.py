"""Dataset loading and feature binning.

Features are mapped to small integer bin ids once, before training, so that
split finding works on per-bin histograms instead of sorted raw values.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np


class DataFormatError(ValueError):
    """Raised when a dataset file cannot be parsed."""


@dataclass
class RawDataset:
    """Dense real-valued features with labels remapped to ``0..K-1``.

    ``classes[k]`` is the original label value of class ``k``.
    """

    features: np.ndarray
    labels: np.ndarray
    classes: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.classes = np.asarray(self.classes, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d array")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} labels"
            )

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @classmethod
    def from_arrays(cls, X, y, classes=None) -> "RawDataset":
        """Build a dataset from a feature matrix and raw labels.

        Without ``classes`` the observed label values are sorted and numbered
        ``0..K-1``. With ``classes`` the labels are mapped onto that list and
        any value outside it is an error.
        """
        y = np.asarray(y, dtype=np.float64)
        if classes is None:
            classes = np.unique(y)
        labels = map_labels(y, classes)
        return cls(np.asarray(X, dtype=np.float64), labels, classes)


def map_labels(y, classes) -> np.ndarray:
    classes = np.asarray(classes, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    pos = np.searchsorted(classes, y)
    pos = np.clip(pos, 0, max(len(classes) - 1, 0))
    if len(classes) == 0 or np.any(classes[pos] != y):
        unknown = sorted(set(y.tolist()) - set(classes.tolist()))
        raise DataFormatError(f"unknown label value(s): {unknown[:5]}")
    return pos.astype(np.int64)


def _parse_label(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DataFormatError(f"line {lineno}: non-numeric label {token!r}") from None
    if not math.isfinite(value) or value != int(value):
        raise DataFormatError(f"line {lineno}: label {token!r} is not an integer")
    return value


def _read_csv(path, skip_header: bool, has_label: bool):
    rows, labels = [], []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if skip_header and lineno == 1:
                continue
            line = line.strip()
            if not line:
                continue
            tokens = [t.strip() for t in line.split(",")]
            if has_label:
                labels.append(_parse_label(tokens[0], lineno))
                tokens = tokens[1:]
            if width is None:
                width = len(tokens)
            elif len(tokens) != width:
                raise DataFormatError(
                    f"line {lineno}: expected {width} features, found {len(tokens)}"
                )
            try:
                # empty fields are missing values; treated as 0 below
                rows.append([float(t) if t else math.nan for t in tokens])
            except ValueError:
                raise DataFormatError(f"line {lineno}: non-numeric feature value") from None
    X = np.array(rows, dtype=np.float64).reshape(len(rows), width or 0)
    return X, np.array(labels, dtype=np.float64)


def _read_libsvm(path, has_label: bool):
    labels, entries = [], []
    max_index = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if has_label:
                labels.append(_parse_label(tokens[0], lineno))
                tokens = tokens[1:]
            row = []
            for tok in tokens:
                idx, sep, val = tok.partition(":")
                try:
                    j = int(idx)
                    v = float(val)
                except ValueError:
                    raise DataFormatError(f"line {lineno}: malformed entry {tok!r}") from None
                if not sep or j < 1:
                    raise DataFormatError(f"line {lineno}: malformed entry {tok!r}")
                row.append((j - 1, v))
                max_index = max(max_index, j)
            entries.append(row)
    X = np.zeros((len(entries), max_index), dtype=np.float64)
    for i, row in enumerate(entries):
        for j, v in row:
            X[i, j] = v
    return X, np.array(labels, dtype=np.float64)


def load_dataset(
    path,
    format: str = "csv",
    *,
    skip_header: bool = False,
    classes=None,
    n_features: int | None = None,
    has_label: bool = True,
) -> RawDataset:
    """Read a labeled dataset from ``path``.

    Parameters
    ----------
    path : str or PathLike
        CSV file (label in the first column) or LIBSVM file
        (``label idx:val ...`` with 1-based indices).
    format : {"csv", "libsvm"}
    skip_header : bool
        Skip the first line of a CSV file.
    classes : array-like, optional
        Known label values, e.g. from a trained model. Labels outside this
        list raise :class:`DataFormatError`.
    n_features : int, optional
        Expected feature count. Sparse LIBSVM rows are padded with zeros up
        to this width; a wider file is an error.
    has_label : bool
        Whether rows carry a label. Unlabeled rows get label 0.

    Missing CSV fields and absent LIBSVM entries become 0.
    """
    if format not in ("csv", "libsvm"):
        raise ValueError(f"unknown format {format!r}")
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    if format == "csv":
        X, y = _read_csv(path, skip_header, has_label)
    else:
        X, y = _read_libsvm(path, has_label)
    if X.shape[0] == 0:
        raise DataFormatError(f"{path}: no data rows")
    X = np.nan_to_num(X, nan=0.0)

    if n_features is not None:
        if X.shape[1] > n_features:
            raise DataFormatError(
                f"{path}: {X.shape[1]} features, expected {n_features}"
            )
        if X.shape[1] < n_features:
            if format == "csv":
                raise DataFormatError(
                    f"{path}: {X.shape[1]} features, expected {n_features}"
                )
            X = np.hstack([X, np.zeros((X.shape[0], n_features - X.shape[1]))])

    if not has_label:
        if classes is None:
            classes = [0.0]
        return RawDataset(X, np.zeros(X.shape[0], dtype=np.int64), classes)
    return RawDataset.from_arrays(X, y, classes)


@dataclass
class BinMap:
    """Per-feature inclusive upper bin edges.

    A value ``v`` of feature ``j`` falls in the first bin whose edge is
    ``>= v``; values above the last edge land in the last bin.
    """

    boundaries: list
    max_bins: int = 256

    def __post_init__(self):
        self.boundaries = [np.asarray(b, dtype=np.float64) for b in self.boundaries]

    @property
    def n_features(self) -> int:
        return len(self.boundaries)

    @property
    def n_bins(self) -> np.ndarray:
        return np.array([len(b) for b in self.boundaries], dtype=np.int64)

    def to_dict(self) -> dict:
        return {
            "max_bins": int(self.max_bins),
            "boundaries": [[float(v) for v in b] for b in self.boundaries],
        }

    @classmethod
    def from_dict(cls, d) -> "BinMap":
        return cls([np.array(b, dtype=np.float64) for b in d["boundaries"]], int(d["max_bins"]))


def _feature_edges(values: np.ndarray, max_bins: int) -> np.ndarray:
    distinct = np.unique(values)
    if len(distinct) <= max_bins:
        return distinct
    # rank-based equal-frequency edges; duplicates collapse, so a heavily
    # tied feature may end up with fewer than max_bins bins
    ordered = np.sort(values)
    n = len(ordered)
    ranks = [math.ceil(j * n / max_bins) - 1 for j in range(1, max_bins + 1)]
    return np.unique(ordered[ranks])


def fit_bins(data, max_bins: int = 256) -> BinMap:
    """Choose bin edges for every feature of ``data``.

    ``data`` is a :class:`RawDataset` or a 2-d array. A feature with at most
    ``max_bins`` distinct values gets one bin per value; otherwise bins hold
    roughly equal numbers of training samples.
    """
    if max_bins < 2:
        raise ValueError("max_bins must be at least 2")
    X = data.features if isinstance(data, RawDataset) else np.asarray(data, dtype=np.float64)
    return BinMap([_feature_edges(X[:, j], max_bins) for j in range(X.shape[1])], max_bins)


@dataclass
class BinnedDataset:
    """Binned features ``codes[i, j]`` (sample ``i``, feature ``j``) plus labels."""

    codes: np.ndarray
    labels: np.ndarray
    n_classes: int
    n_bins: np.ndarray
    class_counts: np.ndarray = field(init=False)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.class_counts = np.bincount(self.labels, minlength=self.n_classes)

    @property
    def n_samples(self) -> int:
        return self.codes.shape[0]

    @property
    def n_features(self) -> int:
        return self.codes.shape[1]

    def onehot(self) -> np.ndarray:
        r = np.zeros((self.n_samples, self.n_classes))
        r[np.arange(self.n_samples), self.labels] = 1.0
        return r


def bin_matrix(X: np.ndarray, bins: BinMap) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != bins.n_features:
        raise ValueError(
            f"expected {bins.n_features} features, got {X.shape[1] if X.ndim == 2 else X.shape}"
        )
    dtype = np.uint8 if bins.n_bins.max(initial=1) <= 256 else np.uint16
    codes = np.empty(X.shape, dtype=dtype)
    for j, edges in enumerate(bins.boundaries):
        idx = np.searchsorted(edges, X[:, j], side="left")
        codes[:, j] = np.minimum(idx, len(edges) - 1)
    return codes


def apply_bins(data: RawDataset, bins: BinMap, n_classes: int | None = None) -> BinnedDataset:
    """Map every feature value of ``data`` to its bin id under ``bins``."""
    codes = bin_matrix(data.features, bins)
    K = data.n_classes if n_classes is None else n_classes
    return BinnedDataset(codes, data.labels, K, bins.n_bins)
