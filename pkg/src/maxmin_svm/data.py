"""Dataset ingestion, standardization, and deterministic stratified folds."""

from __future__ import annotations

import csv
import importlib.resources
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted


class DataError(ValueError):
    """Raised for malformed dataset files or invalid dataset operations."""


def _as_feature_matrix(features):
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"features must be a 2-D array, got ndim={X.ndim}")
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise DataError(
            f"features contain a non-finite value at row {bad[0]}, column {bad[1]}"
        )
    return X


@dataclass(frozen=True)
class Dataset:
    """Immutable labeled feature matrix.

    Parameters
    ----------
    features : ndarray of shape (n, d)
        Finite float64 feature rows.
    labels : ndarray of shape (n,)
        Integer class indices in ``[0, n_classes)``.
    class_names : tuple of str, optional
        Human-readable name per class index.  When omitted, stringified
        indices are used.
    n_classes : int, optional
        Declared class count.  Defaults to ``len(class_names)`` when names
        are given, otherwise ``max(labels) + 1``.
    """

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple = None
    n_classes: int = None

    def __post_init__(self):
        X = _as_feature_matrix(self.features)
        y = np.asarray(self.labels, dtype=np.int64)
        if y.ndim != 1:
            raise DataError(f"labels must be a 1-D array, got ndim={y.ndim}")
        if y.shape[0] != X.shape[0]:
            raise DataError(
                f"features have {X.shape[0]} rows but labels have {y.shape[0]}"
            )
        names = self.class_names
        if names is not None:
            names = tuple(str(s) for s in names)
        if self.n_classes is not None:
            c = int(self.n_classes)
            if names is not None and len(names) != c:
                raise DataError(
                    f"n_classes={c} but {len(names)} class names were given"
                )
        elif names is not None:
            c = len(names)
        else:
            c = int(y.max()) + 1 if y.size else 0
        if c < 2:
            raise DataError(f"a dataset needs at least 2 classes, got {c}")
        if y.size and (y.min() < 0 or y.max() >= c):
            bad = int(np.argmax((y < 0) | (y >= c)))
            raise DataError(
                f"label {y[bad]} at row {bad} is outside [0, {c})"
            )
        if names is None:
            names = tuple(str(k) for k in range(c))
        X = X.copy()
        y = y.copy()
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "n_classes", c)

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def class_counts(self):
        """Number of samples per class index, shape (n_classes,)."""
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, indices):
        """New Dataset restricted to ``indices``, preserving class metadata."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.features[idx],
            self.labels[idx],
            class_names=self.class_names,
            n_classes=self.n_classes,
        )


def _encode_labels(tokens):
    # First-appearance encoding: the first distinct token becomes class 0.
    order = {}
    encoded = np.empty(len(tokens), dtype=np.int64)
    for i, tok in enumerate(tokens):
        if tok not in order:
            order[tok] = len(order)
        encoded[i] = order[tok]
    return encoded, tuple(order)


def load_csv(path, label_column=-1, header=True):
    """Load a delimited text file into a Dataset.

    Parameters
    ----------
    path : str or Path
        File to read.
    label_column : int or str, default=-1
        Column holding class labels, as a position (negative allowed) or,
        when ``header`` is true, a column name.
    header : bool, default=True
        Whether the first row holds column names.

    Returns
    -------
    Dataset
        Features in file column order with the label column removed; labels
        encoded by first appearance; class names set to the label tokens.

    Raises
    ------
    DataError
        On ragged rows, unparseable or non-finite feature cells (the message
        names the row and column), a missing label column, or fewer than two
        distinct label values.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise DataError(f"{path}: file contains no rows")
    if header:
        columns = [s.strip() for s in rows[0]]
        body = rows[1:]
        first_line = 2
    else:
        columns = None
        body = rows
        first_line = 1
    if not body:
        raise DataError(f"{path}: file contains no data rows")
    width = len(body[0]) if columns is None else len(columns)
    for i, row in enumerate(body):
        if len(row) != width:
            raise DataError(
                f"{path}: row at line {first_line + i} has {len(row)} cells, "
                f"expected {width}"
            )
    if isinstance(label_column, str):
        if columns is None:
            raise DataError(
                "label_column given by name requires a header row"
            )
        if label_column not in columns:
            raise DataError(
                f"{path}: no column named {label_column!r} in header"
            )
        label_idx = columns.index(label_column)
    else:
        label_idx = int(label_column)
        if not -width <= label_idx < width:
            raise DataError(
                f"{path}: label_column {label_column} out of range for "
                f"{width} columns"
            )
        label_idx %= width
    feat_cols = [j for j in range(width) if j != label_idx]
    n = len(body)
    X = np.empty((n, len(feat_cols)), dtype=np.float64)
    for i, row in enumerate(body):
        for jj, j in enumerate(feat_cols):
            cell = row[j].strip()
            colname = columns[j] if columns else str(j)
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: cannot parse {cell!r} at line {first_line + i}, "
                    f"column {colname!r}"
                ) from None
            if not np.isfinite(value):
                raise DataError(
                    f"{path}: non-finite value {cell!r} at line "
                    f"{first_line + i}, column {colname!r}"
                )
            X[i, jj] = value
    tokens = [row[label_idx].strip() for row in body]
    y, names = _encode_labels(tokens)
    if len(names) < 2:
        raise DataError(
            f"{path}: label column has fewer than 2 distinct values"
        )
    return Dataset(X, y, class_names=names)


def load_feature_csv(path, header=True):
    """Load a CSV with no label column into a float feature matrix.

    Parsing rules match :func:`load_csv`: an optional header row, ragged
    rows rejected, and unparseable or non-finite cells reported with the
    offending line and column named.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise DataError(f"{path}: file contains no rows")
    if header:
        columns = [s.strip() for s in rows[0]]
        body = rows[1:]
        first_line = 2
    else:
        columns = None
        body = rows
        first_line = 1
    if not body:
        raise DataError(f"{path}: file contains no data rows")
    width = len(body[0]) if columns is None else len(columns)
    n = len(body)
    X = np.empty((n, width), dtype=np.float64)
    for i, row in enumerate(body):
        if len(row) != width:
            raise DataError(
                f"{path}: row at line {first_line + i} has {len(row)} cells, "
                f"expected {width}"
            )
        for j in range(width):
            cell = row[j].strip()
            colname = columns[j] if columns else str(j)
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: cannot parse {cell!r} at line {first_line + i}, "
                    f"column {colname!r}"
                ) from None
            if not np.isfinite(value):
                raise DataError(
                    f"{path}: non-finite value {cell!r} at line "
                    f"{first_line + i}, column {colname!r}"
                )
            X[i, j] = value
    return X


def save_csv(dataset, path):
    """Write a Dataset as CSV with an ``f0..f{d-1},label`` header.

    Floats are written with ``repr`` so a reload reproduces the feature
    matrix bit-exactly.  Labels are written as class-name tokens; reloading
    reproduces the integer labels whenever ``class_names`` follows the
    first-appearance order of the rows, which holds for every dataset
    produced by :func:`load_csv` or :func:`load_libsvm`.
    """
    X = dataset.features
    names = dataset.class_names
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j}" for j in range(dataset.n_features)] + ["label"])
        for i in range(dataset.n_samples):
            writer.writerow(
                [repr(float(v)) for v in X[i]] + [names[dataset.labels[i]]]
            )


def load_libsvm(path):
    """Load a sparse ``label idx:val ...`` file into a dense Dataset.

    Feature indices are 1-based and must be strictly ascending within each
    line; omitted indices are zero.  The feature count is the maximum index
    seen anywhere in the file.  Labels are encoded by first appearance.

    Raises
    ------
    DataError
        On an empty file (``no samples``), duplicate or descending indices
        (``indices not ascending`` with the line number), or tokens that do
        not parse.
    """
    tokens_per_line = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.split()
            if not parts:
                continue
            pairs = []
            prev = 0
            for tok in parts[1:]:
                idx_s, _, val_s = tok.partition(":")
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise DataError(
                        f"{path}: cannot parse feature token {tok!r} at line "
                        f"{lineno}"
                    ) from None
                if idx <= prev:
                    raise DataError(
                        f"{path}: indices not ascending at line {lineno}"
                    )
                if not np.isfinite(val):
                    raise DataError(
                        f"{path}: non-finite value in token {tok!r} at line "
                        f"{lineno}"
                    )
                prev = idx
                pairs.append((idx, val))
            tokens_per_line.append((lineno, parts[0], pairs))
    if not tokens_per_line:
        raise DataError(f"{path}: no samples")
    d = max((idx for _, _, pairs in tokens_per_line for idx, _ in pairs), default=0)
    n = len(tokens_per_line)
    X = np.zeros((n, d), dtype=np.float64)
    label_tokens = []
    for i, (_, label_tok, pairs) in enumerate(tokens_per_line):
        label_tokens.append(label_tok)
        for idx, val in pairs:
            X[i, idx - 1] = val
    y, names = _encode_labels(label_tokens)
    if len(names) < 2:
        raise DataError(f"{path}: label column has fewer than 2 distinct values")
    return Dataset(X, y, class_names=names)


class Standardizer(BaseEstimator, TransformerMixin):
    """Per-feature affine scaler to zero mean and unit variance.

    Features with zero variance are passed through unscaled (their scale is
    treated as 1), so constant columns survive a round trip unchanged.

    Attributes
    ----------
    mean_ : ndarray of shape (d,)
        Per-feature training mean.
    scale_ : ndarray of shape (d,)
        Per-feature training standard deviation, with zeros replaced by 1.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        # Detect constant columns by max == min rather than std == 0: the
        # accumulated mean of identical values can be an ulp off, leaving
        # a denormal-sized std that would blow the column up instead of
        # zeroing it.
        constant = X.max(axis=0) == X.min(axis=0)
        self.mean_ = np.where(constant, X[0], self.mean_)
        scale[constant] = 1.0
        scale[scale == 0.0] = 1.0
        self.scale_ = scale
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DataError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return (X - self.mean_) / self.scale_

    def inverse_transform(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DataError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return X * self.scale_ + self.mean_

    def transform_dataset(self, dataset):
        """Standardized copy of ``dataset`` with labels and names preserved."""
        return Dataset(
            self.transform(dataset.features),
            dataset.labels,
            class_names=dataset.class_names,
            n_classes=dataset.n_classes,
        )


def fit_standardizer(dataset):
    """Fit a :class:`Standardizer` on a dataset's features."""
    return Standardizer().fit(dataset.features)


@dataclass(frozen=True)
class FoldPlan:
    """Deterministic assignment of samples to cross-validation folds.

    ``assignment[i]`` is the fold index of sample ``i``.  Identical
    ``(labels, k, seed)`` inputs always produce an identical assignment.
    """

    k: int
    seed: int
    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).copy()
        a.flags.writeable = False
        object.__setattr__(self, "assignment", a)

    def fold_sizes(self):
        return np.bincount(self.assignment, minlength=self.k)

    def test_indices(self, fold):
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.assignment != fold)

    def iter_folds(self):
        """Yield ``(fold, train_indices, test_indices)`` in fold order."""
        for f in range(self.k):
            yield f, self.train_indices(f), self.test_indices(f)


def make_folds(labels, k, seed=0):
    """Stratified k-fold assignment with balanced fold sizes.

    Each class's samples are shuffled with a seed derived from ``seed`` and
    split as evenly as possible across folds; leftover samples go to the
    currently smallest folds.  Overall fold sizes therefore differ by at
    most one, and so do the per-class counts within each class.

    Parameters
    ----------
    labels : array-like of int or Dataset
        Class index per sample.
    k : int
        Number of folds, at least 2 and at most ``n``.
    seed : int, default=0
        Shuffling seed.
    """
    if isinstance(labels, Dataset):
        labels = labels.labels
    y = np.asarray(labels, dtype=np.int64)
    n = y.shape[0]
    if k < 2:
        raise DataError(f"need at least 2 folds, got {k}")
    if k > n:
        raise DataError(f"cannot make {k} folds from {n} samples")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=np.int64)
    totals = np.zeros(k, dtype=np.int64)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.shape[0])]
        base, rem = divmod(idx.shape[0], k)
        counts = np.full(k, base, dtype=np.int64)
        # Extras go to the currently smallest folds, lowest index first,
        # which keeps overall fold sizes within one of each other.
        if rem:
            order = np.argsort(totals, kind="stable")
            counts[order[:rem]] += 1
        pos = 0
        for f in range(k):
            assignment[idx[pos:pos + counts[f]]] = f
            pos += counts[f]
        totals += counts
    return FoldPlan(k=int(k), seed=int(seed), assignment=assignment)


_BUNDLED_DOC = {
    "iris": "150 iris flowers, 4 measurements, 3 species",
    "glass": "214 glass fragments, 9 refractive/chemical features, 6 types",
    "vehicle": "846 vehicle silhouettes, 18 shape features, 4 classes",
    "dermatology": "358 dermatology cases, 34 features, 6 diagnoses",
}

BUNDLED_DATASETS = tuple(_BUNDLED_DOC)


def list_bundled():
    """Names of bundled datasets that are actually present on disk."""
    root = importlib.resources.files("maxmin_svm") / "datasets"
    present = []
    for name in _BUNDLED_DOC:
        if (root / f"{name}.csv").is_file():
            present.append(name)
    return present


def load_bundled(name):
    """Load a dataset bundled with the package by name.

    Raises
    ------
    DataError
        If the name is unknown, or known but its file is not present (the
        message points at the fetch script that downloads it).
    """
    if name not in _BUNDLED_DOC:
        known = ", ".join(sorted(_BUNDLED_DOC))
        raise DataError(f"unknown bundled dataset {name!r}; known: {known}")
    path = importlib.resources.files("maxmin_svm") / "datasets" / f"{name}.csv"
    if not path.is_file():
        raise DataError(
            f"bundled dataset {name!r} ({_BUNDLED_DOC[name]}) is not present; "
            f"run scripts/fetch_datasets.py on a network-enabled machine to "
            f"download it"
        )
    return load_csv(str(path), label_column="label", header=True)
