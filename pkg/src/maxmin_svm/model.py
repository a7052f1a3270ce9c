"""Linear multi-class model: parameters, decision rule, margins, metrics.

A model is a weight matrix ``W`` of shape ``(d, c)`` with one column per
class and a bias vector ``b`` of shape ``(c,)``.  A sample ``x`` is
assigned to the class with the largest score ``w_k @ x + b_k``; the
geometric margin between classes ``k`` and ``l`` is ``2 / ||w_k - w_l||``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateMarginError(ValueError):
    """Raised when a margin is requested for identical weight columns."""


@dataclass(frozen=True)
class LinearModel:
    """Immutable ``(W, b)`` parameter container.

    Parameters
    ----------
    W : ndarray of shape (d, c)
        One weight column per class; finite entries only.
    b : ndarray of shape (c,)
        Bias per class.
    class_names : tuple of str, optional
        Name per class index; defaults to stringified indices.
    """

    W: np.ndarray
    b: np.ndarray
    class_names: tuple = None

    def __post_init__(self):
        W = np.asarray(self.W, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if W.ndim != 2:
            raise ValueError(f"W must be 2-D (d, c), got ndim={W.ndim}")
        if W.shape[1] < 2:
            raise ValueError(f"W needs at least 2 class columns, got {W.shape[1]}")
        if b.shape != (W.shape[1],):
            raise ValueError(
                f"b must have shape ({W.shape[1]},) to match W, got {b.shape}"
            )
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise ValueError("model parameters must be finite")
        names = self.class_names
        if names is None:
            names = tuple(str(k) for k in range(W.shape[1]))
        else:
            names = tuple(str(s) for s in names)
            if len(names) != W.shape[1]:
                raise ValueError(
                    f"{len(names)} class names for {W.shape[1]} classes"
                )
        W = W.copy()
        b = b.copy()
        W.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "class_names", names)

    @property
    def n_features(self):
        return self.W.shape[0]

    @property
    def n_classes(self):
        return self.W.shape[1]


def decision_scores(model, X):
    """Class scores ``w_k @ x + b_k``.

    Accepts a single length-d vector (returns shape ``(c,)``) or an
    ``(n, d)`` matrix (returns ``(n, c)``).
    """
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"expected {model.n_features} features, got array of shape "
            f"{np.asarray(X).shape}"
        )
    S = X @ model.W + model.b
    return S[0] if single else S


def predict(model, X):
    """Predicted class indices; score ties go to the lowest class index."""
    S = decision_scores(model, X)
    return int(np.argmax(S)) if S.ndim == 1 else np.argmax(S, axis=1)


def pairwise_margin(model, k, l):
    """Geometric margin ``2 / ||w_k - w_l||_2`` between two classes."""
    c = model.n_classes
    if not (0 <= k < c and 0 <= l < c):
        raise ValueError(f"class indices must lie in [0, {c}), got ({k}, {l})")
    if k == l:
        raise ValueError(f"need two distinct classes, got ({k}, {l})")
    norm = float(np.linalg.norm(model.W[:, k] - model.W[:, l]))
    if norm == 0.0:
        raise DegenerateMarginError(
            f"classes {k} and {l} have identical weight columns; their "
            f"margin is unbounded (degenerate pair)"
        )
    return 2.0 / norm


@dataclass(frozen=True)
class MarginReport:
    """All pairwise margins of a model.

    ``pair_margins`` lists ``(k, l, margin)`` for every ``k < l``;
    ``argmin_pair`` is the pair attaining ``min_margin``.
    """

    pair_margins: tuple
    min_margin: float
    argmin_pair: tuple

    def as_dict(self):
        return {
            "pair_margins": [
                {"k": k, "l": l, "margin": m} for k, l, m in self.pair_margins
            ],
            "min_margin": self.min_margin,
            "argmin_pair": list(self.argmin_pair),
        }


def margin_report(model):
    """Margins for every class pair, with the minimum and its argmin pair."""
    c = model.n_classes
    pairs = []
    for k in range(c):
        for l in range(k + 1, c):
            pairs.append((k, l, pairwise_margin(model, k, l)))
    min_k, min_l, min_m = min(pairs, key=lambda t: t[2])
    return MarginReport(
        pair_margins=tuple(pairs),
        min_margin=min_m,
        argmin_pair=(min_k, min_l),
    )


@dataclass(frozen=True)
class EvalReport:
    """Accuracy and confusion counts on a labeled set.

    ``confusion[i][j]`` counts samples of true class ``i`` predicted as
    ``j``; the trace over ``n_samples`` equals ``accuracy``.
    """

    accuracy: float
    confusion: np.ndarray
    n_samples: int

    def as_dict(self):
        return {
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "n_samples": self.n_samples,
        }


def evaluate(model, X, y=None):
    """Accuracy and confusion matrix of ``model`` on a labeled set.

    ``X`` may be a :class:`~maxmin_svm.data.Dataset` (then ``y`` is
    omitted) or a feature matrix with labels ``y``.
    """
    if y is None:
        y = X.labels
        X = X.features
    y = np.asarray(y, dtype=np.int64)
    c = model.n_classes
    if y.size and (y.min() < 0 or y.max() >= c):
        raise ValueError(f"labels must lie in [0, {c})")
    pred = predict(model, X)
    n = y.shape[0]
    confusion = np.zeros((c, c), dtype=np.int64)
    np.add.at(confusion, (y, pred), 1)
    accuracy = float((pred == y).mean()) if n else 0.0
    return EvalReport(accuracy=accuracy, confusion=confusion, n_samples=n)
