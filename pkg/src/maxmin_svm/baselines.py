"""Classical multi-class baselines: OvR, OvO, Crammer-Singer,
Weston-Watkins, and multinomial logistic regression.

All trainers share the same full-batch Adam loop and the same smoothed
hinge as the pairwise-margin trainer, so differences in behavior come
from the objectives alone:

- binary SVM:      sum_i g(1 - y_i (w@x_i + b)) + lam * ||w||^2
- Crammer-Singer:  sum_i max_{k != y_i} g(1 - (s_y - s_k))
                     + lam * sum_k ||w_k||^2 + epsilon * ||b||^2
- Weston-Watkins:  the same but summed over k; trained by delegating to
                   the pairwise-difference objective at p=2 with
                   lam/c, which shares its minimizer (up to a common
                   column shift pinned by the epsilon ridge)
- multinomial LR:  softmax log loss + lam * sum_k ||w_k||^2
                     + epsilon * ||b||^2

Biases are never ridge-penalized beyond the small epsilon term that makes
optima unique.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .model import LinearModel
from .objective import (
    LossBreakdown,
    ObjectiveConfig,
    softmax_value_and_grad,
)
from .optim import TrainConfig, minimize_adam, train


@dataclass(frozen=True)
class BinaryModel:
    """A single separating hyperplane ``w @ x + b``.

    The first class of its training pair is the positive side; a score of
    exactly zero predicts the positive class.
    """

    w: np.ndarray
    b: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64).copy()
        if w.ndim != 1:
            raise ValueError(f"w must be 1-D, got ndim={w.ndim}")
        if not (np.all(np.isfinite(w)) and np.isfinite(self.b)):
            raise ValueError("binary model parameters must be finite")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))

    def scores(self, X):
        return np.asarray(X, dtype=np.float64) @ self.w + self.b


@dataclass(frozen=True)
class OvRModel:
    """One binary model per class, class ``k`` positive against the rest."""

    members: tuple
    class_names: tuple = None

    def __post_init__(self):
        members = tuple(self.members)
        if len(members) < 2:
            raise ValueError("an OvR model needs at least 2 members")
        names = self.class_names
        if names is None:
            names = tuple(str(k) for k in range(len(members)))
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "class_names", tuple(str(s) for s in names))

    @property
    def n_classes(self):
        return len(self.members)


@dataclass(frozen=True)
class OvOModel:
    """One binary model per unordered class pair ``(k, l)``, ``k`` positive."""

    n_classes: int
    members: tuple  # ((k, l, BinaryModel), ...) in k-major order

    def __post_init__(self):
        c = int(self.n_classes)
        members = tuple(self.members)
        expect = c * (c - 1) // 2
        if len(members) != expect:
            raise ValueError(
                f"an OvO model over {c} classes needs {expect} members, "
                f"got {len(members)}"
            )
        object.__setattr__(self, "n_classes", c)
        object.__setattr__(self, "members", members)


def _binary_value_and_grad(params, X, s, lam, delta):
    w, b = params
    margins = 1.0 - s * (X @ w + b[0])
    R = np.sqrt(margins * margins + delta * delta)
    terms = 0.5 * (margins + R)
    coef = (terms / R) * s
    data = float(terms.sum())
    reg = float(w @ w)
    gw = -(X.T @ coef) + (2.0 * lam) * w
    gb = np.array([-coef.sum()])
    bd = LossBreakdown(data, reg, 0.0, data + lam * reg)
    return bd, (gw, gb)


def train_binary_svm(data, lam=1e-3, delta=1e-3, cfg_train=None):
    """Train a smoothed-hinge binary SVM on a 2-class dataset.

    Class 0 is mapped to the positive side and class 1 to the negative
    side.  The bias is unpenalized.
    """
    cfg_train = cfg_train if cfg_train is not None else TrainConfig()
    if not delta > 0:
        raise ValueError(f"delta must be positive for training, got {delta}")
    present = np.unique(data.labels)
    if data.n_classes != 2:
        raise ValueError(
            f"binary SVM needs exactly 2 classes, got {data.n_classes}"
        )
    if present.size < 2:
        raise ValueError(
            f"binary SVM needs samples from both classes, got only class "
            f"{int(present[0]) if present.size else '<none>'}"
        )
    X = data.features
    s = np.where(data.labels == 0, 1.0, -1.0)
    rng = np.random.default_rng(cfg_train.seed)
    w = rng.normal(0.0, 1e-2, size=data.n_features)
    b = rng.normal(0.0, 1e-2, size=1)

    def fn(params):
        return _binary_value_and_grad(params, X, s, lam, delta)

    (w, b), _ = minimize_adam(fn, (w, b), cfg_train)
    return BinaryModel(w=w, b=float(b[0]))


def train_ovr(data, lam=1e-3, delta=1e-3, cfg_train=None):
    """Train one binary SVM per class (that class positive, rest negative)."""
    members = []
    for k in range(data.n_classes):
        sub = Dataset(
            data.features,
            np.where(data.labels == k, 0, 1),
            class_names=(data.class_names[k], "rest"),
        )
        members.append(train_binary_svm(sub, lam=lam, delta=delta,
                                        cfg_train=cfg_train))
    return OvRModel(members=tuple(members), class_names=data.class_names)


def predict_ovr(model, X):
    """Argmax over the per-class scores; ties go to the lowest index."""
    S = np.column_stack([m.scores(X) for m in model.members])
    return np.argmax(S, axis=1)


def train_ovo(data, lam=1e-3, delta=1e-3, cfg_train=None, lam_overrides=None):
    """Train one binary SVM per class pair on that pair's samples.

    ``lam_overrides`` optionally maps a ``(k, l)`` pair to a
    pair-specific regularization strength; all other pairs share ``lam``.
    """
    lam_overrides = lam_overrides or {}
    members = []
    y = data.labels
    for k in range(data.n_classes):
        for l in range(k + 1, data.n_classes):
            mask = (y == k) | (y == l)
            if not (np.any(y == k) and np.any(y == l)):
                raise ValueError(
                    f"empty pair subproblem: classes ({k}, {l}) need at "
                    f"least one sample each"
                )
            sub = Dataset(
                data.features[mask],
                np.where(y[mask] == k, 0, 1),
                class_names=(data.class_names[k], data.class_names[l]),
            )
            member = train_binary_svm(
                sub,
                lam=lam_overrides.get((k, l), lam),
                delta=delta,
                cfg_train=cfg_train,
            )
            members.append((k, l, member))
    return OvOModel(n_classes=data.n_classes, members=tuple(members))


def predict_ovo(model, X):
    """Majority vote over all pairwise decisions.

    A pairwise score of exactly zero votes for the lower-indexed class of
    the pair; vote ties also resolve to the lowest class index.
    """
    X = np.asarray(X, dtype=np.float64)
    votes = np.zeros((X.shape[0], model.n_classes), dtype=np.int64)
    for k, l, member in model.members:
        s = member.scores(X)
        votes[s >= 0.0, k] += 1
        votes[s < 0.0, l] += 1
    return np.argmax(votes, axis=1)


def crammer_value_and_grad(W, b, X, y, lam, delta, epsilon):
    """Value and gradients of the max-violation multi-class objective.

    Only the most violating class of each sample carries gradient; ties
    pick the first index, a subgradient choice.
    """
    n = X.shape[0]
    S = X @ W + b
    rows = np.arange(n)
    G = 1.0 - (S[rows, y][:, None] - S)
    R = np.sqrt(G * G + delta * delta)
    terms = 0.5 * (G + R)
    masked = terms.copy()
    masked[rows, y] = -np.inf
    kstar = np.argmax(masked, axis=1)
    data = float(masked[rows, kstar].sum())
    coef = terms[rows, kstar] / R[rows, kstar]
    B = np.zeros_like(S)
    # kstar never equals y (the true class is masked out), so these two
    # fancy assignments touch disjoint entries.
    B[rows, kstar] = coef
    B[rows, y] = -coef
    reg = float((W * W).sum())
    epsq = float(b @ b)
    GW = X.T @ B + (2.0 * lam) * W
    gb = B.sum(axis=0) + (2.0 * epsilon) * b
    bd = LossBreakdown(data, reg, epsq, data + lam * reg + epsilon * epsq)
    return bd, (GW, gb)


def train_crammer(data, lam=1e-3, delta=1e-3, epsilon=1e-6, cfg_train=None,
                  return_trace=False):
    """Train the max-violation (most confusing class) multi-class SVM."""
    cfg_train = cfg_train if cfg_train is not None else TrainConfig()
    if not delta > 0:
        raise ValueError(f"delta must be positive for training, got {delta}")
    X = data.features
    y = data.labels
    rng = np.random.default_rng(cfg_train.seed)
    W = rng.normal(0.0, 1e-2, size=(data.n_features, data.n_classes))
    b = rng.normal(0.0, 1e-2, size=data.n_classes)

    def fn(params):
        return crammer_value_and_grad(params[0], params[1], X, y, lam,
                                      delta, epsilon)

    (W, b), trace = minimize_adam(fn, (W, b), cfg_train)
    # The data term sees only score differences, so it is invariant under
    # common column and bias translations while both ridges strictly
    # shrink; removing the means is an exact descent step.
    W -= W.mean(axis=1, keepdims=True)
    b -= b.mean()
    model = LinearModel(W, b, class_names=data.class_names)
    return (model, trace) if return_trace else model


def train_ww(data, lam=1e-3, delta=1e-3, epsilon=1e-6, cfg_train=None,
             return_trace=False):
    """Train the sum-of-violations multi-class SVM.

    Delegates to the pairwise-difference trainer at ``p=2`` with strength
    ``lam / c``: at that setting ``(lam/c) * sum_{k<l} ||w_k - w_l||^2``
    equals ``lam * sum_k ||w_k - mean||^2``, which matches the plain ridge
    once the epsilon term pins the column mean at zero.
    """
    cfg_obj = ObjectiveConfig(
        loss="smoothed_hinge",
        reg_norm="l2",
        p=2.0,
        lam=lam / data.n_classes,
        epsilon=epsilon,
        delta=delta,
    )
    model, trace = train(data, cfg_obj, cfg_train)
    return (model, trace) if return_trace else model


def crammer_persample_losses(W, b, X, y, delta):
    """Per-sample max-violation data losses (no regularizers)."""
    n = X.shape[0]
    S = np.asarray(X, dtype=np.float64) @ W + b
    rows = np.arange(n)
    G = 1.0 - (S[rows, np.asarray(y)][:, None] - S)
    terms = 0.5 * (G + np.sqrt(G * G + delta * delta))
    terms[rows, y] = -np.inf
    return terms.max(axis=1)


def ww_persample_losses(W, b, X, y, delta):
    """Per-sample sum-of-violations data losses (no regularizers)."""
    n = X.shape[0]
    S = np.asarray(X, dtype=np.float64) @ W + b
    rows = np.arange(n)
    G = 1.0 - (S[rows, np.asarray(y)][:, None] - S)
    terms = 0.5 * (G + np.sqrt(G * G + delta * delta))
    terms[rows, y] = 0.0
    return terms.sum(axis=1)


def train_multilr(data, lam=1e-3, epsilon=1e-6, cfg_train=None,
                  return_trace=False):
    """Train multinomial logistic regression with a ridge on the weights."""
    cfg_train = cfg_train if cfg_train is not None else TrainConfig()
    X = data.features
    y = data.labels
    rng = np.random.default_rng(cfg_train.seed)
    W = rng.normal(0.0, 1e-2, size=(data.n_features, data.n_classes))
    b = rng.normal(0.0, 1e-2, size=data.n_classes)

    def fn(params):
        bd, GW, gb = softmax_value_and_grad(params[0], params[1], X, y,
                                            lam, epsilon)
        return bd, (GW, gb)

    (W, b), trace = minimize_adam(fn, (W, b), cfg_train)
    # Softmax probabilities see only score differences; as in the other
    # trainers, centering is an exact descent step on the ridge terms.
    W -= W.mean(axis=1, keepdims=True)
    b -= b.mean()
    model = LinearModel(W, b, class_names=data.class_names)
    return (model, trace) if return_trace else model
