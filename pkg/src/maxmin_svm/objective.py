"""Losses, regularizers, and gradients for max-min-margin linear classifiers.

The central objective, for weights ``W`` of shape ``(d, c)`` and biases
``b`` of shape ``(c,)``, is

    sum_i sum_{k != y_i} loss(score_{y_i} - score_k)
      + lam * sum_{k<l} ||w_k - w_l||^p
      + epsilon * (||W||_F^2 + ||b||^2)

where ``loss`` is either a smoothed hinge on ``1 - (score_y - score_k)``
or a pairwise logistic loss, and the pairwise-difference regularizer uses
the l2 or l1 norm.  Shrinking the pairwise differences is what drives the
minimum pairwise margin ``2 / ||w_k - w_l||`` up; the tiny ``epsilon``
ridge pins the otherwise free common translation of the columns at zero.

Two independent evaluation routes are provided for the data term: the
per-sample form above (:func:`persample_objective`, also the training
path) and a class-pair form (:func:`pairwise_objective`).  They are equal
up to rounding, which the verification suite checks.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit, logsumexp

_LOSSES = ("smoothed_hinge", "logistic")
_REG_NORMS = ("l2", "l1")


@lru_cache(maxsize=64)
def _upper_pairs(c):
    return np.triu_indices(c, k=1)


@dataclass(frozen=True)
class ObjectiveConfig:
    """Hyperparameters of the training objective.

    Parameters
    ----------
    loss : {"smoothed_hinge", "logistic"}, default="smoothed_hinge"
        Data-term loss applied to each score difference.
    reg_norm : {"l2", "l1"}, default="l2"
        Norm used inside the pairwise-difference regularizer.
    p : float, default=4.0
        Exponent on the pairwise norms; must be positive.  Larger values
        focus the penalty on the largest pairwise distance, i.e. the
        smallest pairwise margin.
    lam : float, default=1e-3
        Regularization strength; must be nonnegative.
    epsilon : float, default=1e-6
        Ridge coefficient on ``(||W||_F^2 + ||b||^2)``.
    delta : float, default=1e-3
        Smoothing width of the hinge.  Must be positive for gradients;
        zero is allowed for value-only evaluation (exact hinge).
    """

    loss: str = "smoothed_hinge"
    reg_norm: str = "l2"
    p: float = 4.0
    lam: float = 1e-3
    epsilon: float = 1e-6
    delta: float = 1e-3

    def __post_init__(self):
        if self.loss not in _LOSSES:
            raise ValueError(f"loss must be one of {_LOSSES}, got {self.loss!r}")
        if self.reg_norm not in _REG_NORMS:
            raise ValueError(
                f"reg_norm must be one of {_REG_NORMS}, got {self.reg_norm!r}"
            )
        if not (np.isfinite(self.p) and self.p > 0):
            raise ValueError(f"p must be a positive real, got {self.p}")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if not (np.isfinite(self.delta) and self.delta >= 0):
            raise ValueError(f"delta must be nonnegative, got {self.delta}")

    def as_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class LossBreakdown:
    """Objective value split into its three terms.

    ``total = data_loss + lam * reg_term + epsilon * eps_term`` where
    ``reg_term`` and ``eps_term`` are the raw (coefficient-free) sums.
    """

    data_loss: float
    reg_term: float
    eps_term: float
    total: float

    def as_dict(self):
        return asdict(self)


def _mk_breakdown(data, reg, epsq, lam, epsilon):
    data = float(data)
    reg = float(reg)
    epsq = float(epsq)
    return LossBreakdown(data, reg, epsq, data + lam * reg + epsilon * epsq)


def smoothed_hinge(x, delta):
    """Smooth upper bound ``(x + sqrt(x^2 + delta^2)) / 2`` on ``max(x, 0)``.

    Exceeds the plain hinge by at most ``delta / 2`` and coincides with it
    when ``delta == 0``.  Total on all finite inputs; ``numpy.hypot`` keeps
    it overflow-safe for extreme ``x``.
    """
    x = np.asarray(x, dtype=np.float64)
    out = 0.5 * (x + np.hypot(x, delta))
    return float(out) if out.ndim == 0 else out


def smoothed_hinge_grad(x, delta):
    """Derivative of :func:`smoothed_hinge`; requires ``delta > 0``."""
    if not delta > 0:
        raise ValueError(
            f"delta must be positive to differentiate the smoothed hinge, "
            f"got {delta}"
        )
    x = np.asarray(x, dtype=np.float64)
    r = np.hypot(x, delta)
    out = 0.5 * (x + r) / r
    return float(out) if out.ndim == 0 else out


def _check_model_arrays(W, b, X, y):
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if W.ndim != 2:
        raise ValueError(f"W must be (d, c), got ndim={W.ndim}")
    d, c = W.shape
    if b.shape != (c,):
        raise ValueError(f"b must have shape ({c},), got {b.shape}")
    if X.ndim != 2 or X.shape[1] != d:
        raise ValueError(
            f"X must be (n, {d}) to match W, got {X.shape}"
        )
    if y.shape != (X.shape[0],):
        raise ValueError(f"y must have shape ({X.shape[0]},), got {y.shape}")
    if y.size and (y.min() < 0 or y.max() >= c):
        raise ValueError(f"labels must lie in [0, {c})")
    return W, b, X, y


def _data_terms(W, b, X, y, cfg, want_grad):
    """Data-term values and, optionally, the score-space coefficient matrix.

    Returns ``(data_loss, B)`` where ``B`` satisfies
    ``d(data_loss)/dW = X.T @ B`` and ``d(data_loss)/db = B.sum(0)``;
    ``B`` is None when ``want_grad`` is false.
    """
    n = X.shape[0]
    if n == 0:
        if want_grad:
            return 0.0, (np.zeros_like(W), np.zeros_like(b))
        return 0.0, None
    S = X @ W + b
    rows = np.arange(n)
    T = S[rows, y][:, None] - S
    if cfg.loss == "smoothed_hinge":
        delta = cfg.delta
        if want_grad and not delta > 0:
            raise ValueError(
                "delta must be positive to differentiate the smoothed hinge"
            )
        G = 1.0 - T
        if delta > 0:
            R = np.sqrt(G * G + delta * delta)
            terms = 0.5 * (G + R)
            A = terms / R if want_grad else None
        else:
            terms = np.maximum(G, 0.0)
            A = None
    else:
        terms = np.logaddexp(0.0, -T)
        A = expit(-T) if want_grad else None
    terms[rows, y] = 0.0
    data = float(terms.sum())
    if not want_grad:
        return data, None
    A[rows, y] = 0.0
    A[rows, y] = -A.sum(axis=1)
    return data, (X.T @ A, A.sum(axis=0))


def regularizer(W, p, reg_norm="l2"):
    """Pairwise-difference penalty ``sum_{k<l} ||w_k - w_l||^p``.

    ``reg_norm`` selects the l2 or l1 norm of each column difference.
    """
    W = np.asarray(W, dtype=np.float64)
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    dist = _pair_norms(W, reg_norm)
    iu = _upper_pairs(W.shape[1])
    return float((dist[iu] ** p).sum())


def _pair_norms(W, reg_norm):
    diff = W[:, :, None] - W[:, None, :]
    if reg_norm == "l2":
        return np.sqrt((diff * diff).sum(axis=0))
    if reg_norm == "l1":
        return np.abs(diff).sum(axis=0)
    raise ValueError(f"reg_norm must be one of {_REG_NORMS}, got {reg_norm!r}")


def _reg_value_and_grad(W, p, reg_norm):
    c = W.shape[1]
    diff = W[:, :, None] - W[:, None, :]
    if reg_norm == "l2":
        dist = np.sqrt((diff * diff).sum(axis=0))
    else:
        dist = np.abs(diff).sum(axis=0)
    iu = _upper_pairs(c)
    value = float((dist[iu] ** p).sum())
    # Zero distance gets a zero subgradient; masking before the power
    # avoids inf * 0 for exponents below the norm's smoothing order.
    with np.errstate(divide="ignore"):
        coef = np.where(dist > 0.0, dist ** (p - 2.0), 0.0) * p
    if reg_norm == "l2":
        # sum_l coef[k,l] * (w_k - w_l), using symmetry of coef.
        grad = W * coef.sum(axis=1) - W @ coef
    else:
        coef = coef * dist  # p * dist^(p-1) for the l1 chain rule
        grad = np.einsum("dkl,kl->dk", np.sign(diff), coef)
    return value, grad


def persample_objective(W, b, X, y, cfg):
    """Objective breakdown via the per-sample data-term form."""
    W, b, X, y = _check_model_arrays(W, b, X, y)
    data, _ = _data_terms(W, b, X, y, cfg, want_grad=False)
    reg = regularizer(W, cfg.p, cfg.reg_norm)
    epsq = float((W * W).sum() + (b * b).sum())
    return _mk_breakdown(data, reg, epsq, cfg.lam, cfg.epsilon)


def pairwise_objective(W, b, X, y, cfg):
    """Objective breakdown via the class-pair data-term form.

    For every unordered class pair ``(k, l)`` the samples of those two
    classes contribute a two-class loss on ``(w_k - w_l, b_k - b_l)``.
    Mathematically identical to :func:`persample_objective`; implemented
    separately as a cross-check.
    """
    W, b, X, y = _check_model_arrays(W, b, X, y)
    c = W.shape[1]
    data = 0.0
    for k in range(c):
        for l in range(k + 1, c):
            wdiff = W[:, k] - W[:, l]
            bdiff = b[k] - b[l]
            for sign, cls in ((1.0, k), (-1.0, l)):
                rows = X[y == cls]
                if rows.shape[0] == 0:
                    continue
                z = sign * (rows @ wdiff + bdiff)
                if cfg.loss == "smoothed_hinge":
                    data += smoothed_hinge(1.0 - z, cfg.delta).sum()
                else:
                    data += np.logaddexp(0.0, -z).sum()
    reg = regularizer(W, cfg.p, cfg.reg_norm)
    epsq = float((W * W).sum() + (b * b).sum())
    return _mk_breakdown(data, reg, epsq, cfg.lam, cfg.epsilon)


def value_and_grad(W, b, X, y, cfg):
    """Objective breakdown plus gradients ``(breakdown, dW, db)``.

    This is the training hot path: the data term and its gradient share
    one pass, and the regularizer terms are added analytically.
    """
    W, b, X, y = _check_model_arrays(W, b, X, y)
    return _value_and_grad_core(W, b, X, y, cfg)


def _value_and_grad_core(W, b, X, y, cfg):
    """Same as :func:`value_and_grad` on already validated arrays."""
    data, (GW, gb) = _data_terms(W, b, X, y, cfg, want_grad=True)
    reg, reg_grad = _reg_value_and_grad(W, cfg.p, cfg.reg_norm)
    if cfg.lam != 0.0:
        GW = GW + cfg.lam * reg_grad
    epsq = float((W * W).sum() + (b * b).sum())
    if cfg.epsilon != 0.0:
        GW = GW + (2.0 * cfg.epsilon) * W
        gb = gb + (2.0 * cfg.epsilon) * b
    return _mk_breakdown(data, reg, epsq, cfg.lam, cfg.epsilon), GW, gb


def gradient(W, b, X, y, cfg):
    """Gradients ``(dW, db)`` of the objective at ``(W, b)``."""
    _, GW, gb = value_and_grad(W, b, X, y, cfg)
    return GW, gb


def l2_equivalent_objective(W, b, X, y, lam, epsilon=1e-6, delta=1e-3,
                            loss="smoothed_hinge"):
    """Breakdown of the plain-ridge form ``data + lam*c*sum_k ||w_k||^2
    + epsilon*||b||^2``.

    At ``p=2`` the pairwise-difference objective and this form share their
    minimizers up to a common column translation; this evaluator exists so
    that equivalence can be checked against an independently trained model.
    """
    cfg = ObjectiveConfig(loss=loss, p=2.0, lam=lam, epsilon=epsilon,
                          delta=delta)
    W, b, X, y = _check_model_arrays(W, b, X, y)
    data, _ = _data_terms(W, b, X, y, cfg, want_grad=False)
    c = W.shape[1]
    reg = float(c * (W * W).sum())
    epsq = float((b * b).sum())
    return _mk_breakdown(data, reg, epsq, lam, epsilon)


def l2_equivalent_value_and_grad(W, b, X, y, lam, epsilon=1e-6, delta=1e-3,
                                 loss="smoothed_hinge"):
    """Value and gradients of :func:`l2_equivalent_objective`."""
    cfg = ObjectiveConfig(loss=loss, p=2.0, lam=lam, epsilon=epsilon,
                          delta=delta)
    W, b, X, y = _check_model_arrays(W, b, X, y)
    data, (GW, gb) = _data_terms(W, b, X, y, cfg, want_grad=True)
    c = W.shape[1]
    reg = float(c * (W * W).sum())
    epsq = float((b * b).sum())
    GW = GW + (2.0 * lam * c) * W
    gb = gb + (2.0 * epsilon) * b
    return _mk_breakdown(data, reg, epsq, lam, epsilon), GW, gb


def variance_identity_residual(W):
    """|lhs - rhs| for the identity ``sum_{k<l} ||w_k - w_l||^2 =
    c * sum_k ||w_k - mean||^2``, both sides computed independently."""
    W = np.asarray(W, dtype=np.float64)
    c = W.shape[1]
    lhs = 0.0
    for k in range(c):
        for l in range(k + 1, c):
            diff = W[:, k] - W[:, l]
            lhs += float(diff @ diff)
    centered = W - W.mean(axis=1, keepdims=True)
    rhs = float(c * (centered * centered).sum())
    return abs(lhs - rhs)


def srm_bound_check(W, X, p):
    """Both sides of the score-spread bound; returns ``(lhs, rhs)``.

    ``lhs`` is the largest per-sample p-norm of the pairwise score
    differences ``(w_k - w_l) @ x_i`` (biases excluded); ``rhs`` is the
    largest sample l2 norm times the p-norm of the pairwise weight
    distances.  The bound ``lhs <= rhs`` holds for every ``p >= 1``.
    """
    W = np.asarray(W, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if not p >= 1:
        raise ValueError(f"the bound requires p >= 1, got {p}")
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a nonempty (n, d) array")
    c = W.shape[1]
    ks, ls = np.triu_indices(c, k=1)
    D = W[:, ks] - W[:, ls]
    V = X @ D
    lhs = float(((np.abs(V) ** p).sum(axis=1) ** (1.0 / p)).max())
    xnorm = float(np.sqrt((X * X).sum(axis=1)).max())
    dist_p = float(((np.sqrt((D * D).sum(axis=0))) ** p).sum() ** (1.0 / p))
    return lhs, xnorm * dist_p


def softmax_loss(W, b, X, y):
    """Multinomial log loss ``sum_i [logsumexp(s_i) - s_{i, y_i}]``.

    Equal to ``sum_i log(1 + sum_{k != y_i} exp(s_ik - s_iy))``, the
    logistic analogue of the per-sample hinge data term.
    """
    W, b, X, y = _check_model_arrays(W, b, X, y)
    if X.shape[0] == 0:
        return 0.0
    S = X @ W + b
    return float((logsumexp(S, axis=1) - S[np.arange(X.shape[0]), y]).sum())


def softmax_value_and_grad(W, b, X, y, lam, epsilon=1e-6):
    """Breakdown and gradients of ``softmax_loss + lam*sum_k ||w_k||^2 +
    epsilon*||b||^2``."""
    W, b, X, y = _check_model_arrays(W, b, X, y)
    n = X.shape[0]
    reg = float((W * W).sum())
    epsq = float((b * b).sum())
    if n == 0:
        bd = _mk_breakdown(0.0, reg, epsq, lam, epsilon)
        return bd, (2.0 * lam) * W, (2.0 * epsilon) * b
    S = X @ W + b
    rows = np.arange(n)
    lse = logsumexp(S, axis=1)
    data = float((lse - S[rows, y]).sum())
    P = np.exp(S - lse[:, None])
    P[rows, y] -= 1.0
    GW = X.T @ P + (2.0 * lam) * W
    gb = P.sum(axis=0) + (2.0 * epsilon) * b
    return _mk_breakdown(data, reg, epsq, lam, epsilon), GW, gb
