"""Scikit-learn style estimators wrapping the trainers.

Every classifier here follows the standard estimator contract: hyper-
parameters are plain constructor arguments stored verbatim, ``fit``
learns trailing-underscore attributes and returns ``self``, and
``get_params`` / ``set_params`` / ``clone`` work out of the box.  Inputs
are validated with the usual scikit-learn helpers.

The central estimator is :class:`MaxMinLinearClassifier`; the others are
the classical baselines it is compared against.
"""

from __future__ import annotations

import numpy as np
from scipy.special import softmax as _softmax
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import baselines
from .data import Dataset
from .model import LinearModel, margin_report
from .objective import ObjectiveConfig
from .optim import TrainConfig, train


def _validate_fit_inputs(X, y):
    X, y = check_X_y(X, y, dtype=np.float64)
    check_classification_targets(y)
    classes, y_idx = np.unique(y, return_inverse=True)
    if classes.shape[0] < 2:
        raise ValueError(
            f"this classifier needs at least 2 classes in y, got "
            f"{classes.shape[0]}"
        )
    return X, y_idx.astype(np.int64), classes


def _as_dataset(X, y_idx, classes):
    return Dataset(X, y_idx, class_names=tuple(str(c) for c in classes))


def _train_config(est):
    return TrainConfig(
        learning_rate=est.learning_rate,
        beta1=est.beta1,
        beta2=est.beta2,
        adam_eps=est.adam_eps,
        max_iters=est.max_iters,
        rel_tol=est.rel_tol,
        seed=est.random_state,
    )


def _encode_eval_set(eval_set, classes):
    if eval_set is None:
        return None
    Xe, ye = eval_set
    Xe = check_array(Xe, dtype=np.float64)
    lookup = {label: k for k, label in enumerate(classes.tolist())}
    try:
        ye_idx = np.array([lookup[v] for v in np.asarray(ye).tolist()],
                          dtype=np.int64)
    except KeyError as exc:
        raise ValueError(
            f"eval_set contains label {exc.args[0]!r} not present in the "
            f"training labels"
        ) from None
    return Dataset(Xe, ye_idx, class_names=tuple(str(c) for c in classes))


class _LinearScoringMixin:
    """Shared prediction surface for estimators holding a ``model_``."""

    def decision_function(self, X):
        """Per-class scores ``x @ w_k + b_k``, shape ``(n, n_classes)``."""
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.model_.n_features:
            raise ValueError(
                f"X has {X.shape[1]} features but the model was fit with "
                f"{self.model_.n_features}"
            )
        return X @ self.model_.W + self.model_.b

    def predict(self, X):
        """Predicted labels; score ties resolve to the lowest class index."""
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def margin_report(self):
        """Pairwise geometric margins ``2 / ||w_k - w_l||`` of the fit model."""
        check_is_fitted(self, "model_")
        return margin_report(self.model_)

    def _store_model(self, model):
        self.model_ = model
        self.coef_ = model.W.T.copy()
        self.intercept_ = model.b.copy()


class MaxMinLinearClassifier(_LinearScoringMixin, ClassifierMixin,
                             BaseEstimator):
    """Linear classifier that maximizes the minimum pairwise class margin.

    Minimizes, with full-batch Adam,

        sum_i sum_{k != y_i} loss(score_{y_i} - score_k)
          + lam * sum_{k<l} ||w_k - w_l||^p
          + epsilon * (||W||_F^2 + ||b||^2)

    The pairwise-difference penalty shrinks the largest column
    differences, which raises the smallest margin ``2 / ||w_k - w_l||``;
    larger ``p`` concentrates the penalty on the worst pair.  The tiny
    ``epsilon`` ridge makes the optimum unique by pinning the column mean
    of ``W`` (and the mean of ``b``) near zero.

    Parameters
    ----------
    p : float, default=4.0
        Exponent on the pairwise column distances; must be positive.
    lam : float, default=1e-3
        Regularization strength.
    loss : {"smoothed_hinge", "logistic"}, default="smoothed_hinge"
        Data term: a smoothed hinge on the margin violations, or the
        pairwise logistic loss.
    reg_norm : {"l2", "l1"}, default="l2"
        Norm used for the column differences in the penalty.
    epsilon : float, default=1e-6
        Mean-pinning ridge coefficient.
    delta : float, default=1e-3
        Hinge smoothing width; irrelevant for the logistic loss.
    learning_rate, beta1, beta2, adam_eps : float
        Adam hyperparameters (defaults 1e-2, 0.9, 0.999, 1e-8).
    max_iters : int, default=2000
        Iteration cap.
    rel_tol : float, default=1e-8
        Early-stop threshold on the relative objective change over a
        10-iteration window.
    random_state : int, default=0
        Seed for the Gaussian parameter initialization.

    Attributes
    ----------
    classes_ : ndarray of shape (n_classes,)
        Sorted unique labels seen in ``fit``.
    coef_ : ndarray of shape (n_classes, n_features)
        Weight row per class.
    intercept_ : ndarray of shape (n_classes,)
        Bias per class.
    model_ : LinearModel
        The underlying immutable parameter container.
    trace_ : TrainTrace
        Per-iteration objective breakdown from training.
    n_iter_ : int
        Iterations actually run.
    """

    def __init__(self, p=4.0, lam=1e-3, loss="smoothed_hinge", reg_norm="l2",
                 epsilon=1e-6, delta=1e-3, learning_rate=1e-2, beta1=0.9,
                 beta2=0.999, adam_eps=1e-8, max_iters=2000, rel_tol=1e-8,
                 random_state=0):
        self.p = p
        self.lam = lam
        self.loss = loss
        self.reg_norm = reg_norm
        self.epsilon = epsilon
        self.delta = delta
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_eps = adam_eps
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.random_state = random_state

    def _objective_config(self):
        return ObjectiveConfig(
            loss=self.loss,
            reg_norm=self.reg_norm,
            p=self.p,
            lam=self.lam,
            epsilon=self.epsilon,
            delta=self.delta,
        )

    def fit(self, X, y, eval_set=None):
        """Fit on ``(X, y)``; ``eval_set=(X_val, y_val)`` adds a per-
        iteration accuracy column to ``trace_``."""
        X, y_idx, classes = _validate_fit_inputs(X, y)
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        data = _as_dataset(X, y_idx, classes)
        model, trace = train(
            data,
            self._objective_config(),
            _train_config(self),
            eval_set=_encode_eval_set(eval_set, classes),
        )
        self._store_model(model)
        self.trace_ = trace
        self.n_iter_ = trace.n_iters
        return self


class CrammerSingerClassifier(_LinearScoringMixin, ClassifierMixin,
                              BaseEstimator):
    """Multi-class SVM penalizing only each sample's worst violation.

    Minimizes ``sum_i max_{k != y_i} g(1 - (s_y - s_k)) + lam * sum_k
    ||w_k||^2 + epsilon * ||b||^2`` with the shared smoothed hinge ``g``.
    The nonsmooth max is trained through its argmax subgradient (first
    index on ties).

    Parameters
    ----------
    lam : float, default=1e-3
        Ridge strength on the weight columns.
    delta : float, default=1e-3
        Hinge smoothing width.
    epsilon : float, default=1e-6
        Bias ridge that makes the optimum unique.
    learning_rate, beta1, beta2, adam_eps, max_iters, rel_tol, random_state
        Adam settings, as in :class:`MaxMinLinearClassifier`.

    Attributes
    ----------
    classes_, coef_, intercept_, model_ : see MaxMinLinearClassifier.
    """

    def __init__(self, lam=1e-3, delta=1e-3, epsilon=1e-6, learning_rate=1e-2,
                 beta1=0.9, beta2=0.999, adam_eps=1e-8, max_iters=2000,
                 rel_tol=1e-8, random_state=0):
        self.lam = lam
        self.delta = delta
        self.epsilon = epsilon
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_eps = adam_eps
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.random_state = random_state

    def fit(self, X, y):
        X, y_idx, classes = _validate_fit_inputs(X, y)
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        model = baselines.train_crammer(
            _as_dataset(X, y_idx, classes),
            lam=self.lam,
            delta=self.delta,
            epsilon=self.epsilon,
            cfg_train=_train_config(self),
        )
        self._store_model(model)
        return self


class WestonWatkinsClassifier(_LinearScoringMixin, ClassifierMixin,
                              BaseEstimator):
    """Multi-class SVM summing all margin violations per sample.

    Minimizes ``sum_i sum_{k != y_i} g(1 - (s_y - s_k)) + lam * sum_k
    ||w_k||^2 + epsilon * ||b||^2``.  Internally trained through the
    pairwise-difference objective at ``p=2`` with strength ``lam / c``,
    which shares its minimizer with the plain ridge form.

    Parameters
    ----------
    lam, delta, epsilon : float
        As in :class:`CrammerSingerClassifier`.
    learning_rate, beta1, beta2, adam_eps, max_iters, rel_tol, random_state
        Adam settings.

    Attributes
    ----------
    classes_, coef_, intercept_, model_ : see MaxMinLinearClassifier.
    """

    def __init__(self, lam=1e-3, delta=1e-3, epsilon=1e-6, learning_rate=1e-2,
                 beta1=0.9, beta2=0.999, adam_eps=1e-8, max_iters=2000,
                 rel_tol=1e-8, random_state=0):
        self.lam = lam
        self.delta = delta
        self.epsilon = epsilon
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_eps = adam_eps
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.random_state = random_state

    def fit(self, X, y):
        X, y_idx, classes = _validate_fit_inputs(X, y)
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        model = baselines.train_ww(
            _as_dataset(X, y_idx, classes),
            lam=self.lam,
            delta=self.delta,
            epsilon=self.epsilon,
            cfg_train=_train_config(self),
        )
        self._store_model(model)
        return self


class SoftmaxRegressionClassifier(_LinearScoringMixin, ClassifierMixin,
                                  BaseEstimator):
    """Multinomial logistic regression with a ridge on the weights.

    Minimizes ``sum_i [logsumexp(s_i) - s_{i, y_i}] + lam * sum_k
    ||w_k||^2 + epsilon * ||b||^2`` with full-batch Adam.

    Parameters
    ----------
    lam : float, default=1e-3
        Ridge strength on the weight columns.
    epsilon : float, default=1e-6
        Bias ridge.
    learning_rate, beta1, beta2, adam_eps, max_iters, rel_tol, random_state
        Adam settings.

    Attributes
    ----------
    classes_, coef_, intercept_, model_ : see MaxMinLinearClassifier.
    """

    def __init__(self, lam=1e-3, epsilon=1e-6, learning_rate=1e-2, beta1=0.9,
                 beta2=0.999, adam_eps=1e-8, max_iters=2000, rel_tol=1e-8,
                 random_state=0):
        self.lam = lam
        self.epsilon = epsilon
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_eps = adam_eps
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.random_state = random_state

    def fit(self, X, y):
        X, y_idx, classes = _validate_fit_inputs(X, y)
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        model = baselines.train_multilr(
            _as_dataset(X, y_idx, classes),
            lam=self.lam,
            epsilon=self.epsilon,
            cfg_train=_train_config(self),
        )
        self._store_model(model)
        return self

    def predict_proba(self, X):
        """Softmax of the decision scores, shape ``(n, n_classes)``."""
        return _softmax(self.decision_function(X), axis=1)


class BinaryHingeClassifier(ClassifierMixin, BaseEstimator):
    """Smoothed-hinge binary SVM with an unpenalized bias.

    Minimizes ``sum_i g(1 - y_i (w @ x_i + b)) + lam * ||w||^2`` where the
    first (lowest) class label is the positive side; a decision score of
    exactly zero predicts that class.

    Parameters
    ----------
    lam : float, default=1e-3
        Ridge strength on ``w``.
    delta : float, default=1e-3
        Hinge smoothing width.
    learning_rate, beta1, beta2, adam_eps, max_iters, rel_tol, random_state
        Adam settings.

    Attributes
    ----------
    classes_ : ndarray of shape (2,)
        The two labels; ``classes_[0]`` is the positive side.
    coef_ : ndarray of shape (n_features,)
    intercept_ : float
    binary_model_ : BinaryModel
    """

    def __init__(self, lam=1e-3, delta=1e-3, learning_rate=1e-2, beta1=0.9,
                 beta2=0.999, adam_eps=1e-8, max_iters=2000, rel_tol=1e-8,
                 random_state=0):
        self.lam = lam
        self.delta = delta
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_eps = adam_eps
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.random_state = random_state

    def fit(self, X, y):
        X, y_idx, classes = _validate_fit_inputs(X, y)
        if classes.shape[0] != 2:
            raise ValueError(
                f"BinaryHingeClassifier needs exactly 2 classes, got "
                f"{classes.shape[0]}"
            )
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        self.binary_model_ = baselines.train_binary_svm(
            _as_dataset(X, y_idx, classes),
            lam=self.lam,
            delta=self.delta,
            cfg_train=_train_config(self),
        )
        self.coef_ = self.binary_model_.w.copy()
        self.intercept_ = self.binary_model_.b
        return self

    def decision_function(self, X):
        """Signed score ``w @ x + b``; positive favors ``classes_[0]``."""
        check_is_fitted(self, "binary_model_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features but the model was fit with "
                f"{self.n_features_in_}"
            )
        return self.binary_model_.scores(X)

    def predict(self, X):
        scores = self.decision_function(X)
        return np.where(scores >= 0.0, self.classes_[0], self.classes_[1])


class OneVsRestHingeClassifier(ClassifierMixin, BaseEstimator):
    """One smoothed-hinge binary SVM per class, argmax of the scores.

    Member ``k`` is trained with class ``k`` positive against all other
    samples; prediction takes the highest member score, ties resolving to
    the lowest class index.

    Parameters
    ----------
    lam : float, default=1e-3
        Shared ridge strength across all members.
    delta : float, default=1e-3
        Hinge smoothing width.
    learning_rate, beta1, beta2, adam_eps, max_iters, rel_tol, random_state
        Adam settings shared by every member.

    Attributes
    ----------
    classes_ : ndarray of shape (n_classes,)
    ovr_model_ : OvRModel
        The trained members, one per class.
    """

    def __init__(self, lam=1e-3, delta=1e-3, learning_rate=1e-2, beta1=0.9,
                 beta2=0.999, adam_eps=1e-8, max_iters=2000, rel_tol=1e-8,
                 random_state=0):
        self.lam = lam
        self.delta = delta
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_eps = adam_eps
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.random_state = random_state

    def fit(self, X, y):
        X, y_idx, classes = _validate_fit_inputs(X, y)
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        self.ovr_model_ = baselines.train_ovr(
            _as_dataset(X, y_idx, classes),
            lam=self.lam,
            delta=self.delta,
            cfg_train=_train_config(self),
        )
        return self

    def decision_function(self, X):
        """Stacked member scores, shape ``(n, n_classes)``."""
        check_is_fitted(self, "ovr_model_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features but the model was fit with "
                f"{self.n_features_in_}"
            )
        return np.column_stack([m.scores(X) for m in self.ovr_model_.members])

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]


class OneVsOneHingeClassifier(ClassifierMixin, BaseEstimator):
    """One smoothed-hinge binary SVM per class pair, majority vote.

    Each member sees only its two classes' samples.  A pairwise score of
    exactly zero votes for the pair's lower-indexed class, and vote ties
    also resolve to the lowest class index.

    Parameters
    ----------
    lam : float, default=1e-3
        Shared ridge strength across all members.
    delta : float, default=1e-3
        Hinge smoothing width.
    learning_rate, beta1, beta2, adam_eps, max_iters, rel_tol, random_state
        Adam settings shared by every member.

    Attributes
    ----------
    classes_ : ndarray of shape (n_classes,)
    ovo_model_ : OvOModel
        The ``c (c-1) / 2`` trained members in pair order.
    """

    def __init__(self, lam=1e-3, delta=1e-3, learning_rate=1e-2, beta1=0.9,
                 beta2=0.999, adam_eps=1e-8, max_iters=2000, rel_tol=1e-8,
                 random_state=0):
        self.lam = lam
        self.delta = delta
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_eps = adam_eps
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.random_state = random_state

    def fit(self, X, y):
        X, y_idx, classes = _validate_fit_inputs(X, y)
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        self.ovo_model_ = baselines.train_ovo(
            _as_dataset(X, y_idx, classes),
            lam=self.lam,
            delta=self.delta,
            cfg_train=_train_config(self),
        )
        return self

    def vote_matrix(self, X):
        """Vote counts per class, shape ``(n, n_classes)``."""
        check_is_fitted(self, "ovo_model_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features but the model was fit with "
                f"{self.n_features_in_}"
            )
        votes = np.zeros((X.shape[0], len(self.classes_)), dtype=np.int64)
        for k, l, member in self.ovo_model_.members:
            s = member.scores(X)
            votes[s >= 0.0, k] += 1
            votes[s < 0.0, l] += 1
        return votes

    def predict(self, X):
        votes = self.vote_matrix(X)
        return self.classes_[np.argmax(votes, axis=1)]
