import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from maxmin_svm.estimators import (
    BinaryHingeClassifier,
    CrammerSingerClassifier,
    MaxMinLinearClassifier,
    OneVsOneHingeClassifier,
    OneVsRestHingeClassifier,
    SoftmaxRegressionClassifier,
    WestonWatkinsClassifier,
)
from maxmin_svm.model import MarginReport

MULTICLASS = [
    MaxMinLinearClassifier,
    CrammerSingerClassifier,
    WestonWatkinsClassifier,
    SoftmaxRegressionClassifier,
    OneVsRestHingeClassifier,
    OneVsOneHingeClassifier,
]
ALL = MULTICLASS + [BinaryHingeClassifier]


def _fast(cls, **kwargs):
    return cls(max_iters=kwargs.pop("max_iters", 200), **kwargs)


@pytest.fixture
def Xy3(blobs3):
    return blobs3.features, blobs3.labels


@pytest.fixture
def Xy2(blobs2):
    return blobs2.features, blobs2.labels


# ---------------------------------------------------------------------------
# Estimator contract


@pytest.mark.parametrize("cls", ALL)
def test_clone_and_get_params(cls):
    est = _fast(cls, random_state=5)
    params = est.get_params()
    assert params["max_iters"] == 200
    assert params["random_state"] == 5
    cloned = clone(est)
    assert cloned.get_params() == params
    est.set_params(learning_rate=0.5)
    assert est.learning_rate == 0.5
    assert cloned.learning_rate != 0.5


@pytest.mark.parametrize("cls", MULTICLASS)
def test_fit_predict_multiclass(cls, Xy3):
    X, y = Xy3
    est = _fast(cls).fit(X, y)
    assert est is est.fit(X, y)
    np.testing.assert_array_equal(est.classes_, [0, 1, 2])
    assert est.n_features_in_ == X.shape[1]
    pred = est.predict(X)
    assert pred.shape == y.shape
    assert (pred == y).mean() >= 0.95
    assert est.score(X, y) == (pred == y).mean()


@pytest.mark.parametrize("cls", ALL)
def test_unfitted_predict_raises(cls, Xy3):
    with pytest.raises(NotFittedError):
        _fast(cls).predict(Xy3[0])


@pytest.mark.parametrize("cls", ALL)
def test_one_class_y_rejected(cls, Xy3):
    X, _ = Xy3
    with pytest.raises(ValueError, match="2 classes"):
        _fast(cls).fit(X, np.zeros(X.shape[0], dtype=int))


@pytest.mark.parametrize("cls", MULTICLASS)
def test_feature_width_mismatch(cls, Xy3):
    X, y = Xy3
    est = _fast(cls).fit(X, y)
    with pytest.raises(ValueError, match="features"):
        est.predict(X[:, :2])


def test_string_labels_roundtrip(Xy3, blobs3):
    X, y = Xy3
    names = np.array(blobs3.class_names)
    est = _fast(MaxMinLinearClassifier).fit(X, names[y])
    np.testing.assert_array_equal(est.classes_, np.sort(names))
    pred = est.predict(X)
    assert set(pred) <= set(names)


def test_noncontiguous_integer_labels(Xy3):
    X, y = Xy3
    relabeled = np.array([3, 7, 9])[y]
    est = _fast(CrammerSingerClassifier).fit(X, relabeled)
    np.testing.assert_array_equal(est.classes_, [3, 7, 9])
    assert set(est.predict(X)) <= {3, 7, 9}


# ---------------------------------------------------------------------------
# Scoring surfaces


@pytest.mark.parametrize(
    "cls",
    [
        MaxMinLinearClassifier,
        CrammerSingerClassifier,
        WestonWatkinsClassifier,
        SoftmaxRegressionClassifier,
        OneVsRestHingeClassifier,
    ],
)
def test_decision_function_shape(cls, Xy3):
    X, y = Xy3
    est = _fast(cls).fit(X, y)
    S = est.decision_function(X[:7])
    assert S.shape == (7, 3)
    np.testing.assert_array_equal(est.classes_[np.argmax(S, axis=1)],
                                  est.predict(X[:7]))


@pytest.mark.parametrize(
    "cls",
    [
        MaxMinLinearClassifier,
        CrammerSingerClassifier,
        WestonWatkinsClassifier,
        SoftmaxRegressionClassifier,
    ],
)
def test_coef_shapes(cls, Xy3):
    X, y = Xy3
    est = _fast(cls).fit(X, y)
    assert est.coef_.shape == (3, X.shape[1])
    assert est.intercept_.shape == (3,)
    np.testing.assert_array_equal(est.coef_, est.model_.W.T)


def test_predict_proba_rows_sum_to_one(Xy3):
    X, y = Xy3
    est = _fast(SoftmaxRegressionClassifier).fit(X, y)
    P = est.predict_proba(X)
    np.testing.assert_allclose(P.sum(axis=1), np.ones(X.shape[0]),
                               rtol=1e-12)
    assert np.all(P >= 0)
    np.testing.assert_array_equal(est.classes_[np.argmax(P, axis=1)],
                                  est.predict(X))


def test_margin_report_surface(Xy3):
    X, y = Xy3
    est = _fast(MaxMinLinearClassifier).fit(X, y)
    rep = est.margin_report()
    assert isinstance(rep, MarginReport)
    assert len(rep.pair_margins) == 3
    assert rep.min_margin > 0


def test_vote_matrix(Xy3):
    X, y = Xy3
    est = _fast(OneVsOneHingeClassifier).fit(X, y)
    V = est.vote_matrix(X[:5])
    assert V.shape == (5, 3)
    np.testing.assert_array_equal(V.sum(axis=1), np.full(5, 3))


# ---------------------------------------------------------------------------
# MaxMin specifics


def test_maxmin_trace_and_eval_set(Xy3):
    X, y = Xy3
    holdout = slice(0, None, 4)
    est = MaxMinLinearClassifier(max_iters=150)
    est.fit(X, y, eval_set=(X[holdout], y[holdout]))
    assert est.n_iter_ == est.trace_.n_iters <= 150
    assert len(est.trace_.eval_accuracy) == est.n_iter_
    with pytest.raises(ValueError, match="not present"):
        MaxMinLinearClassifier(max_iters=10).fit(
            X, y, eval_set=(X[:3], np.array([5, 5, 5])))


def test_set_params_refit_changes_model(Xy3):
    X, y = Xy3
    est = _fast(MaxMinLinearClassifier, lam=1e-3).fit(X, y)
    before = est.coef_.copy()
    est.set_params(lam=10.0).fit(X, y)
    assert not np.array_equal(before, est.coef_)


@pytest.mark.parametrize("cls", [MaxMinLinearClassifier,
                                 OneVsOneHingeClassifier])
def test_same_seed_same_fit(cls, Xy3):
    X, y = Xy3
    a = _fast(cls, random_state=3).fit(X, y)
    b = _fast(cls, random_state=3).fit(X, y)
    np.testing.assert_array_equal(a.predict(X), b.predict(X))
    if hasattr(a, "coef_"):
        np.testing.assert_array_equal(a.coef_, b.coef_)


# ---------------------------------------------------------------------------
# Binary estimator


def test_binary_hinge_fit_predict(Xy2):
    X, y = Xy2
    est = _fast(BinaryHingeClassifier).fit(X, y)
    assert est.coef_.shape == (X.shape[1],)
    assert isinstance(est.intercept_, float)
    assert (est.predict(X) == y).mean() == 1.0
    scores = est.decision_function(X)
    np.testing.assert_array_equal(
        est.predict(X), np.where(scores >= 0, est.classes_[0],
                                 est.classes_[1]))


def test_binary_hinge_rejects_multiclass(Xy3):
    X, y = Xy3
    with pytest.raises(ValueError, match="exactly 2 classes"):
        _fast(BinaryHingeClassifier).fit(X, y)
