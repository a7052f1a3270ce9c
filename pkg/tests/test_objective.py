import math

import numpy as np
import pytest

from helpers import fd_grads, worst_rel
from maxmin_svm.objective import (
    ObjectiveConfig,
    gradient,
    l2_equivalent_objective,
    l2_equivalent_value_and_grad,
    pairwise_objective,
    persample_objective,
    regularizer,
    smoothed_hinge,
    smoothed_hinge_grad,
    softmax_loss,
    srm_bound_check,
    value_and_grad,
    variance_identity_residual,
)


def _instance(seed, n=12, d=3, c=3, scale=1.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(0.0, 1.0, size=(n, d))
    y = rng.integers(0, c, size=n)
    y[:c] = np.arange(c)
    W = rng.normal(0.0, scale, size=(d, c))
    b = rng.normal(0.0, scale, size=c)
    return X, y, W, b


# ---------------------------------------------------------------------------
# Smoothed hinge


def test_smoothed_hinge_hand_values():
    # (x + sqrt(x^2 + delta^2)) / 2 at hand-computed points.
    assert smoothed_hinge(0.0, 0.2) == 0.1
    assert smoothed_hinge(3.0, 0.0) == 3.0
    assert smoothed_hinge(-3.0, 0.0) == 0.0
    # For x << -delta the value is delta^2 / (2 (|x| + sqrt(x^2+delta^2))).
    assert smoothed_hinge(-4.0, 0.03) == pytest.approx(5.62492089e-05,
                                                       abs=1e-12)


def test_smoothed_hinge_brackets_plain_hinge():
    xs = np.linspace(-5.0, 5.0, 2001)
    for delta in (1e-4, 1e-2, 1.0):
        g = smoothed_hinge(xs, delta)
        plain = np.maximum(xs, 0.0)
        assert np.all(g >= plain)
        assert np.all(g - plain <= delta / 2 + 1e-15)
        # The delta/2 gap is attained exactly at x = 0.
        assert smoothed_hinge(0.0, delta) == delta / 2


def test_smoothed_hinge_grad_matches_differences():
    xs = np.linspace(-3.0, 3.0, 41)
    step = 1e-6
    for delta in (1e-2, 0.5):
        g = smoothed_hinge_grad(xs, delta)
        fd = (smoothed_hinge(xs + step, delta)
              - smoothed_hinge(xs - step, delta)) / (2 * step)
        np.testing.assert_allclose(g, fd, rtol=1e-7, atol=1e-9)
    assert smoothed_hinge_grad(0.0, 0.3) == 0.5


# ---------------------------------------------------------------------------
# Regularizer


def test_regularizer_hand_values():
    # One feature, columns at 0, 1, 3: pair distances 1, 3, 2.
    W = np.array([[0.0, 1.0, 3.0]])
    assert regularizer(W, p=1.0) == 6.0
    assert regularizer(W, p=2.0) == 14.0
    assert regularizer(W, p=3.0) == 36.0


def test_regularizer_l1_vs_l2():
    # Columns (0,0) and (3,4): l2 distance 5, l1 distance 7.
    W = np.array([[0.0, 3.0], [0.0, 4.0]])
    assert regularizer(W, p=1.0, reg_norm="l2") == 5.0
    assert regularizer(W, p=2.0, reg_norm="l2") == 25.0
    assert regularizer(W, p=1.0, reg_norm="l1") == 7.0
    assert regularizer(W, p=2.0, reg_norm="l1") == 49.0


def test_regularizer_translation_invariant():
    rng = np.random.default_rng(5)
    W = rng.normal(size=(4, 5))
    t = rng.normal(size=4)
    for p in (1.0, 2.5, 8.0):
        assert regularizer(W + t[:, None], p) == pytest.approx(
            regularizer(W, p), rel=1e-12)


# ---------------------------------------------------------------------------
# Objective values


def test_zero_model_data_loss():
    X, y, W, b = _instance(0, n=15, c=4)
    cfg = ObjectiveConfig(delta=1e-3, lam=0.0, epsilon=0.0)
    bd = persample_objective(np.zeros_like(W), np.zeros_like(b), X, y, cfg)
    expected = 15 * 3 * (1.0 + math.sqrt(1.0 + 1e-6)) / 2.0
    assert bd.data_loss == pytest.approx(expected, rel=1e-14)
    assert bd.reg_term == 0.0


def test_softmax_loss_zero_model():
    X, y, W, b = _instance(1, n=20, c=5)
    value = softmax_loss(np.zeros_like(W), np.zeros_like(b), X, y)
    assert value == pytest.approx(20 * math.log(5), rel=1e-13)


@pytest.mark.parametrize("loss", ["smoothed_hinge", "logistic"])
def test_persample_equals_pairwise(loss):
    for seed in range(5):
        X, y, W, b = _instance(seed, n=25, d=4, c=4)
        cfg = ObjectiveConfig(loss=loss, p=3.0, lam=0.01, delta=0.05)
        a = persample_objective(W, b, X, y, cfg)
        c_ = pairwise_objective(W, b, X, y, cfg)
        assert a.total == pytest.approx(c_.total, rel=1e-12)
        assert a.data_loss == pytest.approx(c_.data_loss, rel=1e-12)


def test_breakdown_total_consistent():
    X, y, W, b = _instance(2)
    cfg = ObjectiveConfig(p=2.0, lam=0.1, epsilon=1e-4, delta=0.1)
    bd = persample_objective(W, b, X, y, cfg)
    assert bd.total == pytest.approx(
        bd.data_loss + cfg.lam * bd.reg_term + cfg.epsilon * bd.eps_term,
        rel=1e-15)


# ---------------------------------------------------------------------------
# Gradients


@pytest.mark.parametrize("loss", ["smoothed_hinge", "logistic"])
@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_value_and_grad_matches_finite_differences(loss, p):
    X, y, W, b = _instance(3, n=15, d=3, c=3)
    cfg = ObjectiveConfig(loss=loss, p=p, lam=1e-2, epsilon=1e-4, delta=1e-1)

    def value(Wv, bv):
        return persample_objective(Wv, bv, X, y, cfg).total

    _, GW, gb = value_and_grad(W, b, X, y, cfg)
    fd_W, fd_b = fd_grads(value, [W, b])
    assert worst_rel([GW, gb], [fd_W, fd_b]) < 1e-5


def test_gradient_matches_value_and_grad():
    X, y, W, b = _instance(4)
    cfg = ObjectiveConfig(p=3.0, lam=0.02, delta=0.05)
    GW, gb = gradient(W, b, X, y, cfg)
    _, GW2, gb2 = value_and_grad(W, b, X, y, cfg)
    np.testing.assert_array_equal(GW, GW2)
    np.testing.assert_array_equal(gb, gb2)


def test_value_and_grad_value_matches_persample():
    X, y, W, b = _instance(6)
    cfg = ObjectiveConfig(p=2.5, lam=0.05, delta=0.02)
    bd, _, _ = value_and_grad(W, b, X, y, cfg)
    assert bd.total == pytest.approx(
        persample_objective(W, b, X, y, cfg).total, rel=1e-12)


# ---------------------------------------------------------------------------
# Ridge-equivalent form


def test_l2_equivalent_matches_pairwise_for_centered_W():
    # For mean-zero columns, sum_{k<l} ||w_k - w_l||^2 = c sum_k ||w_k||^2,
    # so the pairwise p=2 regularizer equals the scaled plain ridge.
    X, y, W, b = _instance(7, c=4)
    W = W - W.mean(axis=1, keepdims=True)
    lam = 0.03
    cfg = ObjectiveConfig(p=2.0, lam=lam, epsilon=0.0, delta=0.05)
    pair = persample_objective(W, b, X, y, cfg)
    ridge = l2_equivalent_objective(W, b, X, y, lam, epsilon=0.0, delta=0.05)
    assert pair.data_loss == pytest.approx(ridge.data_loss, rel=1e-12)
    assert lam * pair.reg_term == pytest.approx(lam * ridge.reg_term,
                                               rel=1e-10)


def test_l2_equivalent_gradient_matches_finite_differences():
    X, y, W, b = _instance(8)
    lam = 0.05

    def value(Wv, bv):
        return l2_equivalent_objective(Wv, bv, X, y, lam, epsilon=1e-3,
                                       delta=0.1).total

    _, GW, gb = l2_equivalent_value_and_grad(W, b, X, y, lam, epsilon=1e-3,
                                             delta=0.1)
    fd_W, fd_b = fd_grads(value, [W, b])
    assert worst_rel([GW, gb], [fd_W, fd_b]) < 1e-5


# ---------------------------------------------------------------------------
# Identities and bounds


def test_variance_identity_residual_small():
    rng = np.random.default_rng(9)
    for _ in range(50):
        W = rng.normal(0.0, 10.0 ** rng.integers(-2, 3),
                       size=(rng.integers(1, 8), rng.integers(2, 7)))
        mag = float((W * W).sum())
        assert variance_identity_residual(W) <= 1e-10 * (1.0 + mag)


def test_srm_bound_holds():
    rng = np.random.default_rng(10)
    for p in (1.0, 2.0, 4.0, 8.0):
        W = rng.normal(size=(5, 4))
        X = rng.normal(size=(30, 5))
        lhs, rhs = srm_bound_check(W, X, p)
        assert lhs <= rhs * (1.0 + 1e-12)
    with pytest.raises(ValueError, match="p >= 1"):
        srm_bound_check(W, X, 0.5)


# ---------------------------------------------------------------------------
# Config validation


@pytest.mark.parametrize(
    "kwargs",
    [
        {"loss": "absolute"},
        {"reg_norm": "linf"},
        {"p": 0.0},
        {"p": -1.0},
        {"lam": -1e-3},
        {"epsilon": -1.0},
        {"delta": -0.1},
        {"p": float("nan")},
    ],
)
def test_objective_config_rejects(kwargs):
    with pytest.raises(ValueError):
        ObjectiveConfig(**kwargs)


def test_objective_config_roundtrip():
    cfg = ObjectiveConfig(loss="logistic", p=2.5, lam=0.01)
    assert ObjectiveConfig.from_dict(cfg.as_dict()) == cfg
