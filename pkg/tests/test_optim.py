import numpy as np
import pytest

from maxmin_svm.model import evaluate
from maxmin_svm.objective import LossBreakdown, ObjectiveConfig
from maxmin_svm.optim import (
    GradcheckReport,
    TrainConfig,
    TrainingDivergedError,
    TrainTrace,
    adam_step,
    gradcheck,
    init_adam_state,
    minimize_adam,
    train,
)
from maxmin_svm.verify import blob_dataset


def _quadratic(center):
    # fn for minimize_adam: sum of squares around ``center``.
    def fn(params):
        (x,) = params
        r = x - center
        value = float(r @ r)
        bd = LossBreakdown(value, 0.0, 0.0, value)
        return bd, (2.0 * r,)

    return fn


# ---------------------------------------------------------------------------
# TrainConfig


@pytest.mark.parametrize(
    "kwargs",
    [
        {"learning_rate": 0.0},
        {"learning_rate": -1.0},
        {"beta1": 1.0},
        {"beta2": -0.1},
        {"adam_eps": 0.0},
        {"max_iters": 0},
        {"rel_tol": -1e-8},
    ],
)
def test_train_config_rejects(kwargs):
    with pytest.raises(ValueError):
        TrainConfig(**kwargs)


def test_train_config_roundtrip():
    cfg = TrainConfig(learning_rate=0.05, max_iters=123, seed=9)
    assert TrainConfig.from_dict(cfg.as_dict()) == cfg


# ---------------------------------------------------------------------------
# Adam mechanics


def test_adam_first_step_is_signed_learning_rate():
    # With zero moments the bias-corrected first update is lr * sign(g)
    # up to the adam_eps denominator guard.
    params = [np.array([1.0, 1.0, 1.0])]
    grads = [np.array([3.0, -2.0, 0.5])]
    cfg = TrainConfig(learning_rate=0.1)
    state = init_adam_state(params)
    adam_step(params, grads, state, cfg)
    np.testing.assert_allclose(params[0], [0.9, 1.1, 0.9], atol=1e-8)
    assert state.t == 1


def test_adam_zero_gradient_is_noop():
    params = [np.full(3, 2.5)]
    state = init_adam_state(params)
    adam_step(params, [np.zeros(3)], state, TrainConfig())
    np.testing.assert_array_equal(params[0], np.full(3, 2.5))


def test_adam_rejects_nonfinite_gradient():
    params = [np.zeros((2, 2))]
    g = np.zeros((2, 2))
    g[1, 0] = np.nan
    with pytest.raises(ValueError, match=r"parameter 0 at coordinate \(1, 0\)"):
        adam_step(params, [g], init_adam_state(params), TrainConfig())


def test_minimize_adam_solves_quadratic():
    center = np.array([3.0, -1.0, 0.5])
    params = (np.zeros(3),)
    cfg = TrainConfig(learning_rate=0.1, max_iters=2000, rel_tol=0.0)
    (x,), trace = minimize_adam(_quadratic(center), params, cfg)
    np.testing.assert_allclose(x, center, atol=1e-3)
    assert trace.n_iters == 2000
    assert trace.objective[-1] < 1e-5 * trace.objective[0]


def test_minimize_adam_early_stop():
    params = (np.zeros(2),)
    cfg = TrainConfig(learning_rate=0.2, max_iters=5000, rel_tol=1e-6)
    _, trace = minimize_adam(_quadratic(np.ones(2)), params, cfg)
    assert trace.n_iters < 5000


def test_minimize_adam_diverged_names_iteration():
    calls = {"n": 0}

    def fn(params):
        calls["n"] += 1
        if calls["n"] > 3:
            return LossBreakdown(np.nan, 0.0, 0.0, np.nan), (np.zeros(1),)
        return LossBreakdown(1.0, 0.0, 0.0, 1.0), (np.zeros(1),)

    with pytest.raises(TrainingDivergedError, match="iteration 3"):
        minimize_adam(fn, (np.zeros(1),), TrainConfig(max_iters=50))
    assert issubclass(TrainingDivergedError, RuntimeError)


# ---------------------------------------------------------------------------
# train()


def test_train_separable_blobs(blobs3):
    model, trace = train(blobs3, ObjectiveConfig(lam=1e-3),
                         TrainConfig(max_iters=400, seed=0))
    assert evaluate(model, blobs3).accuracy == 1.0
    assert model.class_names == blobs3.class_names
    assert trace.n_iters <= 400
    # Objective decreases overall.
    assert trace.objective[-1] < trace.objective[0]


def test_train_pins_column_means(blobs3):
    model, _ = train(blobs3, ObjectiveConfig(epsilon=1e-6),
                     TrainConfig(max_iters=200))
    assert np.abs(model.W.mean(axis=1)).max() < 1e-12
    assert abs(model.b.mean()) < 1e-12


def test_train_deterministic(blobs3):
    cfg_t = TrainConfig(max_iters=100, seed=3)
    m1, _ = train(blobs3, ObjectiveConfig(), cfg_t)
    m2, _ = train(blobs3, ObjectiveConfig(), cfg_t)
    np.testing.assert_array_equal(m1.W, m2.W)
    np.testing.assert_array_equal(m1.b, m2.b)
    m3, _ = train(blobs3, ObjectiveConfig(), TrainConfig(max_iters=100, seed=4))
    assert not np.array_equal(m1.W, m3.W)


def test_train_heavy_regularization_collapses_columns(blobs3):
    model, _ = train(blobs3, ObjectiveConfig(p=2.0, lam=1e6),
                     TrainConfig(max_iters=300))
    # The pairwise penalty dominates, pushing all columns together.
    spread = np.abs(model.W - model.W.mean(axis=1, keepdims=True)).max()
    assert spread < 1e-2


def test_train_records_eval_accuracy(blobs3, blobs2):
    holdout = blobs3.subset(np.arange(0, blobs3.n_samples, 3))
    _, trace = train(blobs3, ObjectiveConfig(),
                     TrainConfig(max_iters=150), eval_set=holdout)
    assert len(trace.eval_accuracy) == trace.n_iters
    assert all(0.0 <= a <= 1.0 for a in trace.eval_accuracy)
    assert trace.eval_accuracy[-1] >= 0.9


def test_train_logistic_loss(blobs3):
    model, _ = train(blobs3, ObjectiveConfig(loss="logistic"),
                     TrainConfig(max_iters=300))
    assert evaluate(model, blobs3).accuracy >= 0.95


def test_train_rejects_unsmoothed_hinge(blobs3):
    with pytest.raises(ValueError, match="delta > 0"):
        train(blobs3, ObjectiveConfig(delta=0.0))


# ---------------------------------------------------------------------------
# Trace export


def test_trace_to_csv_roundtrip(tmp_path, blobs3):
    _, trace = train(blobs3, cfg_train=TrainConfig(max_iters=20),
                     eval_set=blobs3)
    path = tmp_path / "trace.csv"
    trace.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iter,objective,data_loss,reg_term,eps_term,eval_acc"
    assert len(lines) == trace.n_iters + 1
    first = lines[1].split(",")
    assert first[0] == "0"
    # repr round-trips the float exactly.
    assert float(first[1]) == trace.objective[0]
    assert trace.wall_time is not None and "wall" not in lines[0]


# ---------------------------------------------------------------------------
# Gradient check


def test_gradcheck_passes_clean(blobs3):
    report = gradcheck(blobs3, ObjectiveConfig(delta=1e-2), trial_count=3,
                       seed=0, threshold=1e-4)
    assert isinstance(report, GradcheckReport)
    assert report.passed
    assert report.coords_checked > 0
    assert report.max_rel_error < 1e-4


def test_gradcheck_logistic(blobs3):
    report = gradcheck(blobs3, ObjectiveConfig(loss="logistic"),
                       trial_count=3, seed=1, threshold=1e-4)
    assert report.passed


def test_gradcheck_corrupt_fails(blobs3):
    report = gradcheck(blobs3, ObjectiveConfig(delta=1e-2), trial_count=2,
                       seed=0, threshold=1e-4, corrupt=1e-2)
    assert not report.passed
    assert report.max_rel_error > 1e-4


def test_gradcheck_rejects_tiny_delta(blobs3):
    with pytest.raises(ValueError, match="delta >= 1e-3"):
        gradcheck(blobs3, ObjectiveConfig(delta=1e-4))


def test_gradcheck_report_serializes(blobs3):
    report = gradcheck(blobs3, ObjectiveConfig(delta=1e-2), trial_count=1)
    d = report.as_dict()
    assert d["trials"] == 1
    assert isinstance(d["passed"], bool)
