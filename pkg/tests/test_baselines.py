import numpy as np
import pytest

from helpers import fd_grads, worst_rel
from maxmin_svm.baselines import (
    BinaryModel,
    OvOModel,
    OvRModel,
    crammer_persample_losses,
    crammer_value_and_grad,
    predict_ovo,
    predict_ovr,
    train_binary_svm,
    train_crammer,
    train_multilr,
    train_ovo,
    train_ovr,
    train_ww,
    ww_persample_losses,
)
from maxmin_svm.objective import ObjectiveConfig, softmax_value_and_grad
from maxmin_svm.optim import TrainConfig, train


# ---------------------------------------------------------------------------
# Model containers


def test_binary_model_scores_and_freeze():
    m = BinaryModel(w=np.array([2.0, -1.0]), b=0.5)
    np.testing.assert_allclose(m.scores(np.array([[1.0, 1.0]])), [1.5])
    assert not m.w.flags.writeable
    with pytest.raises(ValueError):
        BinaryModel(w=np.ones((2, 2)), b=0.0)
    with pytest.raises(ValueError, match="finite"):
        BinaryModel(w=np.array([np.inf]), b=0.0)


def test_ovr_model_validation():
    member = BinaryModel(w=np.zeros(2), b=0.0)
    with pytest.raises(ValueError, match="at least 2"):
        OvRModel(members=(member,))
    m = OvRModel(members=(member, member, member))
    assert m.n_classes == 3
    assert m.class_names == ("0", "1", "2")


def test_ovo_model_validation():
    member = BinaryModel(w=np.zeros(2), b=0.0)
    with pytest.raises(ValueError, match="needs 3 members"):
        OvOModel(n_classes=3, members=((0, 1, member),))


# ---------------------------------------------------------------------------
# Binary SVM


def test_binary_svm_separable(blobs2):
    model = train_binary_svm(blobs2, cfg_train=TrainConfig(max_iters=300))
    pred = np.where(model.scores(blobs2.features) >= 0.0, 0, 1)
    assert (pred == blobs2.labels).mean() == 1.0


def test_binary_svm_rejects(blobs2, blobs3):
    with pytest.raises(ValueError, match="delta must be positive"):
        train_binary_svm(blobs2, delta=0.0)
    with pytest.raises(ValueError, match="exactly 2 classes"):
        train_binary_svm(blobs3)


def test_binary_objective_gradient(blobs2):
    from maxmin_svm.baselines import _binary_value_and_grad

    X = blobs2.features
    s = np.where(blobs2.labels == 0, 1.0, -1.0)
    rng = np.random.default_rng(0)
    w = rng.normal(size=blobs2.n_features)
    b = np.array([rng.normal()])

    def value(wv, bv):
        bd, _ = _binary_value_and_grad((wv, bv), X, s, 0.01, 0.05)
        return bd.total

    _, (gw, gb) = _binary_value_and_grad((w, b), X, s, 0.01, 0.05)
    fd_w, fd_b = fd_grads(value, [w, b])
    assert worst_rel([gw, gb], [fd_w, fd_b]) < 1e-5


# ---------------------------------------------------------------------------
# One-vs-rest


def test_ovr_member_count_and_accuracy(blobs3):
    model = train_ovr(blobs3, cfg_train=TrainConfig(max_iters=300))
    assert len(model.members) == blobs3.n_classes
    pred = predict_ovr(model, blobs3.features)
    assert (pred == blobs3.labels).mean() == 1.0


def test_predict_ovr_hand_votes():
    # Class 1 scores highest for x > 0; ties at the boundary go to 0.
    members = (
        BinaryModel(w=np.array([1.0]), b=0.0),
        BinaryModel(w=np.array([1.0]), b=0.0),
        BinaryModel(w=np.array([-1.0]), b=0.0),
    )
    model = OvRModel(members=members)
    X = np.array([[2.0], [-2.0], [0.0]])
    assert predict_ovr(model, X).tolist() == [0, 2, 0]


# ---------------------------------------------------------------------------
# One-vs-one


def test_ovo_members_k_major(blobs3):
    model = train_ovo(blobs3, cfg_train=TrainConfig(max_iters=300))
    pairs = [(k, l) for k, l, _ in model.members]
    assert pairs == [(0, 1), (0, 2), (1, 2)]
    pred = predict_ovo(model, blobs3.features)
    assert (pred == blobs3.labels).mean() == 1.0


def test_ovo_lambda_overrides(blobs3):
    cfg_t = TrainConfig(max_iters=50)
    base = train_ovo(blobs3, lam=1e-3, cfg_train=cfg_t)
    tweaked = train_ovo(blobs3, lam=1e-3, lam_overrides={(0, 2): 10.0},
                        cfg_train=cfg_t)
    same = base.members[0][2].w
    np.testing.assert_array_equal(same, tweaked.members[0][2].w)
    assert not np.array_equal(base.members[1][2].w, tweaked.members[1][2].w)


def test_predict_ovo_cyclic_tie_goes_low():
    # Each class wins exactly one pair: votes (1, 1, 1) resolve to 0.
    pos = BinaryModel(w=np.array([0.0]), b=1.0)
    neg = BinaryModel(w=np.array([0.0]), b=-1.0)
    model = OvOModel(n_classes=3,
                     members=((0, 1, pos), (0, 2, neg), (1, 2, pos)))
    assert predict_ovo(model, np.zeros((1, 1))).tolist() == [0]


def test_predict_ovo_zero_score_votes_positive():
    zero = BinaryModel(w=np.array([0.0]), b=0.0)
    neg = BinaryModel(w=np.array([0.0]), b=-1.0)
    # Pair (0,1) is on the fence -> votes 0; the others vote 2.
    model = OvOModel(n_classes=3,
                     members=((0, 1, zero), (0, 2, neg), (1, 2, neg)))
    assert predict_ovo(model, np.zeros((1, 1))).tolist() == [2]


# ---------------------------------------------------------------------------
# Max-violation trainer


def test_crammer_gradient(overlap4):
    X, y = overlap4.features, overlap4.labels
    rng = np.random.default_rng(1)
    W = rng.normal(size=(overlap4.n_features, overlap4.n_classes))
    b = rng.normal(size=overlap4.n_classes)

    def value(Wv, bv):
        bd, _ = crammer_value_and_grad(Wv, bv, X, y, 0.01, 0.05, 1e-4)
        return bd.total

    _, (GW, gb) = crammer_value_and_grad(W, b, X, y, 0.01, 0.05, 1e-4)
    fd_W, fd_b = fd_grads(value, [W, b])
    assert worst_rel([GW, gb], [fd_W, fd_b]) < 1e-5


def test_crammer_trains_and_centers(blobs3):
    model = train_crammer(blobs3, cfg_train=TrainConfig(max_iters=300))
    from maxmin_svm.model import evaluate

    assert evaluate(model, blobs3).accuracy >= 0.95
    assert np.abs(model.W.mean(axis=1)).max() < 1e-12
    with pytest.raises(ValueError, match="delta must be positive"):
        train_crammer(blobs3, delta=0.0)


# ---------------------------------------------------------------------------
# Per-sample losses


def test_persample_losses_zero_model():
    X = np.zeros((4, 2))
    y = np.array([0, 1, 2, 0])
    W = np.zeros((2, 3))
    b = np.zeros(3)
    delta = 0.2
    g1 = (1.0 + np.sqrt(1.0 + delta * delta)) / 2.0
    np.testing.assert_allclose(crammer_persample_losses(W, b, X, y, delta),
                               np.full(4, g1), rtol=1e-14)
    np.testing.assert_allclose(ww_persample_losses(W, b, X, y, delta),
                               np.full(4, 2 * g1), rtol=1e-14)


def test_max_le_sum_persample(overlap4):
    rng = np.random.default_rng(2)
    W = rng.normal(size=(overlap4.n_features, overlap4.n_classes))
    b = rng.normal(size=overlap4.n_classes)
    cs = crammer_persample_losses(W, b, overlap4.features, overlap4.labels,
                                  0.05)
    ww = ww_persample_losses(W, b, overlap4.features, overlap4.labels, 0.05)
    assert np.all(cs <= ww)


def test_binary_case_max_equals_sum(blobs2):
    rng = np.random.default_rng(3)
    W = rng.normal(size=(blobs2.n_features, 2))
    b = rng.normal(size=2)
    cs = crammer_persample_losses(W, b, blobs2.features, blobs2.labels, 0.1)
    ww = ww_persample_losses(W, b, blobs2.features, blobs2.labels, 0.1)
    np.testing.assert_array_equal(cs, ww)


# ---------------------------------------------------------------------------
# Sum-of-violations trainer delegates to the pairwise objective


def test_ww_equals_pairwise_p2_scaled(blobs3):
    cfg_t = TrainConfig(max_iters=120, seed=5)
    lam = 0.03
    via_ww = train_ww(blobs3, lam=lam, delta=1e-3, epsilon=1e-6,
                      cfg_train=cfg_t)
    cfg_obj = ObjectiveConfig(p=2.0, lam=lam / blobs3.n_classes,
                              epsilon=1e-6, delta=1e-3)
    direct, _ = train(blobs3, cfg_obj, cfg_t)
    np.testing.assert_array_equal(via_ww.W, direct.W)
    np.testing.assert_array_equal(via_ww.b, direct.b)


# ---------------------------------------------------------------------------
# Multinomial logistic regression


def test_softmax_gradient(overlap4):
    X, y = overlap4.features, overlap4.labels
    rng = np.random.default_rng(4)
    W = rng.normal(size=(overlap4.n_features, overlap4.n_classes))
    b = rng.normal(size=overlap4.n_classes)

    def value(Wv, bv):
        bd, _, _ = softmax_value_and_grad(Wv, bv, X, y, 0.01, 1e-4)
        return bd.total

    _, GW, gb = softmax_value_and_grad(W, b, X, y, 0.01, 1e-4)
    fd_W, fd_b = fd_grads(value, [W, b])
    assert worst_rel([GW, gb], [fd_W, fd_b]) < 1e-5


def test_multilr_trains(blobs3):
    from maxmin_svm.model import evaluate

    model = train_multilr(blobs3, cfg_train=TrainConfig(max_iters=300))
    assert evaluate(model, blobs3).accuracy >= 0.95
    assert abs(model.b.mean()) < 1e-12


# ---------------------------------------------------------------------------
# Trace plumbing and determinism


@pytest.mark.parametrize("trainer", [train_crammer, train_ww, train_multilr])
def test_return_trace_flag(trainer, blobs3):
    cfg_t = TrainConfig(max_iters=30)
    model_only = trainer(blobs3, cfg_train=cfg_t)
    model, trace = trainer(blobs3, cfg_train=cfg_t, return_trace=True)
    np.testing.assert_array_equal(model_only.W, model.W)
    assert trace.n_iters == 30
    assert trace.objective[-1] < trace.objective[0]


def test_ovr_deterministic(blobs3):
    cfg_t = TrainConfig(max_iters=40, seed=7)
    a = train_ovr(blobs3, cfg_train=cfg_t)
    b = train_ovr(blobs3, cfg_train=cfg_t)
    for ma, mb in zip(a.members, b.members):
        np.testing.assert_array_equal(ma.w, mb.w)
        assert ma.b == mb.b
