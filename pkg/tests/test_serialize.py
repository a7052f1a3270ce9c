import json

import numpy as np
import pytest

from maxmin_svm.baselines import train_ovo, train_ovr
from maxmin_svm.objective import ObjectiveConfig
from maxmin_svm.optim import TrainConfig, train
from maxmin_svm.serialize import (
    KNOWN_METHODS,
    ModelFormatError,
    SavedModel,
    load_model,
    save_model,
    to_document,
)

CFG_T = TrainConfig(max_iters=60)


def _matrix_saved(data):
    model, _ = train(data, ObjectiveConfig(p=3.0, lam=0.01), CFG_T)
    return SavedModel(
        method="m3svm",
        model=model,
        class_names=data.class_names,
        objective_config=ObjectiveConfig(p=3.0, lam=0.01).as_dict(),
        train_config=CFG_T.as_dict(),
    )


# ---------------------------------------------------------------------------
# Round trips


def test_matrix_roundtrip_bit_exact(tmp_path, blobs3):
    saved = _matrix_saved(blobs3)
    path = tmp_path / "model.json"
    save_model(path, saved)
    back = load_model(path)
    assert back.method == "m3svm"
    assert back.class_names == saved.class_names
    np.testing.assert_array_equal(back.model.W, saved.model.W)
    np.testing.assert_array_equal(back.model.b, saved.model.b)
    assert back.objective_config == saved.objective_config
    assert back.train_config == saved.train_config
    np.testing.assert_array_equal(
        back.predict_indices(blobs3.features),
        saved.predict_indices(blobs3.features),
    )


def test_ovr_roundtrip(tmp_path, blobs3):
    model = train_ovr(blobs3, cfg_train=CFG_T)
    saved = SavedModel(method="ovr", model=model,
                       class_names=blobs3.class_names)
    path = tmp_path / "ovr.json"
    save_model(path, saved)
    back = load_model(path)
    assert back.n_classes == 3
    assert back.n_features == blobs3.n_features
    for ma, mb in zip(model.members, back.model.members):
        np.testing.assert_array_equal(ma.w, mb.w)
        assert ma.b == mb.b
    np.testing.assert_array_equal(
        back.predict_indices(blobs3.features),
        saved.predict_indices(blobs3.features),
    )


def test_ovo_roundtrip(tmp_path, blobs3):
    model = train_ovo(blobs3, cfg_train=CFG_T)
    saved = SavedModel(method="ovo", model=model,
                       class_names=blobs3.class_names)
    path = tmp_path / "ovo.json"
    save_model(path, saved)
    back = load_model(path)
    assert [(k, l) for k, l, _ in back.model.members] == [(0, 1), (0, 2),
                                                          (1, 2)]
    for (_, _, ma), (_, _, mb) in zip(model.members, back.model.members):
        np.testing.assert_array_equal(ma.w, mb.w)
    np.testing.assert_array_equal(
        back.predict_indices(blobs3.features),
        saved.predict_indices(blobs3.features),
    )


def test_save_is_deterministic(tmp_path, blobs3):
    saved = _matrix_saved(blobs3)
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    save_model(p1, saved)
    save_model(p2, saved)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().endswith("\n")


# ---------------------------------------------------------------------------
# Schema and accessors


def test_document_shape(blobs3):
    doc = to_document(_matrix_saved(blobs3))
    assert doc["method"] == "m3svm"
    assert doc["c"] == 3
    assert doc["d"] == blobs3.n_features
    assert len(doc["W"]) == doc["d"]
    assert len(doc["W"][0]) == doc["c"]
    assert len(doc["b"]) == doc["c"]


def test_linear_model_accessor(blobs3):
    saved = _matrix_saved(blobs3)
    assert saved.linear_model() is saved.model
    ovr = SavedModel(method="ovr", model=train_ovr(blobs3, cfg_train=CFG_T),
                     class_names=blobs3.class_names)
    with pytest.raises(ModelFormatError, match="per-member"):
        ovr.linear_model()


def test_known_methods():
    assert set(KNOWN_METHODS) == {"m3svm", "ism3", "crammer", "ww", "multilr",
                                  "ovr", "ovo"}


# ---------------------------------------------------------------------------
# Error paths


def _write(tmp_path, doc):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    return path


def test_load_rejects_invalid_json(tmp_path):
    path = tmp_path / "garbage.json"
    path.write_text("{not json")
    with pytest.raises(ModelFormatError, match="not valid JSON"):
        load_model(path)


def test_load_rejects_unknown_method(tmp_path):
    path = _write(tmp_path, {"method": "forest", "c": 2, "d": 1,
                             "class_names": ["a", "b"]})
    with pytest.raises(ModelFormatError, match="unknown method 'forest'"):
        load_model(path)


def test_load_rejects_missing_field(tmp_path):
    path = _write(tmp_path, {"method": "m3svm", "c": 2, "d": 1,
                             "class_names": ["a", "b"], "b": [0.0, 0.0]})
    with pytest.raises(ModelFormatError, match="missing field 'W'"):
        load_model(path)


def test_load_rejects_shape_mismatch(tmp_path):
    path = _write(tmp_path, {
        "method": "ww", "c": 2, "d": 2, "class_names": ["a", "b"],
        "W": [[0.0, 0.0]], "b": [0.0, 0.0],
    })
    with pytest.raises(ModelFormatError, match="expected \\(2, 2\\)"):
        load_model(path)


def test_load_rejects_name_count(tmp_path):
    path = _write(tmp_path, {"method": "m3svm", "c": 3, "d": 1,
                             "class_names": ["a", "b"],
                             "W": [[0.0, 0.0, 0.0]], "b": [0.0, 0.0, 0.0]})
    with pytest.raises(ModelFormatError, match="class names"):
        load_model(path)


def test_load_rejects_wrong_member_count(tmp_path):
    path = _write(tmp_path, {
        "method": "ovr", "c": 3, "d": 1, "class_names": ["a", "b", "c"],
        "members": [{"k": 0, "w": [1.0], "b": 0.0}],
    })
    with pytest.raises(ModelFormatError, match="needs 3 members"):
        load_model(path)
