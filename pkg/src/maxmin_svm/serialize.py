"""Model persistence: one JSON schema for every method, tagged by name.

Single-matrix methods (``m3svm``, ``ism3``, ``crammer``, ``ww``,
``multilr``) store ``{method, d, c, W, b, class_names, objective_config,
train_config}`` with ``W`` as a row-major nested list (d rows of c
entries).  ``ovr`` and ``ovo`` replace ``W``/``b`` with a ``members``
array of per-model ``{k[, l], w, b}`` records.  Floats are written with
full ``repr`` precision, so a load reproduces every value bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .baselines import BinaryModel, OvOModel, OvRModel, predict_ovo, predict_ovr
from .model import LinearModel, predict as _predict_linear

_SINGLE_MATRIX_METHODS = ("m3svm", "ism3", "crammer", "ww", "multilr")
_MEMBER_METHODS = ("ovr", "ovo")
KNOWN_METHODS = _SINGLE_MATRIX_METHODS + _MEMBER_METHODS


class ModelFormatError(ValueError):
    """Raised when a model file does not match the documented schema."""


@dataclass(frozen=True)
class SavedModel:
    """A trained model together with its method tag and configurations.

    ``model`` is a :class:`~maxmin_svm.model.LinearModel` for
    single-matrix methods, or an OvR/OvO container for the decomposition
    methods.  The config dicts echo whatever hyperparameters trained the
    model; they are documentation, not behavior.
    """

    method: str
    model: object
    class_names: tuple
    objective_config: dict = None
    train_config: dict = None

    @property
    def n_classes(self):
        return len(self.class_names)

    @property
    def n_features(self):
        if isinstance(self.model, LinearModel):
            return self.model.n_features
        if isinstance(self.model, OvRModel):
            return self.model.members[0].w.shape[0]
        return self.model.members[0][2].w.shape[0]

    def predict_indices(self, X):
        """Predicted class indices for a feature matrix."""
        if isinstance(self.model, LinearModel):
            return _predict_linear(self.model, X)
        if isinstance(self.model, OvRModel):
            return predict_ovr(self.model, X)
        return predict_ovo(self.model, X)

    def linear_model(self):
        """The single-matrix model, or an error for member-based methods."""
        if not isinstance(self.model, LinearModel):
            raise ModelFormatError(
                f"method {self.method!r} stores per-member hyperplanes, not "
                f"a single weight matrix"
            )
        return self.model


def _require(doc, field, path):
    if field not in doc:
        raise ModelFormatError(f"{path}: model file is missing field {field!r}")
    return doc[field]


def to_document(saved):
    """JSON-ready dict for a :class:`SavedModel`."""
    doc = {
        "method": saved.method,
        "c": saved.n_classes,
        "d": saved.n_features,
        "class_names": list(saved.class_names),
        "objective_config": saved.objective_config,
        "train_config": saved.train_config,
    }
    if isinstance(saved.model, LinearModel):
        doc["W"] = saved.model.W.tolist()
        doc["b"] = saved.model.b.tolist()
    elif isinstance(saved.model, OvRModel):
        doc["members"] = [
            {"k": k, "w": m.w.tolist(), "b": m.b}
            for k, m in enumerate(saved.model.members)
        ]
    else:
        doc["members"] = [
            {"k": k, "l": l, "w": m.w.tolist(), "b": m.b}
            for k, l, m in saved.model.members
        ]
    return doc


def save_model(path, saved):
    """Write a :class:`SavedModel` as deterministic, full-precision JSON."""
    with open(path, "w") as fh:
        json.dump(to_document(saved), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path):
    """Load a model file written by :func:`save_model`."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not valid JSON ({exc})") from None
    method = _require(doc, "method", path)
    if method not in KNOWN_METHODS:
        raise ModelFormatError(
            f"{path}: unknown method {method!r}; known: {', '.join(KNOWN_METHODS)}"
        )
    c = int(_require(doc, "c", path))
    d = int(_require(doc, "d", path))
    names = tuple(str(s) for s in _require(doc, "class_names", path))
    if len(names) != c:
        raise ModelFormatError(
            f"{path}: {len(names)} class names for c={c}"
        )
    obj_cfg = doc.get("objective_config")
    train_cfg = doc.get("train_config")
    if method in _SINGLE_MATRIX_METHODS:
        W = np.asarray(_require(doc, "W", path), dtype=np.float64)
        b = np.asarray(_require(doc, "b", path), dtype=np.float64)
        if W.shape != (d, c):
            raise ModelFormatError(
                f"{path}: W has shape {W.shape}, expected ({d}, {c})"
            )
        model = LinearModel(W, b, class_names=names)
    elif method == "ovr":
        members = []
        for rec in _require(doc, "members", path):
            members.append(BinaryModel(
                w=np.asarray(rec["w"], dtype=np.float64), b=float(rec["b"])
            ))
        if len(members) != c:
            raise ModelFormatError(
                f"{path}: ovr model needs {c} members, got {len(members)}"
            )
        model = OvRModel(members=tuple(members), class_names=names)
    else:
        members = []
        for rec in _require(doc, "members", path):
            members.append((
                int(rec["k"]),
                int(rec["l"]),
                BinaryModel(w=np.asarray(rec["w"], dtype=np.float64),
                            b=float(rec["b"])),
            ))
        model = OvOModel(n_classes=c, members=tuple(members))
    return SavedModel(
        method=method,
        model=model,
        class_names=names,
        objective_config=obj_cfg,
        train_config=train_cfg,
    )
