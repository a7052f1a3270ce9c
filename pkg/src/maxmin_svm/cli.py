"""Command-line interface for training, evaluation, and verification.

Commands
--------
train       fit a model, write ``model.json`` and ``trace.csv``
predict     label a feature file with a saved model
eval        accuracy and confusion matrix of a saved model on labeled data
cv          cross-validation report, optionally with honest inner tuning
gridsearch  CV accuracy and refit min-margin for every (p, lambda) cell
compare     tuned-CV summary of several methods under one shared protocol
margins     all pairwise margins of a saved single-matrix model
gradcheck   finite-difference audit of the analytic gradients
verify      the seeded property suite covering every module

Exit codes
----------
0   success
1   a verification or gradient check reported failures
2   usage, configuration, data, or model-file errors

Configuration
-------------
Every setting resolves in the same order: an explicit command-line flag
wins; otherwise the value from the flat JSON file named by ``--config``;
otherwise the built-in default.  The config file is a single JSON object
whose keys are flag names with underscores (``{"method": "m3svm",
"grid_lambda": [0.001, 0.01]}``).  The environment variable
``MAXMIN_SVM_SEED``, when set, replaces the built-in default seed; flags
and config files still win over it.

All outputs are deterministic for a fixed seed: JSON is written with
sorted keys, floats are written with ``repr``, and nothing records
timestamps, so reruns and different ``--jobs`` values produce
bit-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .baselines import (
    BinaryModel,
    OvOModel,
    OvRModel,
    train_crammer,
    train_multilr,
    train_ovo,
    train_ovr,
    train_ww,
)
from .data import (
    BUNDLED_DATASETS,
    DataError,
    Standardizer,
    load_bundled,
    load_csv,
    load_feature_csv,
    load_libsvm,
)
from .model import LinearModel, margin_report
from .model_selection import (
    METHODS,
    compare_methods,
    consensus_params,
    cross_validate,
    default_lambda_grid,
    default_p_grid,
    grid_search,
    make_estimator,
    method_param_grid,
    nested_cv,
    refit,
)
from .objective import ObjectiveConfig
from .optim import TrainConfig, gradcheck, train
from .serialize import SavedModel, load_model, save_model
from .verify import blob_dataset, run_verification

_P_METHODS = ("m3svm", "ism3")

# Hyperparameters each method's trainer understands; anything explicitly
# set outside this set is a configuration error, not a silent ignore.
_METHOD_FIELDS = {
    "m3svm": ("p", "lam", "epsilon", "delta", "reg_norm"),
    "ism3": ("p", "lam", "epsilon", "delta", "reg_norm"),
    "ovr": ("lam", "delta"),
    "ovo": ("lam", "delta"),
    "crammer": ("lam", "delta", "epsilon"),
    "ww": ("lam", "delta", "epsilon"),
    "multilr": ("lam", "epsilon"),
}


class ConfigError(ValueError):
    """Raised for malformed or method-incompatible configuration."""


# ---------------------------------------------------------------------------
# Run configuration


def _as_bool(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, str):
        if v.lower() in ("true", "1", "yes", "on"):
            return True
        if v.lower() in ("false", "0", "no", "off"):
            return False
    raise ConfigError(f"expected a boolean, got {v!r}")


def _as_float_list(v):
    if isinstance(v, (int, float)):
        return [float(v)]
    if isinstance(v, str):
        v = [tok for tok in v.split(",") if tok.strip()]
    try:
        out = [float(x) for x in v]
    except (TypeError, ValueError):
        raise ConfigError(f"expected a list of numbers, got {v!r}") from None
    if not out:
        raise ConfigError("expected a nonempty list of numbers")
    return out


def _as_label_column(v):
    if isinstance(v, bool):
        raise ConfigError(f"label_column must be an index or name, got {v!r}")
    if isinstance(v, int):
        return v
    try:
        return int(str(v))
    except ValueError:
        return str(v)


def _as_methods(v):
    if isinstance(v, str):
        v = [tok.strip() for tok in v.split(",") if tok.strip()]
    methods = [str(m) for m in v]
    if not methods:
        raise ConfigError("expected a nonempty list of methods")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ConfigError(
            f"unknown methods {unknown}; known: {', '.join(METHODS)}"
        )
    return methods


def _checked(cast):
    def convert(v):
        try:
            return cast(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    return convert


def _default_seed():
    raw = os.environ.get("MAXMIN_SVM_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(
            f"MAXMIN_SVM_SEED must be an integer, got {raw!r}"
        ) from None


@dataclass
class RunConfig:
    """Resolved settings shared by the subcommands.

    Method-specific hyperparameters default to ``None`` meaning "not
    supplied", so their numeric defaults apply per method and supplying
    one for a method that lacks it is a detectable error.
    """

    dataset: str = None
    data_format: str = "auto"
    label_column: object = -1
    header: bool = True
    method: str = None
    methods: list = None
    p: float = None
    lam: float = None
    epsilon: float = None
    delta: float = None
    reg_norm: str = None
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    max_iters: int = 2000
    rel_tol: float = 1e-8
    seed: int = 0
    cv_k: int = 5
    cv_seed: int = None
    grid_p: list = None
    grid_lambda: list = None
    log_lambda: bool = False
    tune: bool = False
    standardize: bool = False
    runs: int = 1
    output_dir: str = "."
    jobs: int = 1


_CASTERS = {
    "dataset": str,
    "data_format": str,
    "label_column": _as_label_column,
    "header": _as_bool,
    "method": str,
    "methods": _as_methods,
    "p": _checked(float),
    "lam": _checked(float),
    "epsilon": _checked(float),
    "delta": _checked(float),
    "reg_norm": str,
    "learning_rate": _checked(float),
    "beta1": _checked(float),
    "beta2": _checked(float),
    "adam_eps": _checked(float),
    "max_iters": _checked(int),
    "rel_tol": _checked(float),
    "seed": _checked(int),
    "cv_k": _checked(int),
    "cv_seed": _checked(int),
    "grid_p": _as_float_list,
    "grid_lambda": _as_float_list,
    "log_lambda": _as_bool,
    "tune": _as_bool,
    "standardize": _as_bool,
    "runs": _checked(int),
    "output_dir": str,
    "jobs": _checked(int),
}


def _load_config_file(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a flat JSON object")
    unknown = sorted(set(doc) - set(_CASTERS))
    if unknown:
        raise ConfigError(
            f"{path}: unknown config keys {unknown}; known keys: "
            f"{', '.join(sorted(_CASTERS))}"
        )
    return doc


def resolve_config(args):
    """Merge flags over the ``--config`` file over built-in defaults."""
    cfg = RunConfig(seed=_default_seed())
    layers = []
    if getattr(args, "config", None):
        layers.append(_load_config_file(args.config))
    layers.append(
        {
            name: getattr(args, name)
            for name in _CASTERS
            if getattr(args, name, None) is not None
        }
    )
    for layer in layers:
        for name, value in layer.items():
            setattr(cfg, name, _CASTERS[name](value))
    if cfg.method is not None and cfg.method not in METHODS:
        raise ConfigError(
            f"unknown method {cfg.method!r}; known: {', '.join(METHODS)}"
        )
    if cfg.data_format not in ("auto", "csv", "libsvm"):
        raise ConfigError(
            f"data_format must be auto, csv, or libsvm, got "
            f"{cfg.data_format!r}"
        )
    if cfg.cv_seed is None:
        cfg.cv_seed = cfg.seed
    return cfg


def _require_method(cfg):
    if cfg.method is None:
        raise ConfigError("a method is required (--method, one of "
                          + ", ".join(METHODS) + ")")
    return cfg.method


def _check_method_fields(cfg, method):
    allowed = _METHOD_FIELDS[method]
    for name in ("p", "lam", "epsilon", "delta", "reg_norm"):
        if getattr(cfg, name) is not None and name not in allowed:
            raise ConfigError(
                f"{name} not applicable to method {method!r}"
            )
    if cfg.grid_p is not None and method not in _P_METHODS:
        raise ConfigError(f"grid_p not applicable to method {method!r}")


def _estimator_params(cfg, method):
    params = {
        "learning_rate": cfg.learning_rate,
        "beta1": cfg.beta1,
        "beta2": cfg.beta2,
        "adam_eps": cfg.adam_eps,
        "max_iters": cfg.max_iters,
        "rel_tol": cfg.rel_tol,
        "random_state": cfg.seed,
    }
    for name in _METHOD_FIELDS[method]:
        value = getattr(cfg, name)
        if value is not None:
            params[name] = value
    return params


def _objective_config(cfg, method):
    kwargs = {"loss": "smoothed_hinge" if method == "m3svm" else "logistic"}
    for name in ("p", "lam", "epsilon", "delta", "reg_norm"):
        value = getattr(cfg, name)
        if value is not None:
            kwargs[name] = value
    return ObjectiveConfig(**kwargs)


def _train_config(cfg):
    return TrainConfig(
        learning_rate=cfg.learning_rate,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        adam_eps=cfg.adam_eps,
        max_iters=cfg.max_iters,
        rel_tol=cfg.rel_tol,
        seed=cfg.seed,
    )


def _param_grid(cfg, method):
    lam_values = cfg.grid_lambda
    if lam_values is None:
        lam_values = default_lambda_grid(log_spacing=cfg.log_lambda)
    p_values = None
    if method in _P_METHODS:
        p_values = cfg.grid_p if cfg.grid_p is not None else default_p_grid()
    return method_param_grid(method, p_values=p_values,
                             lambda_values=lam_values)


# ---------------------------------------------------------------------------
# Data and artifact helpers


def _load_dataset(cfg):
    if cfg.dataset is None:
        raise ConfigError(
            "a dataset is required (--dataset PATH, or a bundled name: "
            + ", ".join(BUNDLED_DATASETS) + ")"
        )
    if cfg.dataset in BUNDLED_DATASETS and not os.path.exists(cfg.dataset):
        return load_bundled(cfg.dataset)
    fmt = cfg.data_format
    if fmt == "auto":
        ext = os.path.splitext(cfg.dataset)[1].lower()
        fmt = "libsvm" if ext in (".libsvm", ".svm", ".svmlight") else "csv"
    if fmt == "libsvm":
        return load_libsvm(cfg.dataset)
    return load_csv(cfg.dataset, label_column=cfg.label_column,
                    header=cfg.header)


def _write_json(path, payload):
    with open(path, "w") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True))
        fh.write("\n")


def _write_csv_rows(path, header, rows):
    import csv as _csv

    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _cell(v):
    # CSV cell text: repr for floats (bit-exact reload), blank for None.
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _table(headers, rows):
    """Aligned plain-text table; numbers shown to 4 decimals."""

    def fmt(v):
        if isinstance(v, float):
            return f"{v:.4f}"
        return str(v)

    cells = [[fmt(v) for v in row] for row in rows]
    widths = [
        max(len(h), *(len(r[j]) for r in cells)) if cells else len(h)
        for j, h in enumerate(headers)
    ]
    lines = ["  ".join(h.rjust(w) for h, w in zip(headers, widths))]
    for row in cells:
        lines.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
    return "\n".join(lines)


def _markdown_table(headers, rows):
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.4f}"
        return str(v)

    lines = ["| " + " | ".join(headers) + " |",
             "| " + " | ".join("---" for _ in headers) + " |"]
    for row in rows:
        lines.append("| " + " | ".join(fmt(v) for v in row) + " |")
    return "\n".join(lines)


def _out_path(cfg, name):
    os.makedirs(cfg.output_dir, exist_ok=True)
    return os.path.join(cfg.output_dir, name)


def _fold_standardizer(model, std):
    """Rewrite a model trained on standardized features to act on raw ones.

    With ``x_std = (x - m) / s`` the scores ``W' x_std + b'`` equal
    ``(W'/s) x + (b' - (m/s) W')``, exactly; the returned model predicts
    raw inputs with no scaler at load time.
    """
    m = np.asarray(std.mean_, dtype=np.float64)
    s = np.asarray(std.scale_, dtype=np.float64)
    if isinstance(model, LinearModel):
        W = model.W / s[:, None]
        b = model.b - (m / s) @ model.W
        return LinearModel(W, b, class_names=model.class_names)
    if isinstance(model, OvRModel):
        members = tuple(
            BinaryModel(w=mem.w / s, b=float(mem.b - (m / s) @ mem.w))
            for mem in model.members
        )
        return OvRModel(members=members, class_names=model.class_names)
    members = tuple(
        (k, l, BinaryModel(w=mem.w / s, b=float(mem.b - (m / s) @ mem.w)))
        for k, l, mem in model.members
    )
    return OvOModel(n_classes=model.n_classes, members=members)


def _align_labels(dataset, saved):
    """Dataset label indices re-encoded in the saved model's class order."""
    index = {name: i for i, name in enumerate(saved.class_names)}
    missing = [n for n in dataset.class_names if n not in index]
    if missing:
        raise DataError(
            f"data contains classes unknown to the model: {missing}; "
            f"model classes: {list(saved.class_names)}"
        )
    lut = np.array([index[n] for n in dataset.class_names], dtype=np.int64)
    return lut[dataset.labels]


def _check_width(X, saved):
    if X.shape[1] != saved.n_features:
        raise DataError(
            f"data has {X.shape[1]} features but the model expects "
            f"{saved.n_features}"
        )


def _predicted_names(saved, X):
    idx = saved.predict_indices(X)
    return idx, [saved.class_names[i] for i in idx]


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_train(args):
    cfg = resolve_config(args)
    method = _require_method(cfg)
    _check_method_fields(cfg, method)
    raw = data = _load_dataset(cfg)
    std = None
    if cfg.standardize:
        std = Standardizer().fit(data.features)
        data = std.transform_dataset(data)
    cfg_train = _train_config(cfg)
    trace = None
    if method in _P_METHODS:
        cfg_obj = _objective_config(cfg, method)
        model, trace = train(data, cfg_obj, cfg_train)
        obj_doc = cfg_obj.as_dict()
    else:
        hyper = {
            name: getattr(cfg, name)
            for name in _METHOD_FIELDS[method]
            if getattr(cfg, name) is not None
        }
        obj_doc = dict(hyper)
        if method == "crammer":
            model, trace = train_crammer(data, cfg_train=cfg_train,
                                         return_trace=True, **hyper)
        elif method == "ww":
            model, trace = train_ww(data, cfg_train=cfg_train,
                                    return_trace=True, **hyper)
        elif method == "multilr":
            model, trace = train_multilr(data, cfg_train=cfg_train,
                                         return_trace=True, **hyper)
        elif method == "ovr":
            model = train_ovr(data, cfg_train=cfg_train, **hyper)
        else:
            model = train_ovo(data, cfg_train=cfg_train, **hyper)
    if std is not None:
        model = _fold_standardizer(model, std)
        obj_doc["standardized"] = True
    saved = SavedModel(
        method=method,
        model=model,
        class_names=data.class_names,
        objective_config=obj_doc,
        train_config=cfg_train.as_dict(),
    )
    model_path = _out_path(cfg, "model.json")
    save_model(model_path, saved)
    # The saved model acts on raw features (scaling is folded in above).
    pred = saved.predict_indices(raw.features)
    acc = float((pred == raw.labels).mean())
    print(
        f"trained {method} on {data.n_samples} samples, "
        f"{data.n_features} features, {data.n_classes} classes"
    )
    if trace is not None:
        print(f"final objective {trace.objective[-1]:.6f} "
              f"after {trace.n_iters} iterations")
    print(f"train accuracy {acc:.4f}")
    if isinstance(model, LinearModel) and std is None:
        rep = margin_report(model)
        k, l = rep.argmin_pair
        print(f"min pairwise margin {rep.min_margin:.4f} "
              f"(classes {model.class_names[k]!s}-{model.class_names[l]!s})")
    print(f"wrote {model_path}")
    if trace is not None:
        trace_path = _out_path(cfg, "trace.csv")
        trace.to_csv(trace_path)
        print(f"wrote {trace_path}")
    else:
        print(f"no trace for per-member method {method!r}")
    return 0


def _cmd_predict(args):
    cfg = resolve_config(args)
    saved = load_model(args.model)
    if args.no_label:
        X = load_feature_csv(args.data, header=cfg.header)
    else:
        X = load_csv(args.data, label_column=cfg.label_column,
                     header=cfg.header).features
    _check_width(X, saved)
    _, names = _predicted_names(saved, X)
    out = _out_path(cfg, "predictions.csv")
    _write_csv_rows(out, ["index", "prediction"],
                    [[str(i), name] for i, name in enumerate(names)])
    counts = Counter(names)
    summary = ", ".join(f"{name}: {counts[name]}"
                        for name in saved.class_names if name in counts)
    print(f"predicted {len(names)} samples ({summary})")
    print(f"wrote {out}")
    return 0


def _cmd_eval(args):
    cfg = resolve_config(args)
    saved = load_model(args.model)
    data = load_csv(args.data, label_column=cfg.label_column,
                    header=cfg.header)
    _check_width(data.features, saved)
    y = _align_labels(data, saved)
    pred = saved.predict_indices(data.features)
    c = saved.n_classes
    confusion = np.zeros((c, c), dtype=np.int64)
    np.add.at(confusion, (y, pred), 1)
    acc = float((pred == y).mean())
    payload = {
        "accuracy": acc,
        "class_names": list(saved.class_names),
        "confusion": confusion.tolist(),
        "method": saved.method,
        "n_samples": int(y.shape[0]),
    }
    out = _out_path(cfg, "eval.json")
    _write_json(out, payload)
    print(f"accuracy {acc:.4f} on {y.shape[0]} samples")
    headers = ["true\\pred"] + [str(n) for n in saved.class_names]
    rows = [
        [str(saved.class_names[i])] + [int(v) for v in confusion[i]]
        for i in range(c)
    ]
    print(_table(headers, rows))
    print(f"wrote {out}")
    return 0


def _refit_margins(cfg, method, dataset, params):
    est = make_estimator(method, **_estimator_params(cfg, method))
    fitted, _ = refit(est, dataset, params=params,
                      standardize=cfg.standardize)
    if not hasattr(fitted, "margin_report"):
        return None, params
    return fitted.margin_report(), params


def _cmd_cv(args, cfg=None):
    if cfg is None:
        cfg = resolve_config(args)
    method = _require_method(cfg)
    _check_method_fields(cfg, method)
    data = _load_dataset(cfg)
    tuned = cfg.tune or cfg.grid_p is not None or cfg.grid_lambda is not None
    payload = {
        "method": method,
        "k": cfg.cv_k,
        "seed": cfg.cv_seed,
        "standardize": cfg.standardize,
    }
    est = make_estimator(method, **_estimator_params(cfg, method))
    if tuned:
        grid = _param_grid(cfg, method)
        report = nested_cv(est, data, grid, k=cfg.cv_k, seed=cfg.cv_seed,
                           standardize=cfg.standardize, n_jobs=cfg.jobs)
        result = report.result
        refit_params = consensus_params(report.best_params_per_fold)
        payload["best_params_per_fold"] = [
            dict(p) for p in report.best_params_per_fold
        ]
    else:
        result = cross_validate(est, data, k=cfg.cv_k, seed=cfg.cv_seed,
                                standardize=cfg.standardize, n_jobs=cfg.jobs)
        refit_params = None
    margins, refit_params = _refit_margins(cfg, method, data, refit_params)
    payload.update(result.as_dict())
    payload["refit_params"] = refit_params
    payload["margin_report"] = margins.as_dict() if margins else None
    out = _out_path(cfg, "cv.json")
    _write_json(out, payload)
    mode = "tuned (inner grid per fold)" if tuned else "fixed hyperparameters"
    print(f"{method}: {cfg.cv_k}-fold CV, seed {cfg.cv_seed}, {mode}")
    print(_table(["fold", "accuracy"],
                 [[i, a] for i, a in enumerate(result.fold_accuracies)]))
    print(f"mean {result.mean:.4f}  std {result.std:.4f}")
    if margins is not None:
        k, l = margins.argmin_pair
        print(f"refit min margin {margins.min_margin:.4f} "
              f"(classes {data.class_names[k]!s}-{data.class_names[l]!s})")
    print(f"wrote {out}")
    return 0


def _cmd_gridsearch(args):
    cfg = resolve_config(args)
    method = _require_method(cfg)
    _check_method_fields(cfg, method)
    data = _load_dataset(cfg)
    grid = _param_grid(cfg, method)
    est = make_estimator(method, **_estimator_params(cfg, method))
    cells = grid_search(est, data, grid, k=cfg.cv_k, seed=cfg.cv_seed,
                        standardize=cfg.standardize, n_jobs=cfg.jobs)
    margins = Parallel(n_jobs=cfg.jobs)(
        delayed(_refit_margins)(cfg, method, data, cell.params)
        for cell in cells
    )
    rows = []
    for cell, (rep, _) in zip(cells, margins):
        rows.append([
            _cell(cell.params.get("p")),
            _cell(cell.params["lam"]),
            _cell(cell.result.mean),
            _cell(cell.result.std),
            _cell(rep.min_margin if rep is not None else None),
        ])
    out = _out_path(cfg, "grid.csv")
    _write_csv_rows(out, ["p", "lambda", "mean_acc", "std", "min_margin"],
                    rows)
    best = max(cells, key=lambda cell: cell.result.mean)
    print(f"{method}: {len(cells)} grid cells, {cfg.cv_k}-fold CV, "
          f"seed {cfg.cv_seed}")
    print(f"best cell {best.params} mean {best.result.mean:.4f} "
          f"std {best.result.std:.4f}")
    print(f"wrote {out}")
    return 0


def _cmd_compare(args):
    cfg = resolve_config(args)
    methods = cfg.methods if cfg.methods is not None else list(METHODS)
    if len(methods) == 1:
        # A single method is just a cross-validation run; reuse cmd cv so
        # both paths produce the same artifact for the same protocol.
        cfg.method = methods[0]
        cfg.tune = True
        return _cmd_cv(args, cfg=cfg)
    data = _load_dataset(cfg)
    overrides = {
        "learning_rate": cfg.learning_rate,
        "beta1": cfg.beta1,
        "beta2": cfg.beta2,
        "adam_eps": cfg.adam_eps,
        "max_iters": cfg.max_iters,
        "rel_tol": cfg.rel_tol,
        "random_state": cfg.seed,
    }
    lam_values = cfg.grid_lambda
    if lam_values is None:
        lam_values = default_lambda_grid(log_spacing=cfg.log_lambda)
    reports = compare_methods(
        data,
        methods=methods,
        k=cfg.cv_k,
        n_runs=cfg.runs,
        base_seed=cfg.cv_seed,
        p_values=cfg.grid_p,
        lambda_values=lam_values,
        standardize=cfg.standardize,
        n_jobs=cfg.jobs,
        estimator_overrides=overrides,
    )
    rows = []
    for name in methods:
        rep = reports[name]
        chosen = consensus_params(rep.best_params_per_run)
        rows.append([name, rep.mean, rep.std, json.dumps(chosen,
                                                         sort_keys=True)])
    md = _markdown_table(["method", "mean_acc", "std", "best_params"], rows)
    md_path = _out_path(cfg, "compare.md")
    with open(md_path, "w") as fh:
        fh.write(md + "\n")
    payload = {
        "base_seed": cfg.cv_seed,
        "k": cfg.cv_k,
        "n_runs": cfg.runs,
        "standardize": cfg.standardize,
        "methods": {name: reports[name].as_dict() for name in methods},
    }
    json_path = _out_path(cfg, "compare.json")
    _write_json(json_path, payload)
    print(md)
    print(f"wrote {md_path}")
    print(f"wrote {json_path}")
    return 0


def _cmd_margins(args):
    cfg = resolve_config(args)
    saved = load_model(args.model)
    model = saved.linear_model()
    if args.data is not None:
        data = load_csv(args.data, label_column=cfg.label_column,
                        header=cfg.header)
        _check_width(data.features, saved)
    rep = margin_report(model)
    names = saved.class_names
    rows = [
        [str(k), str(l), str(names[k]), str(names[l]), _cell(m)]
        for k, l, m in rep.pair_margins
    ]
    out = _out_path(cfg, "margins.csv")
    _write_csv_rows(out, ["k", "l", "class_k", "class_l", "margin"], rows)
    print(_table(["pair", "margin"],
                 [[f"{names[k]!s}-{names[l]!s}", m]
                  for k, l, m in rep.pair_margins]))
    k, l = rep.argmin_pair
    print(f"min margin {rep.min_margin:.4f} "
          f"(pair {k}-{l}: {names[k]!s}-{names[l]!s})")
    print(f"wrote {out}")
    return 0


def _cmd_gradcheck(args):
    cfg = resolve_config(args)
    method = cfg.method if cfg.method is not None else "m3svm"
    if method not in _P_METHODS:
        raise ConfigError(
            f"gradcheck audits the pairwise objective; method must be one "
            f"of {', '.join(_P_METHODS)}, got {method!r}"
        )
    _check_method_fields(cfg, method)
    if cfg.dataset is not None:
        data = _load_dataset(cfg)
    else:
        rng = np.random.default_rng(cfg.seed)
        data = blob_dataset(rng, n_per=20, c=3, d=4, sep=2.0, spread=1.0)
    if cfg.delta is None:
        # Central differences at step 1e-6 carry ~1e-9 absolute noise; the
        # default width keeps hinge curvature well above that floor.
        cfg.delta = 1e-2
    cfg_obj = _objective_config(cfg, method)
    report = gradcheck(
        data,
        cfg_obj=cfg_obj,
        trial_count=args.trials,
        seed=cfg.seed,
        threshold=args.threshold,
        corrupt=args.corrupt_gradient,
    )
    out = _out_path(cfg, "gradcheck.json")
    _write_json(out, report.as_dict())
    status = "PASS" if report.passed else "FAIL"
    print(
        f"[{status}] gradcheck: {report.trials} trials, "
        f"{report.coords_checked} coordinates, max rel error "
        f"{report.max_rel_error:.3e} (threshold {report.threshold:g})"
    )
    print(f"wrote {out}")
    return 0 if report.passed else 1


def _cmd_verify(args):
    cfg = resolve_config(args)
    include = None
    if args.checks:
        include = [tok.strip() for tok in args.checks.split(",")
                   if tok.strip()]
    report = run_verification(
        seed=cfg.seed,
        include=include,
        corrupt_gradient=args.corrupt_gradient,
    )
    for res in report.results:
        print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}")
    n = len(report.results)
    print(f"{report.n_passed}/{n} checks passed (seed {cfg.seed})")
    if not report.passed:
        print("failed: " + ", ".join(report.failed_names))
    out = _out_path(cfg, "verify.json")
    _write_json(out, report.as_dict())
    print(f"wrote {out}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# Parser


def _add_config_flag(p):
    p.add_argument("--config", metavar="FILE",
                   help="flat JSON object providing defaults for any flag")


def _add_output_flags(p):
    p.add_argument("--output-dir", metavar="DIR",
                   help="directory for written artifacts (default .)")


def _add_data_flags(p):
    help_ds = "CSV/libsvm path, or a bundled name: " + ", ".join(
        BUNDLED_DATASETS)
    p.add_argument("--dataset", metavar="PATH", help=help_ds)
    p.add_argument("--data-format", choices=("auto", "csv", "libsvm"),
                   dest="data_format",
                   help="input format (default: by file extension)")
    p.add_argument("--label-column", dest="label_column",
                   help="CSV label column index or name (default -1, last)")
    p.add_argument("--no-header", dest="header", action="store_false",
                   default=None, help="CSV has no header row")


def _add_method_flags(p, include_method=True):
    if include_method:
        p.add_argument("--method", choices=METHODS,
                       help="training method")
    p.add_argument("--p", type=float,
                   help="pairwise-difference exponent (m3svm/ism3 only)")
    p.add_argument("--lam", type=float, help="regularization strength")
    p.add_argument("--epsilon", type=float,
                   help="mean-pinning ridge coefficient")
    p.add_argument("--delta", type=float, help="hinge smoothing width")
    p.add_argument("--reg-norm", choices=("l2", "l1"), dest="reg_norm",
                   help="norm inside the pairwise regularizer "
                        "(m3svm/ism3 only)")


def _add_optim_flags(p):
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--adam-eps", type=float, dest="adam_eps")
    p.add_argument("--max-iters", type=int, dest="max_iters")
    p.add_argument("--rel-tol", type=float, dest="rel_tol")
    p.add_argument("--seed", type=int,
                   help="seed (default: MAXMIN_SVM_SEED or 0)")


def _add_protocol_flags(p):
    p.add_argument("--cv-k", type=int, dest="cv_k",
                   help="number of folds (default 5; k=n is leave-one-out)")
    p.add_argument("--cv-seed", type=int, dest="cv_seed",
                   help="fold assignment seed (default: --seed)")
    p.add_argument("--standardize", action="store_true", default=None,
                   help="standardize features, statistics from train "
                        "folds only")
    p.add_argument("--jobs", type=int,
                   help="parallel workers; results identical at any count")


def _add_grid_flags(p):
    p.add_argument("--grid-p", dest="grid_p", metavar="LIST",
                   help="comma-separated p grid (default 1..8)")
    p.add_argument("--grid-lambda", dest="grid_lambda", metavar="LIST",
                   help="comma-separated lambda grid (default 10 values "
                        "linear over [1e-4, 1e-1])")
    p.add_argument("--log-lambda", dest="log_lambda", action="store_true",
                   default=None,
                   help="space the default lambda grid geometrically")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="maxmin-svm",
        description="Multi-class linear classifiers that maximize the "
                    "minimum pairwise class margin, with baselines and a "
                    "property verification suite.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command",
                                required=True)

    p = sub.add_parser("train", help="fit a model, write model.json and "
                                     "trace.csv")
    _add_config_flag(p)
    _add_data_flags(p)
    _add_method_flags(p)
    _add_optim_flags(p)
    p.add_argument("--standardize", action="store_true", default=None,
                   help="standardize features; the scaling is folded into "
                        "the saved model, which then takes raw inputs")
    _add_output_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="label a feature file with a saved "
                                       "model")
    _add_config_flag(p)
    p.add_argument("--model", required=True, metavar="FILE",
                   help="model.json written by train")
    p.add_argument("--data", required=True, metavar="FILE",
                   help="CSV to label")
    p.add_argument("--no-label", action="store_true",
                   help="the CSV has no label column; all columns are "
                        "features")
    p.add_argument("--label-column", dest="label_column",
                   help="label column to drop (default -1)")
    p.add_argument("--no-header", dest="header", action="store_false",
                   default=None)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("eval", help="accuracy and confusion matrix on "
                                    "labeled data")
    _add_config_flag(p)
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--data", required=True, metavar="FILE")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--no-header", dest="header", action="store_false",
                   default=None)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("cv", help="cross-validation report (JSON + table)")
    _add_config_flag(p)
    _add_data_flags(p)
    _add_method_flags(p)
    _add_optim_flags(p)
    _add_protocol_flags(p)
    _add_grid_flags(p)
    p.add_argument("--tune", action="store_true", default=None,
                   help="select (p, lambda) by an inner grid search on "
                        "each training fold (no test leakage); implied "
                        "when a grid flag is given")
    _add_output_flags(p)
    p.set_defaults(func=_cmd_cv)

    p = sub.add_parser("gridsearch", help="CSV of (p, lambda, mean_acc, "
                                          "std, min_margin) per grid cell")
    _add_config_flag(p)
    _add_data_flags(p)
    _add_method_flags(p)
    _add_optim_flags(p)
    _add_protocol_flags(p)
    _add_grid_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_gridsearch)

    p = sub.add_parser("compare", help="tuned-CV table over several "
                                       "methods, shared protocol")
    _add_config_flag(p)
    _add_data_flags(p)
    p.add_argument("--methods", metavar="LIST",
                   help="comma-separated subset of: " + ", ".join(METHODS)
                        + " (default: all)")
    _add_method_flags(p, include_method=False)
    _add_optim_flags(p)
    _add_protocol_flags(p)
    _add_grid_flags(p)
    p.add_argument("--runs", type=int,
                   help="tuned-CV repetitions per method (default 1)")
    _add_output_flags(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("margins", help="pairwise margins of a saved "
                                       "single-matrix model")
    _add_config_flag(p)
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--data", metavar="FILE",
                   help="optional CSV checked for feature-count "
                        "compatibility")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--no-header", dest="header", action="store_false",
                   default=None)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_margins)

    p = sub.add_parser("gradcheck", help="finite-difference audit of the "
                                         "analytic gradients")
    _add_config_flag(p)
    _add_data_flags(p)
    _add_method_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=5,
                   help="random (W, b) draws to audit (default 5)")
    p.add_argument("--threshold", type=float, default=1e-4,
                   help="max allowed relative error (default 1e-4)")
    p.add_argument("--corrupt-gradient", type=float, default=0.0,
                   dest="corrupt_gradient", help=argparse.SUPPRESS)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("verify", help="run the seeded property suite; "
                                      "nonzero exit on any failure")
    _add_config_flag(p)
    p.add_argument("--seed", type=int,
                   help="seed (default: MAXMIN_SVM_SEED or 0)")
    p.add_argument("--checks", metavar="LIST",
                   help="comma-separated subset of check names "
                        "(default: all)")
    p.add_argument("--corrupt-gradient", type=float, default=0.0,
                   dest="corrupt_gradient", help=argparse.SUPPRESS)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None):
    """Entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
