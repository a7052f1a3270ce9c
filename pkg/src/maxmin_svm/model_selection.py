"""Cross-validation, grid search, and method comparison protocols.

Two selection protocols are provided and kept strictly apart:

- :func:`tuned_cv` is the benchmark-table protocol: for each repeat it
  runs plain k-fold CV on every grid cell and reports the best cell's
  mean accuracy.  Selection and reporting use the same folds, so this
  estimate is optimistic; it exists to reproduce benchmark-table runs.
- :func:`nested_cv` is the honest estimate: hyperparameters are selected
  by an inner grid search on each outer training fold only, so no test
  fold ever influences selection (or standardization).

Everything is deterministic at any parallelism level: fold plans are
computed up front, every task is seeded explicitly and results merge in
task order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import clone

from .data import Standardizer, make_folds
from .estimators import (
    CrammerSingerClassifier,
    MaxMinLinearClassifier,
    OneVsOneHingeClassifier,
    OneVsRestHingeClassifier,
    SoftmaxRegressionClassifier,
    WestonWatkinsClassifier,
)

METHODS = ("m3svm", "ism3", "ovr", "ovo", "crammer", "ww", "multilr")

_GRIDDED_P_METHODS = ("m3svm", "ism3")


def make_estimator(method, **params):
    """Estimator instance for a CLI method name.

    Unknown keyword arguments raise, so callers cannot silently pass a
    hyperparameter the method does not have.
    """
    if method == "m3svm":
        return MaxMinLinearClassifier(loss="smoothed_hinge", **params)
    if method == "ism3":
        return MaxMinLinearClassifier(loss="logistic", **params)
    if method == "ovr":
        return OneVsRestHingeClassifier(**params)
    if method == "ovo":
        return OneVsOneHingeClassifier(**params)
    if method == "crammer":
        return CrammerSingerClassifier(**params)
    if method == "ww":
        return WestonWatkinsClassifier(**params)
    if method == "multilr":
        return SoftmaxRegressionClassifier(**params)
    raise ValueError(f"unknown method {method!r}; known: {', '.join(METHODS)}")


def default_lambda_grid(log_spacing=False):
    """Ten regularization strengths spanning [1e-4, 1e-1].

    Equidistant linearly by default; ``log_spacing`` switches to
    geometric spacing, which spreads the grid across magnitudes instead
    of concentrating it near the top of the interval.
    """
    if log_spacing:
        values = np.geomspace(1e-4, 1e-1, 10)
    else:
        values = np.linspace(1e-4, 1e-1, 10)
    return [float(v) for v in values]


def default_p_grid():
    """Integer exponents 1 through 8."""
    return [float(v) for v in range(1, 9)]


def method_param_grid(method, p_values=None, lambda_values=None):
    """Grid cells for a method, in deterministic row order.

    For ``m3svm``/``ism3`` the cells iterate p-major then lambda-minor;
    other methods take a lambda-only grid and reject explicit
    ``p_values``.
    """
    if lambda_values is None:
        lambda_values = default_lambda_grid()
    if method in _GRIDDED_P_METHODS:
        if p_values is None:
            p_values = default_p_grid()
        return [
            {"p": float(p), "lam": float(lam)}
            for p in p_values
            for lam in lambda_values
        ]
    if p_values is not None:
        raise ValueError(f"p values are not applicable to method {method!r}")
    return [{"lam": float(lam)} for lam in lambda_values]


@dataclass(frozen=True)
class CVResult:
    """Per-fold accuracies with their mean and population std."""

    fold_accuracies: tuple
    mean: float
    std: float

    def as_dict(self):
        return {
            "fold_accuracies": list(self.fold_accuracies),
            "mean": self.mean,
            "std": self.std,
        }


def _summarize(accs):
    arr = np.asarray(accs, dtype=np.float64)
    return CVResult(
        fold_accuracies=tuple(float(a) for a in arr),
        mean=float(arr.mean()),
        std=float(arr.std()),
    )


def _fit_and_score(estimator, dataset, train_idx, test_idx, standardize):
    est = clone(estimator)
    Xtr = dataset.features[train_idx]
    ytr = dataset.labels[train_idx]
    Xte = dataset.features[test_idx]
    yte = dataset.labels[test_idx]
    if standardize:
        std = Standardizer().fit(Xtr)
        Xtr = std.transform(Xtr)
        Xte = std.transform(Xte)
    est.fit(Xtr, ytr)
    return float((est.predict(Xte) == yte).mean())


def _cv_accuracies(estimator, dataset, plan, standardize):
    accs = []
    for fold, train_idx, test_idx in plan.iter_folds():
        accs.append(_fit_and_score(estimator, dataset, train_idx, test_idx,
                                   standardize))
    return accs


def cross_validate(estimator, dataset, k=5, seed=0, standardize=False,
                   n_jobs=1):
    """Plain stratified k-fold accuracy of one estimator configuration."""
    plan = make_folds(dataset.labels, k, seed)
    accs = Parallel(n_jobs=n_jobs)(
        delayed(_fit_and_score)(estimator, dataset, train_idx, test_idx,
                                standardize)
        for _, train_idx, test_idx in plan.iter_folds()
    )
    return _summarize(accs)


@dataclass(frozen=True)
class GridCell:
    """One grid configuration and its cross-validation result."""

    params: dict
    result: CVResult


def grid_search(estimator, dataset, param_grid, k=5, seed=0,
                standardize=False, n_jobs=1):
    """CV every cell of ``param_grid``; cells return in grid order.

    The same fold plan is shared by all cells, so cell results are
    directly comparable.
    """
    plan = make_folds(dataset.labels, k, seed)
    per_cell = Parallel(n_jobs=n_jobs)(
        delayed(_cv_accuracies)(clone(estimator).set_params(**params),
                                dataset, plan, standardize)
        for params in param_grid
    )
    return [
        GridCell(params=dict(params), result=_summarize(accs))
        for params, accs in zip(param_grid, per_cell)
    ]


def best_cell(cells):
    """The cell with the highest mean accuracy; ties keep grid order."""
    return max(cells, key=lambda cell: cell.result.mean)


@dataclass(frozen=True)
class NestedCVReport:
    """Outer-fold accuracies of inner-grid-selected models.

    ``best_params_per_fold`` records what the inner search picked on each
    outer training fold.
    """

    result: CVResult
    best_params_per_fold: tuple
    k: int
    seed: int

    def as_dict(self):
        return {
            **self.result.as_dict(),
            "best_params_per_fold": [dict(p) for p in self.best_params_per_fold],
            "k": self.k,
            "seed": self.seed,
        }


def _nested_one_fold(estimator, dataset, plan, fold, param_grid, k, seed,
                     standardize):
    train_idx = plan.train_indices(fold)
    test_idx = plan.test_indices(fold)
    inner_data = dataset.subset(train_idx)
    # Inner folds are seeded from (seed, fold) so outer folds stay
    # independent yet reproducible.
    inner_seed = seed * k + fold + 1
    cells = grid_search(estimator, inner_data, param_grid, k=k,
                        seed=inner_seed, standardize=standardize, n_jobs=1)
    best = best_cell(cells)
    acc = _fit_and_score(clone(estimator).set_params(**best.params),
                         dataset, train_idx, test_idx, standardize)
    return acc, best.params


def nested_cv(estimator, dataset, param_grid, k=5, seed=0, standardize=False,
              n_jobs=1):
    """Honest CV: grid selection happens inside each outer training fold.

    Nothing from an outer test fold (features, labels, or scaling
    statistics) can influence which hyperparameters are chosen.
    """
    plan = make_folds(dataset.labels, k, seed)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_nested_one_fold)(estimator, dataset, plan, fold, param_grid,
                                  k, seed, standardize)
        for fold in range(k)
    )
    accs = [acc for acc, _ in results]
    chosen = tuple(dict(params) for _, params in results)
    return NestedCVReport(
        result=_summarize(accs),
        best_params_per_fold=chosen,
        k=k,
        seed=seed,
    )


def consensus_params(best_params_per_fold):
    """Most frequently selected parameter dict; ties keep first seen."""
    keys = [tuple(sorted(p.items())) for p in best_params_per_fold]
    counts = Counter(keys)
    winner = max(counts.items(), key=lambda kv: (kv[1], -keys.index(kv[0])))
    return dict(winner[0])


@dataclass(frozen=True)
class TunedCVReport:
    """Benchmark-table summary over repeated tuned CV runs.

    Each run's score is the best grid cell's CV mean for that run's fold
    seed; ``mean``/``std`` summarize the runs.  Optimistic by design; see
    the module docstring.
    """

    run_means: tuple
    best_params_per_run: tuple
    mean: float
    std: float
    k: int
    n_runs: int
    base_seed: int

    def as_dict(self):
        return {
            "run_means": list(self.run_means),
            "best_params_per_run": [dict(p) for p in self.best_params_per_run],
            "mean": self.mean,
            "std": self.std,
            "k": self.k,
            "n_runs": self.n_runs,
            "base_seed": self.base_seed,
        }


def tuned_cv(estimator, dataset, param_grid, k=5, n_runs=10, base_seed=0,
             standardize=False, n_jobs=1):
    """Repeat (grid CV, pick best cell) over fold seeds ``base_seed + r``."""
    plans = [make_folds(dataset.labels, k, base_seed + r)
             for r in range(n_runs)]
    tasks = [(r, params) for r in range(n_runs) for params in param_grid]
    per_task = Parallel(n_jobs=n_jobs)(
        delayed(_cv_accuracies)(clone(estimator).set_params(**params),
                                dataset, plans[r], standardize)
        for r, params in tasks
    )
    n_cells = len(param_grid)
    run_means = []
    best_params = []
    for r in range(n_runs):
        cells = [
            GridCell(params=dict(param_grid[ci]),
                     result=_summarize(per_task[r * n_cells + ci]))
            for ci in range(n_cells)
        ]
        best = best_cell(cells)
        run_means.append(best.result.mean)
        best_params.append(best.params)
    arr = np.asarray(run_means, dtype=np.float64)
    return TunedCVReport(
        run_means=tuple(float(m) for m in run_means),
        best_params_per_run=tuple(best_params),
        mean=float(arr.mean()),
        std=float(arr.std()),
        k=k,
        n_runs=n_runs,
        base_seed=base_seed,
    )


def refit(estimator, dataset, params=None, standardize=False):
    """Fit a clone on the full dataset, optionally at given grid params.

    Returns ``(fitted_estimator, standardizer_or_None)``.
    """
    est = clone(estimator)
    if params:
        est.set_params(**params)
    X = dataset.features
    std = None
    if standardize:
        std = Standardizer().fit(X)
        X = std.transform(X)
    est.fit(X, dataset.labels)
    return est, std


@dataclass(frozen=True)
class PSweepRow:
    """Result of one exponent value in a p sweep."""

    p: float
    min_margin: float
    cv_mean: float
    cv_std: float

    def as_dict(self):
        return {
            "p": self.p,
            "min_margin": self.min_margin,
            "cv_mean": self.cv_mean,
            "cv_std": self.cv_std,
        }


def _sweep_one_p(estimator, dataset, p, k, seed, standardize):
    est = clone(estimator).set_params(p=p)
    plan = make_folds(dataset.labels, k, seed)
    accs = _cv_accuracies(est, dataset, plan, standardize)
    fitted, _ = refit(est, dataset, standardize=standardize)
    report = fitted.margin_report()
    result = _summarize(accs)
    return PSweepRow(
        p=float(p),
        min_margin=float(report.min_margin),
        cv_mean=result.mean,
        cv_std=result.std,
    )


def p_sweep(estimator, dataset, p_values, k=5, seed=0, standardize=False,
            n_jobs=1):
    """CV accuracy and full-data minimum margin for each exponent ``p``.

    ``estimator`` must expose a ``p`` parameter and a ``margin_report``
    method (the pairwise-margin classifier does).
    """
    if not p_values:
        raise ValueError("p_values must be nonempty")
    rows = Parallel(n_jobs=n_jobs)(
        delayed(_sweep_one_p)(estimator, dataset, p, k, seed, standardize)
        for p in p_values
    )
    return list(rows)


def compare_methods(dataset, methods=METHODS, k=5, n_runs=1, base_seed=0,
                    p_values=None, lambda_values=None, standardize=False,
                    n_jobs=1, estimator_overrides=None):
    """Tuned-CV report per method under one shared protocol.

    Returns ``{method: TunedCVReport}`` in the given method order.
    ``estimator_overrides`` passes extra constructor arguments (for
    example ``max_iters``) to every method's estimator.
    """
    overrides = estimator_overrides or {}
    reports = {}
    for method in methods:
        grid = method_param_grid(
            method,
            p_values=p_values if method in _GRIDDED_P_METHODS else None,
            lambda_values=lambda_values,
        )
        est = make_estimator(method, **overrides)
        reports[method] = tuned_cv(
            est, dataset, grid, k=k, n_runs=n_runs, base_seed=base_seed,
            standardize=standardize, n_jobs=n_jobs,
        )
    return reports
