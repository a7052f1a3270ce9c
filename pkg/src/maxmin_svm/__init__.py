"""Multi-class linear classifiers that maximize the minimum pairwise margin.

The central model is a single weight matrix ``W`` (one column per class)
with biases ``b``, trained by full-batch Adam on a smoothed pairwise
hinge or pairwise logistic loss plus a tunable-exponent penalty on the
pairwise column differences; shrinking ``||w_k - w_l||`` is what drives
the pairwise margins ``2 / ||w_k - w_l||`` up.  Classical baselines
(one-vs-rest, one-vs-one, max-violation, sum-of-violations, multinomial
logistic regression) share the trainer and protocol code, and a seeded
verification suite exercises every documented identity and bound.

Scikit-learn style estimators live in :mod:`maxmin_svm.estimators`; the
functional layer (objectives, gradients, trainers) is importable from
the submodules and re-exported here.  The ``maxmin-svm`` console command
wraps everything for shell use.
"""

__version__ = "0.1.0"

from .baselines import (
    BinaryModel,
    OvOModel,
    OvRModel,
    predict_ovo,
    predict_ovr,
    train_binary_svm,
    train_crammer,
    train_multilr,
    train_ovo,
    train_ovr,
    train_ww,
)
from .data import (
    BUNDLED_DATASETS,
    DataError,
    Dataset,
    FoldPlan,
    Standardizer,
    fit_standardizer,
    list_bundled,
    load_bundled,
    load_csv,
    load_feature_csv,
    load_libsvm,
    make_folds,
    save_csv,
)
from .estimators import (
    BinaryHingeClassifier,
    CrammerSingerClassifier,
    MaxMinLinearClassifier,
    OneVsOneHingeClassifier,
    OneVsRestHingeClassifier,
    SoftmaxRegressionClassifier,
    WestonWatkinsClassifier,
)
from .model import (
    DegenerateMarginError,
    EvalReport,
    LinearModel,
    MarginReport,
    decision_scores,
    evaluate,
    margin_report,
    pairwise_margin,
    predict,
)
from .model_selection import (
    METHODS,
    best_cell,
    compare_methods,
    consensus_params,
    cross_validate,
    default_lambda_grid,
    default_p_grid,
    grid_search,
    make_estimator,
    method_param_grid,
    nested_cv,
    p_sweep,
    refit,
    tuned_cv,
)
from .objective import (
    LossBreakdown,
    ObjectiveConfig,
    gradient,
    pairwise_objective,
    persample_objective,
    regularizer,
    smoothed_hinge,
    smoothed_hinge_grad,
    value_and_grad,
)
from .optim import (
    GradcheckReport,
    TrainConfig,
    TrainTrace,
    TrainingDivergedError,
    gradcheck,
    minimize_adam,
    train,
)
from .serialize import ModelFormatError, SavedModel, load_model, save_model
from .verify import run_verification

__all__ = [
    "__version__",
    "BUNDLED_DATASETS",
    "BinaryHingeClassifier",
    "BinaryModel",
    "CrammerSingerClassifier",
    "DataError",
    "Dataset",
    "DegenerateMarginError",
    "EvalReport",
    "FoldPlan",
    "GradcheckReport",
    "LinearModel",
    "LossBreakdown",
    "MarginReport",
    "MaxMinLinearClassifier",
    "METHODS",
    "ModelFormatError",
    "ObjectiveConfig",
    "OneVsOneHingeClassifier",
    "OneVsRestHingeClassifier",
    "OvOModel",
    "OvRModel",
    "SavedModel",
    "SoftmaxRegressionClassifier",
    "Standardizer",
    "TrainConfig",
    "TrainTrace",
    "TrainingDivergedError",
    "WestonWatkinsClassifier",
    "best_cell",
    "compare_methods",
    "consensus_params",
    "cross_validate",
    "decision_scores",
    "default_lambda_grid",
    "default_p_grid",
    "evaluate",
    "fit_standardizer",
    "gradcheck",
    "gradient",
    "grid_search",
    "list_bundled",
    "load_bundled",
    "load_csv",
    "load_feature_csv",
    "load_libsvm",
    "load_model",
    "make_estimator",
    "make_folds",
    "margin_report",
    "method_param_grid",
    "minimize_adam",
    "nested_cv",
    "p_sweep",
    "pairwise_margin",
    "pairwise_objective",
    "persample_objective",
    "predict",
    "predict_ovo",
    "predict_ovr",
    "refit",
    "regularizer",
    "run_verification",
    "save_csv",
    "save_model",
    "smoothed_hinge",
    "smoothed_hinge_grad",
    "train",
    "train_binary_svm",
    "train_crammer",
    "train_multilr",
    "train_ovo",
    "train_ovr",
    "train_ww",
    "tuned_cv",
    "value_and_grad",
]
