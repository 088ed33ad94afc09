"""hyperpipe: nested cross-validation pipeline framework.

Compose sequences and parallel arrangements of transformers and estimators,
then train, hyperparameter-optimize and evaluate them under strict nested
cross-validation, with a persisted best model, a canonical JSON result log and
a static HTML report.
"""

from .archive import load_model, model_predict, save_model
from .data import Dataset, fingerprint, load_csv_dataset, subset
from .engine import Hyperpipe, HyperpipeConfig, hyperpipe_fit
from .optimization import (
    Boolean,
    Categorical,
    FloatRange,
    IntegerRange,
    MinimumPerformanceConstraint,
)
from .pipeline import Branch, Callback, Element, Pipeline, Stack, Switch
from .results import best_config_per_estimator, load_results_json, write_results_json
from .validation import CvStrategy

__all__ = [
    "Boolean",
    "Branch",
    "Callback",
    "Categorical",
    "CvStrategy",
    "Dataset",
    "Element",
    "FloatRange",
    "Hyperpipe",
    "HyperpipeConfig",
    "IntegerRange",
    "MinimumPerformanceConstraint",
    "Pipeline",
    "Stack",
    "Switch",
    "best_config_per_estimator",
    "fingerprint",
    "hyperpipe_fit",
    "load_csv_dataset",
    "load_model",
    "load_results_json",
    "model_predict",
    "save_model",
    "subset",
    "write_results_json",
]

__version__ = "0.1.0"
