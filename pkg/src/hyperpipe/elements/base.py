"""Uniform element contract: fit / transform / predict behind declared capabilities."""

from __future__ import annotations

import numpy as np

from ..errors import NotFittedError
from ..rng import SplitMix64


class BaseElement:
    """One algorithm in the data stream.

    Subclasses declare capabilities as class attributes, list their accepted
    constructor parameters in ``param_names`` with defaults in ``defaults``,
    and implement ``fit`` plus ``transform``/``predict``.  Learned state lives
    in trailing-underscore attributes and is exposed through ``get_state`` /
    ``set_state`` for archiving.
    """

    keyword: str = ""
    can_transform = False
    can_predict = False
    can_predict_proba = False
    modifies_targets = False
    applies_during = "always"  # or "fit_only"
    uses_seed = False
    param_names: tuple = ()
    defaults: dict = {}

    def __init__(self, **params):
        unknown = set(params) - set(self.param_names)
        if unknown:
            raise ValueError(
                f"{self.keyword or type(self).__name__}: unknown parameter(s) "
                f"{sorted(unknown)}; accepted: {sorted(self.param_names)}"
            )
        self.params = {name: params.get(name, self.defaults.get(name)) for name in self.param_names}
        self._validate_params()
        self.fitted_ = False
        self._derived_seed = 0

    def _validate_params(self):
        """Subclass hook; raise ValueError on invalid parameter values."""

    def get_params(self) -> dict:
        return dict(self.params)

    def set_params(self, **updates):
        unknown = set(updates) - set(self.param_names)
        if unknown:
            raise ValueError(
                f"{self.keyword or type(self).__name__}: unknown parameter(s) {sorted(unknown)}"
            )
        self.params.update(updates)
        self._validate_params()
        self.fitted_ = False
        return self

    def clone(self):
        return type(self)(**self.params)

    def effective_seed(self) -> int:
        if self.uses_seed and self.params.get("seed") is not None:
            return int(self.params["seed"])
        return self._derived_seed

    def _rng(self) -> SplitMix64:
        return SplitMix64(self.effective_seed())

    def require_fitted(self):
        if not self.fitted_:
            raise NotFittedError(f"{self.keyword or type(self).__name__} is not fitted")

    # archive support -----------------------------------------------------

    def get_state(self) -> dict:
        raise NotImplementedError

    def set_state(self, state: dict):
        raise NotImplementedError

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params.items() if v is not None)
        return f"{type(self).__name__}({inner})"


def check_matrix(x, expect_cols=None, forbid_nan=False, name="X"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise ValueError(f"{name} must be 2-d")
    if expect_cols is not None and x.shape[1] != expect_cols:
        raise ValueError(f"{name} has {x.shape[1]} columns, expected {expect_cols}")
    if forbid_nan and not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return x


def check_targets(y, n_rows, forbid_nan=True):
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != n_rows:
        raise ValueError(f"target length {y.shape[0]} != row count {n_rows}")
    if forbid_nan and not np.all(np.isfinite(y)):
        raise ValueError("targets contain NaN or infinite values")
    return y


def binary_labels(y):
    labels = np.unique(y)
    if labels.size < 2:
        raise ValueError("need both classes present, got a single class")
    if labels.size > 2:
        raise ValueError(f"binary estimator got {labels.size} classes")
    return labels
