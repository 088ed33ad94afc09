"""L1-penalized feature ranking and selection."""

from __future__ import annotations

import numpy as np

from .base import BaseElement, check_matrix, check_targets


def soft_threshold(z: float, gamma: float) -> float:
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


def lasso_coordinate_descent(x, y, alpha, max_iter=1000, tol=1e-8):
    """Minimize (1/2n)||y - X beta||^2 + alpha * ||beta||_1 by cyclic CD.

    Columns are visited in order; each coordinate is soft-thresholded against
    the partial residual.  Stops when the largest coefficient change in a
    sweep drops below ``tol`` or after ``max_iter`` sweeps.
    """
    x = check_matrix(x, forbid_nan=True)
    y = check_targets(y, x.shape[0])
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    n, p = x.shape
    col_sq = (x * x).sum(axis=0) / n
    beta = np.zeros(p)
    residual = y.copy()
    for _ in range(max_iter):
        max_delta = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = beta[j]
            if old != 0.0:
                residual += x[:, j] * old
            rho = float(x[:, j] @ residual) / n
            new = soft_threshold(rho, alpha) / col_sq[j]
            if new != 0.0:
                residual -= x[:, j] * new
            beta[j] = new
            max_delta = max(max_delta, abs(new - old))
        if max_delta < tol:
            break
    return beta


class LassoFeatureSelection(BaseElement):
    """Keep the top-percentile columns ranked by |lasso coefficient|.

    The feature matrix is standardized internally before the coordinate
    descent; the transform then selects the chosen columns from the original,
    unscaled input.  Ties in |coefficient| keep the lower column index.
    """

    keyword = "LassoFeatureSelection"
    can_transform = True
    param_names = ("percentile", "alpha", "max_iter", "tol")
    defaults = {"percentile": 0.5, "alpha": 1.0, "max_iter": 1000, "tol": 1e-8}

    def _validate_params(self):
        pct = self.params["percentile"]
        if not 0.0 < pct <= 1.0:
            raise ValueError(f"percentile must lie in (0, 1], got {pct}")
        if self.params["alpha"] < 0:
            raise ValueError("alpha must be >= 0")

    def fit(self, x, y):
        x = check_matrix(x, forbid_nan=True)
        y = check_targets(y, x.shape[0])
        mean = x.mean(axis=0)
        scale = np.sqrt(np.mean((x - mean) ** 2, axis=0))
        safe = np.where(scale == 0.0, 1.0, scale)
        xs = (x - mean) / safe
        xs[:, scale == 0.0] = 0.0
        beta = lasso_coordinate_descent(
            xs, y, self.params["alpha"], self.params["max_iter"], self.params["tol"]
        )
        p = x.shape[1]
        k = max(1, int(np.floor(self.params["percentile"] * p + 0.5)))
        # primary key |beta| descending, secondary key column index ascending
        order = np.lexsort((np.arange(p), -np.abs(beta)))
        self.coefficients_ = beta
        self.selected_ = np.sort(order[:k]).astype(np.int64)
        self.n_features_ = p
        self.fitted_ = True
        return self

    def transform(self, x):
        self.require_fitted()
        x = check_matrix(x, expect_cols=self.n_features_)
        return x[:, self.selected_]

    def get_state(self):
        return {
            "coefficients_": self.coefficients_,
            "selected_": self.selected_,
            "n_features_": self.n_features_,
        }

    def set_state(self, state):
        self.coefficients_ = np.asarray(state["coefficients_"], dtype=np.float64)
        self.selected_ = np.asarray(state["selected_"], dtype=np.int64)
        self.n_features_ = int(state["n_features_"])
        self.fitted_ = True
