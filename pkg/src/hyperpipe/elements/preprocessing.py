"""Column-wise preprocessing: scaling, mean imputation, PCA."""

from __future__ import annotations

import warnings

import numpy as np

from .base import BaseElement, check_matrix


class StandardScaler(BaseElement):
    """Center to the training mean and scale to unit population variance.

    NaN cells are ignored when computing per-column statistics; columns with
    zero variance map to all zeros.
    """

    keyword = "StandardScaler"
    can_transform = True

    def fit(self, x, y=None):
        x = check_matrix(x)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns
            self.mean_ = np.nanmean(x, axis=0)
            self.scale_ = np.sqrt(np.nanvar(x, axis=0))
        self.n_features_ = x.shape[1]
        self.fitted_ = True
        return self

    def transform(self, x):
        self.require_fitted()
        x = check_matrix(x, expect_cols=self.n_features_)
        zero = self.scale_ == 0.0
        safe = np.where(zero, 1.0, self.scale_)
        out = (x - self.mean_) / safe
        if zero.any():
            out[:, zero] = 0.0
        return out

    def get_state(self):
        return {"mean_": self.mean_, "scale_": self.scale_, "n_features_": self.n_features_}

    def set_state(self, state):
        self.mean_ = np.asarray(state["mean_"], dtype=np.float64)
        self.scale_ = np.asarray(state["scale_"], dtype=np.float64)
        self.n_features_ = int(state["n_features_"])
        self.fitted_ = True


class SimpleImputer(BaseElement):
    """Replace NaN cells with the per-column mean of the training rows."""

    keyword = "SimpleImputer"
    can_transform = True

    def fit(self, x, y=None):
        x = check_matrix(x)
        observed = np.isfinite(x)
        if not observed.any(axis=0).all():
            bad = int(np.flatnonzero(~observed.any(axis=0))[0])
            raise ValueError(f"column {bad} has no observed values to impute from")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            self.means_ = np.nanmean(x, axis=0)
        self.n_features_ = x.shape[1]
        self.fitted_ = True
        return self

    def transform(self, x):
        self.require_fitted()
        x = check_matrix(x, expect_cols=self.n_features_).copy()
        nan_mask = ~np.isfinite(x)
        if nan_mask.any():
            x[nan_mask] = np.broadcast_to(self.means_, x.shape)[nan_mask]
        return x

    def get_state(self):
        return {"means_": self.means_, "n_features_": self.n_features_}

    def set_state(self, state):
        self.means_ = np.asarray(state["means_"], dtype=np.float64)
        self.n_features_ = int(state["n_features_"])
        self.fitted_ = True


class Pca(BaseElement):
    """Project onto the leading eigenvectors of the training covariance.

    ``n_components`` is either a positive integer (component count) or a
    fraction in (0, 1): the smallest k whose cumulative explained variance
    reaches that fraction.  Data is centered with the training mean.
    """

    keyword = "PCA"
    can_transform = True
    param_names = ("n_components",)
    defaults = {"n_components": None}

    def _validate_params(self):
        nc = self.params["n_components"]
        if nc is None:
            return
        if isinstance(nc, bool):
            raise ValueError("PCA: n_components must be a positive int or a fraction in (0, 1)")
        if isinstance(nc, int):
            if nc < 1:
                raise ValueError(f"PCA: n_components must be >= 1, got {nc}")
        elif isinstance(nc, float):
            if not 0.0 < nc < 1.0:
                raise ValueError(f"PCA: fractional n_components must lie in (0, 1), got {nc}")
        else:
            raise ValueError(f"PCA: invalid n_components {nc!r}")

    def fit(self, x, y=None):
        x = check_matrix(x)
        n, p = x.shape
        if n < 2:
            raise ValueError("PCA requires at least 2 training rows")
        nc = self.params["n_components"]
        if isinstance(nc, int) and nc > p:
            raise ValueError(f"PCA: n_components={nc} exceeds {p} columns")
        self.mean_ = x.mean(axis=0)
        xc = x - self.mean_
        cov = (xc.T @ xc) / (n - 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        eigvals = np.clip(eigvals[order], 0.0, None)
        eigvecs = eigvecs[:, order]
        if nc is None:
            k = p
        elif isinstance(nc, int):
            k = nc
        else:
            total = eigvals.sum()
            if total <= 0.0:
                k = 1
            else:
                cum = np.cumsum(eigvals) / total
                k = int(np.searchsorted(cum, nc) + 1)
                k = min(k, p)
        self.components_ = eigvecs[:, :k].T.copy()
        self.explained_variance_ = eigvals[:k].copy()
        self.n_features_ = p
        self.fitted_ = True
        return self

    def transform(self, x):
        self.require_fitted()
        x = check_matrix(x, expect_cols=self.n_features_)
        return (x - self.mean_) @ self.components_.T

    def get_state(self):
        return {
            "mean_": self.mean_,
            "components_": self.components_,
            "explained_variance_": self.explained_variance_,
            "n_features_": self.n_features_,
        }

    def set_state(self, state):
        self.mean_ = np.asarray(state["mean_"], dtype=np.float64)
        self.components_ = np.asarray(state["components_"], dtype=np.float64)
        self.explained_variance_ = np.asarray(state["explained_variance_"], dtype=np.float64)
        self.n_features_ = int(state["n_features_"])
        self.fitted_ = True
