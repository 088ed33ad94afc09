"""Class-imbalance resampling applied at fit time only."""

from __future__ import annotations

import numpy as np

from .base import BaseElement, binary_labels, check_matrix, check_targets

METHODS = ("RandomUnderSampler", "RandomOverSampler", "SMOTE")


class ImbalancedDataTransformer(BaseElement):
    """Equalize binary class counts by under-, over-, or SMOTE sampling.

    Applied during fit only; at predict time the element is an identity.
    ``fit_resample`` additionally returns, per output row, the input row it
    originates from (synthetic SMOTE rows report their interpolation base),
    which the pipeline uses to keep extra data channels row-aligned.
    """

    keyword = "ImbalancedDataTransformer"
    can_transform = True
    modifies_targets = True
    applies_during = "fit_only"
    uses_seed = True
    param_names = ("method_name", "k_neighbors", "seed")
    defaults = {"method_name": "RandomUnderSampler", "k_neighbors": 5, "seed": None}

    def _validate_params(self):
        method = self.params["method_name"]
        if method not in METHODS:
            raise ValueError(f"unknown resampling method {method!r}; choose from {METHODS}")
        if self.params["k_neighbors"] < 1:
            raise ValueError("k_neighbors must be >= 1")

    def fit_resample(self, x, y):
        x = check_matrix(x)
        y = check_targets(y, x.shape[0])
        labels = binary_labels(y)
        rng = self._rng()
        counts = {float(c): int(np.sum(y == c)) for c in labels}
        minority = min(labels, key=lambda c: (counts[float(c)], c))
        majority = labels[0] if minority == labels[1] else labels[1]
        min_rows = np.flatnonzero(y == minority)
        maj_rows = np.flatnonzero(y == majority)
        method = self.params["method_name"]

        if method == "RandomUnderSampler":
            keep = rng.sample_without_replacement(maj_rows.size, min_rows.size)
            source = np.sort(np.concatenate([min_rows, maj_rows[keep]]))
        elif method == "RandomOverSampler":
            draws = [min_rows[rng.below(min_rows.size)] for _ in range(maj_rows.size - min_rows.size)]
            source = np.concatenate([np.arange(y.size), np.asarray(draws, dtype=np.int64)])
        else:
            return self._smote(x, y, min_rows, maj_rows, rng)

        source = source.astype(np.int64)
        self.fitted_ = True
        return x[source], y[source], source

    def _smote(self, x, y, min_rows, maj_rows, rng):
        need = maj_rows.size - min_rows.size
        m = min_rows.size
        coords = x[min_rows]
        if m > 1:
            k = min(int(self.params["k_neighbors"]), m - 1)
            d2 = ((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=-1)
            neighbors = []
            for i in range(m):
                # nearest first; distance ties keep the lower minority row
                order = np.lexsort((np.arange(m), d2[i]))
                neighbors.append([j for j in order if j != i][:k])
        synth_x = np.empty((need, x.shape[1]))
        synth_src = np.empty(need, dtype=np.int64)
        for s in range(need):
            base = rng.below(m)
            if m == 1:
                synth_x[s] = coords[0]
            else:
                nn = neighbors[base][rng.below(len(neighbors[base]))]
                u = rng.random()
                synth_x[s] = coords[base] + u * (coords[nn] - coords[base])
            synth_src[s] = min_rows[base]
        minority_label = float(y[min_rows[0]])
        x_out = np.vstack([x, synth_x])
        y_out = np.concatenate([y, np.full(need, minority_label)])
        source = np.concatenate([np.arange(y.size), synth_src])
        self.fitted_ = True
        return x_out, y_out, source

    # the pipeline never calls plain fit/transform on a resampler, but the
    # contract keeps them well-defined: identity outside of fit_resample
    def fit(self, x, y=None):
        self.fitted_ = True
        return self

    def transform(self, x):
        return check_matrix(x)

    def get_state(self):
        return {}

    def set_state(self, state):
        self.fitted_ = True
