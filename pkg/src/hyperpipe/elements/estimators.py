"""Built-in estimators: dummy baselines, kNN, CART trees, random forest, linear SVM.

Every tie-breaking rule is deterministic: neighbor/distance ties keep the
lower training-row index, vote ties pick the smaller class label, and split
ties pick the lower feature index, then the lower threshold.
"""

from __future__ import annotations

import math

import numpy as np

from ..rng import SplitMix64, derive_seed
from .base import BaseElement, binary_labels, check_matrix, check_targets


class DummyClassifier(BaseElement):
    """Constant predictor: the most frequent training class (tie: smaller label)."""

    keyword = "DummyClassifier"
    can_predict = True
    can_predict_proba = True
    param_names = ("strategy",)
    defaults = {"strategy": "most_frequent"}

    def _validate_params(self):
        if self.params["strategy"] != "most_frequent":
            raise ValueError("DummyClassifier supports strategy='most_frequent' only")

    def fit(self, x, y):
        x = check_matrix(x)
        y = check_targets(y, x.shape[0])
        self.classes_, counts = np.unique(y, return_counts=True)
        self.class_fractions_ = counts / counts.sum()
        self.constant_ = float(self.classes_[int(np.argmax(counts))])
        self.fitted_ = True
        return self

    def predict(self, x):
        self.require_fitted()
        x = check_matrix(x)
        return np.full(x.shape[0], self.constant_)

    def predict_proba(self, x):
        self.require_fitted()
        x = check_matrix(x)
        return np.tile(self.class_fractions_, (x.shape[0], 1))

    def get_state(self):
        return {
            "classes_": self.classes_,
            "class_fractions_": self.class_fractions_,
            "constant_": np.float64(self.constant_),
        }

    def set_state(self, state):
        self.classes_ = np.asarray(state["classes_"], dtype=np.float64)
        self.class_fractions_ = np.asarray(state["class_fractions_"], dtype=np.float64)
        self.constant_ = float(np.asarray(state["constant_"]))
        self.fitted_ = True


class DummyRegressor(BaseElement):
    """Constant predictor: the training target mean."""

    keyword = "DummyRegressor"
    can_predict = True
    param_names = ("strategy",)
    defaults = {"strategy": "mean"}

    def _validate_params(self):
        if self.params["strategy"] != "mean":
            raise ValueError("DummyRegressor supports strategy='mean' only")

    def fit(self, x, y):
        x = check_matrix(x)
        y = check_targets(y, x.shape[0])
        self.constant_ = float(y.mean())
        self.fitted_ = True
        return self

    def predict(self, x):
        self.require_fitted()
        x = check_matrix(x)
        return np.full(x.shape[0], self.constant_)

    def get_state(self):
        return {"constant_": np.float64(self.constant_)}

    def set_state(self, state):
        self.constant_ = float(np.asarray(state["constant_"]))
        self.fitted_ = True


class KNeighborsClassifier(BaseElement):
    """Majority vote among the k nearest training rows (Euclidean)."""

    keyword = "KNeighborsClassifier"
    can_predict = True
    can_predict_proba = True
    param_names = ("n_neighbors",)
    defaults = {"n_neighbors": 5}

    def _validate_params(self):
        k = self.params["n_neighbors"]
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise ValueError(f"n_neighbors must be a positive integer, got {k!r}")

    def fit(self, x, y):
        x = check_matrix(x, forbid_nan=True)
        y = check_targets(y, x.shape[0])
        if self.params["n_neighbors"] > x.shape[0]:
            raise ValueError(
                f"n_neighbors={self.params['n_neighbors']} exceeds {x.shape[0]} training rows"
            )
        self.train_x_ = x.copy()
        self.train_y_ = y.copy()
        self.classes_ = np.unique(y)
        self.fitted_ = True
        return self

    def _vote_counts(self, x):
        x = check_matrix(x, expect_cols=self.train_x_.shape[1], forbid_nan=True)
        k = self.params["n_neighbors"]
        n_train = self.train_x_.shape[0]
        counts = np.zeros((x.shape[0], self.classes_.size))
        class_of = np.searchsorted(self.classes_, self.train_y_)
        for i in range(x.shape[0]):
            d2 = ((self.train_x_ - x[i]) ** 2).sum(axis=1)
            order = np.lexsort((np.arange(n_train), d2))[:k]
            np.add.at(counts[i], class_of[order], 1.0)
        return counts

    def predict(self, x):
        self.require_fitted()
        counts = self._vote_counts(x)
        return self.classes_[np.argmax(counts, axis=1)]

    def predict_proba(self, x):
        self.require_fitted()
        counts = self._vote_counts(x)
        return counts / self.params["n_neighbors"]

    def get_state(self):
        return {"train_x_": self.train_x_, "train_y_": self.train_y_, "classes_": self.classes_}

    def set_state(self, state):
        self.train_x_ = np.asarray(state["train_x_"], dtype=np.float64)
        self.train_y_ = np.asarray(state["train_y_"], dtype=np.float64)
        self.classes_ = np.asarray(state["classes_"], dtype=np.float64)
        self.fitted_ = True


# --- CART ------------------------------------------------------------------


def _impurity_rows(counts, sizes, criterion):
    """Vectorized impurity for stacked count rows; sizes must be > 0."""
    p = counts / sizes[:, None]
    if criterion == "gini":
        return 1.0 - (p * p).sum(axis=1)
    logp = np.where(p > 0.0, np.log2(np.where(p > 0.0, p, 1.0)), 0.0)
    return -(p * logp).sum(axis=1)


class _Tree:
    """Flat-array CART tree: feature[i] == -1 marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "value", "counts")

    def __init__(self, feature, threshold, left, right, value, counts):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value
        self.counts = counts

    def apply(self, x):
        node = np.zeros(x.shape[0], dtype=np.int64)
        while True:
            active = np.flatnonzero(self.feature[node] >= 0)
            if active.size == 0:
                return node
            cur = node[active]
            go_left = x[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])


def _grow_tree(x, y_idx, n_classes, criterion, min_samples_split, max_depth,
               rng=None, m_features=None):
    """Greedy CART build; thresholds are midpoints between consecutive
    distinct sorted values.  Any valid boundary may split (impurity decrease
    is never negative, and zero-gain splits are required to untangle
    XOR-like data); a node with no boundary at all becomes a leaf."""
    n_total, p = x.shape
    feature, threshold, left, right, value, counts_out = [], [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0)
        counts_out.append(None)
        return len(feature) - 1

    stack = [(np.arange(n_total), 0, new_node())]
    while stack:
        rows, depth, node_id = stack.pop()
        labels = y_idx[rows]
        counts = np.bincount(labels, minlength=n_classes).astype(np.float64)
        counts_out[node_id] = counts
        value[node_id] = int(np.argmax(counts))  # first max = smaller label
        n = rows.size
        if (
            np.count_nonzero(counts) <= 1
            or n < min_samples_split
            or (max_depth is not None and depth >= max_depth)
        ):
            continue
        parent_imp = float(_impurity_rows(counts[None, :], np.array([float(n)]), criterion)[0])
        if m_features is not None and m_features < p:
            cand = sorted(rng.sample_without_replacement(p, m_features))
        else:
            cand = range(p)
        best_gain = -math.inf
        best = None
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), labels] = 1.0
        for j in cand:
            col = x[rows, j]
            order = np.argsort(col, kind="stable")
            sx = col[order]
            boundaries = np.flatnonzero(sx[1:] != sx[:-1]) + 1  # left sizes
            if boundaries.size == 0:
                continue
            prefix = np.cumsum(onehot[order], axis=0)
            left_counts = prefix[boundaries - 1]
            right_counts = counts - left_counts
            nl = boundaries.astype(np.float64)
            nr = n - nl
            child_imp = nl * _impurity_rows(left_counts, nl, criterion) + nr * _impurity_rows(
                right_counts, nr, criterion
            )
            gains = parent_imp - child_imp / n
            pick = int(np.argmax(gains))  # first max = lowest threshold
            if gains[pick] > best_gain:
                best_gain = float(gains[pick])
                thr = 0.5 * (sx[boundaries[pick] - 1] + sx[boundaries[pick]])
                best = (j, thr, order, boundaries[pick])
        if best is None:
            continue
        j, thr, order, n_left = best
        feature[node_id] = j
        threshold[node_id] = float(thr)
        left_id = new_node()
        right_id = new_node()
        left[node_id] = left_id
        right[node_id] = right_id
        stack.append((rows[order[:n_left]], depth + 1, left_id))
        stack.append((rows[order[n_left:]], depth + 1, right_id))

    return _Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(value, dtype=np.int64),
        np.vstack(counts_out),
    )


class DecisionTreeClassifier(BaseElement):
    keyword = "DecisionTreeClassifier"
    can_predict = True
    can_predict_proba = True
    param_names = ("criterion", "min_samples_split", "max_depth")
    defaults = {"criterion": "gini", "min_samples_split": 2, "max_depth": None}

    def _validate_params(self):
        if self.params["criterion"] not in ("gini", "entropy"):
            raise ValueError(f"unknown criterion {self.params['criterion']!r}")
        if self.params["min_samples_split"] < 2:
            raise ValueError("min_samples_split must be >= 2")
        md = self.params["max_depth"]
        if md is not None and md < 1:
            raise ValueError("max_depth must be >= 1")

    def fit(self, x, y):
        x = check_matrix(x, forbid_nan=True)
        y = check_targets(y, x.shape[0])
        self.classes_ = np.unique(y)
        y_idx = np.searchsorted(self.classes_, y)
        self.tree_ = _grow_tree(
            x,
            y_idx,
            self.classes_.size,
            self.params["criterion"],
            self.params["min_samples_split"],
            self.params["max_depth"],
        )
        self.n_features_ = x.shape[1]
        self.fitted_ = True
        return self

    def predict(self, x):
        self.require_fitted()
        x = check_matrix(x, expect_cols=self.n_features_, forbid_nan=True)
        return self.classes_[self.tree_.value[self.tree_.apply(x)]]

    def predict_proba(self, x):
        self.require_fitted()
        x = check_matrix(x, expect_cols=self.n_features_, forbid_nan=True)
        counts = self.tree_.counts[self.tree_.apply(x)]
        return counts / counts.sum(axis=1, keepdims=True)

    def get_state(self):
        t = self.tree_
        return {
            "classes_": self.classes_,
            "n_features_": self.n_features_,
            "tree_feature": t.feature,
            "tree_threshold": t.threshold,
            "tree_left": t.left,
            "tree_right": t.right,
            "tree_value": t.value,
            "tree_counts": t.counts,
        }

    def set_state(self, state):
        self.classes_ = np.asarray(state["classes_"], dtype=np.float64)
        self.n_features_ = int(state["n_features_"])
        self.tree_ = _Tree(
            np.asarray(state["tree_feature"], dtype=np.int64),
            np.asarray(state["tree_threshold"], dtype=np.float64),
            np.asarray(state["tree_left"], dtype=np.int64),
            np.asarray(state["tree_right"], dtype=np.int64),
            np.asarray(state["tree_value"], dtype=np.int64),
            np.asarray(state["tree_counts"], dtype=np.float64),
        )
        self.fitted_ = True


class RandomForestClassifier(BaseElement):
    """Bagged CART trees with per-split feature subsampling, majority vote."""

    keyword = "RandomForestClassifier"
    can_predict = True
    can_predict_proba = True
    uses_seed = True
    param_names = (
        "n_estimators",
        "criterion",
        "min_samples_split",
        "max_depth",
        "max_features",
        "bootstrap",
        "seed",
    )
    defaults = {
        "n_estimators": 25,
        "criterion": "gini",
        "min_samples_split": 2,
        "max_depth": None,
        "max_features": "auto",
        "bootstrap": True,
        "seed": None,
    }

    def _validate_params(self):
        if self.params["n_estimators"] < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.params["criterion"] not in ("gini", "entropy"):
            raise ValueError(f"unknown criterion {self.params['criterion']!r}")
        if self.params["min_samples_split"] < 2:
            raise ValueError("min_samples_split must be >= 2")
        mf = self.params["max_features"]
        if isinstance(mf, str):
            if mf not in ("auto", "sqrt", "log2"):
                raise ValueError(f"invalid max_features {mf!r}")
        elif isinstance(mf, bool) or not isinstance(mf, int) or mf < 1:
            raise ValueError(f"invalid max_features {mf!r}")

    def _resolve_m(self, p):
        mf = self.params["max_features"]
        if mf in ("auto", "sqrt"):
            return min(p, max(1, math.ceil(math.sqrt(p))))
        if mf == "log2":
            return min(p, max(1, math.ceil(math.log2(p)))) if p > 1 else 1
        return min(p, mf)

    def fit(self, x, y):
        x = check_matrix(x, forbid_nan=True)
        y = check_targets(y, x.shape[0])
        self.classes_ = np.unique(y)
        y_idx = np.searchsorted(self.classes_, y)
        n, p = x.shape
        m = self._resolve_m(p)
        seed = self.effective_seed()
        self.trees_ = []
        for t in range(self.params["n_estimators"]):
            rng = SplitMix64(derive_seed(seed, ("tree", t)))
            if self.params["bootstrap"]:
                rows = np.asarray([rng.below(n) for _ in range(n)], dtype=np.int64)
            else:
                rows = np.arange(n)
            self.trees_.append(
                _grow_tree(
                    x[rows],
                    y_idx[rows],
                    self.classes_.size,
                    self.params["criterion"],
                    self.params["min_samples_split"],
                    self.params["max_depth"],
                    rng=rng,
                    m_features=m,
                )
            )
        self.n_features_ = p
        self.fitted_ = True
        return self

    def _votes(self, x):
        x = check_matrix(x, expect_cols=self.n_features_, forbid_nan=True)
        votes = np.zeros((x.shape[0], self.classes_.size))
        for tree in self.trees_:
            pred = tree.value[tree.apply(x)]
            np.add.at(votes, (np.arange(x.shape[0]), pred), 1.0)
        return votes

    def predict(self, x):
        self.require_fitted()
        return self.classes_[np.argmax(self._votes(x), axis=1)]

    def predict_proba(self, x):
        self.require_fitted()
        return self._votes(x) / len(self.trees_)

    def get_state(self):
        state = {
            "classes_": self.classes_,
            "n_features_": self.n_features_,
            "n_trees": len(self.trees_),
        }
        for i, t in enumerate(self.trees_):
            state[f"t{i}_feature"] = t.feature
            state[f"t{i}_threshold"] = t.threshold
            state[f"t{i}_left"] = t.left
            state[f"t{i}_right"] = t.right
            state[f"t{i}_value"] = t.value
            state[f"t{i}_counts"] = t.counts
        return state

    def set_state(self, state):
        self.classes_ = np.asarray(state["classes_"], dtype=np.float64)
        self.n_features_ = int(state["n_features_"])
        self.trees_ = []
        for i in range(int(state["n_trees"])):
            self.trees_.append(
                _Tree(
                    np.asarray(state[f"t{i}_feature"], dtype=np.int64),
                    np.asarray(state[f"t{i}_threshold"], dtype=np.float64),
                    np.asarray(state[f"t{i}_left"], dtype=np.int64),
                    np.asarray(state[f"t{i}_right"], dtype=np.int64),
                    np.asarray(state[f"t{i}_value"], dtype=np.int64),
                    np.asarray(state[f"t{i}_counts"], dtype=np.float64),
                )
            )
        self.fitted_ = True


class LinearSVC(BaseElement):
    """L2-regularized hinge loss trained by stochastic subgradient descent.

    Pegasos-style schedule: lambda = 1 / (C * n), learning rate 1 / (lambda * t),
    a fixed number of epochs over seed-shuffled data.  Decision rule is
    sign(w.x + b) with 0 mapped to the positive (larger-label) class.
    """

    keyword = "LinearSVC"
    can_predict = True
    uses_seed = True
    param_names = ("C", "epochs", "seed")
    defaults = {"C": 1.0, "epochs": 50, "seed": None}

    def _validate_params(self):
        if self.params["C"] <= 0:
            raise ValueError("C must be > 0")
        if self.params["epochs"] < 1:
            raise ValueError("epochs must be >= 1")

    def fit(self, x, y):
        x = check_matrix(x, forbid_nan=True)
        y = check_targets(y, x.shape[0])
        labels = binary_labels(y)
        self.classes_ = labels
        signs = np.where(y == labels[1], 1.0, -1.0)
        n, p = x.shape
        lam = 1.0 / (self.params["C"] * n)
        rng = self._rng()
        w = np.zeros(p)
        b = 0.0
        t = 0
        order = np.arange(n)
        for _ in range(self.params["epochs"]):
            rng.shuffle(order)
            for i in order:
                t += 1
                eta = 1.0 / (lam * t)
                if signs[i] * (x[i] @ w + b) < 1.0:
                    w = (1.0 - eta * lam) * w + eta * signs[i] * x[i]
                    b += eta * signs[i]
                else:
                    w = (1.0 - eta * lam) * w
        self.w_ = w
        self.b_ = b
        self.n_features_ = p
        self.fitted_ = True
        return self

    def predict(self, x):
        self.require_fitted()
        x = check_matrix(x, expect_cols=self.n_features_, forbid_nan=True)
        scores = x @ self.w_ + self.b_
        return np.where(scores >= 0.0, self.classes_[1], self.classes_[0])

    def get_state(self):
        return {"classes_": self.classes_, "w_": self.w_, "b_": np.float64(self.b_),
                "n_features_": self.n_features_}

    def set_state(self, state):
        self.classes_ = np.asarray(state["classes_"], dtype=np.float64)
        self.w_ = np.asarray(state["w_"], dtype=np.float64)
        self.b_ = float(np.asarray(state["b_"]))
        self.n_features_ = int(state["n_features_"])
        self.fitted_ = True


class Svc(LinearSVC):
    """Keyword alias accepting a kernel parameter; only 'linear' is supported."""

    keyword = "SVC"
    param_names = ("C", "kernel", "epochs", "seed")
    defaults = {"C": 1.0, "kernel": "linear", "epochs": 50, "seed": None}

    def _validate_params(self):
        super()._validate_params()
        if self.params["kernel"] != "linear":
            raise ValueError(
                f"unsupported parameter kernel={self.params['kernel']!r}; only 'linear' is available"
            )
