"""Performance metrics: scoring functions, registry, aggregation.

Hard-label metrics only.  Zero-denominator conventions: f1/precision/recall
score 0, Matthews correlation scores 0, r2 with zero target variance scores 0.
The positive class defaults to the larger of the two labels and can be
overridden per call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import CLASSIFICATION, REGRESSION


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _as_float_1d(v, name):
    arr = np.asarray(v, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    return arr


def _check_pair(y_true, y_pred):
    t = _as_float_1d(y_true, "y_true")
    p = _as_float_1d(y_pred, "y_pred")
    if t.shape[0] != p.shape[0]:
        raise ValueError(f"length mismatch: {t.shape[0]} true vs {p.shape[0]} predicted")
    return t, p


def resolve_positive_label(labels, positive_label=None) -> float:
    labels = np.unique(np.asarray(labels, dtype=np.float64))
    if positive_label is not None:
        return float(positive_label)
    return float(labels.max())


def confusion_counts(y_true, y_pred, positive_label=None) -> ConfusionCounts:
    """Binary confusion counts with respect to the positive label."""
    t, p = _check_pair(y_true, y_pred)
    labels = np.unique(np.concatenate([t, p]))
    if labels.size > 2:
        raise ValueError(f"confusion counts need binary labels, got {labels.size} classes")
    pos = resolve_positive_label(labels, positive_label)
    tp = int(np.sum((t == pos) & (p == pos)))
    fn = int(np.sum((t == pos) & (p != pos)))
    fp = int(np.sum((t != pos) & (p == pos)))
    tn = int(np.sum((t != pos) & (p != pos)))
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def _per_class_recall(t, p, classes):
    recalls = []
    for c in classes:
        mask = t == c
        recalls.append(float(np.mean(p[mask] == c)) if mask.any() else 0.0)
    return recalls


def _binary_or_macro(t, p, positive_label, per_class_fn):
    """Binary metrics score the positive class; multiclass macro-averages."""
    classes = np.unique(np.concatenate([t, p]))
    if classes.size <= 2:
        pos = resolve_positive_label(classes, positive_label)
        return per_class_fn(t, p, pos)
    return float(np.mean([per_class_fn(t, p, c) for c in classes]))


def _precision_of(t, p, c):
    predicted = p == c
    if not predicted.any():
        return 0.0
    return float(np.mean(t[predicted] == c))


def _recall_of(t, p, c):
    actual = t == c
    if not actual.any():
        return 0.0
    return float(np.mean(p[actual] == c))


def _f1_of(t, p, c):
    prec = _precision_of(t, p, c)
    rec = _recall_of(t, p, c)
    if prec + rec == 0.0:
        return 0.0
    return 2.0 * prec * rec / (prec + rec)


def _accuracy(t, p, positive_label):
    return float(np.mean(t == p))


def _balanced_accuracy(t, p, positive_label):
    classes = np.unique(t)
    return float(np.mean(_per_class_recall(t, p, classes)))


def _precision(t, p, positive_label):
    return _binary_or_macro(t, p, positive_label, _precision_of)


def _recall(t, p, positive_label):
    return _binary_or_macro(t, p, positive_label, _recall_of)


def _f1(t, p, positive_label):
    return _binary_or_macro(t, p, positive_label, _f1_of)


def _require_binary(t, p, metric):
    classes = np.unique(np.concatenate([t, p]))
    if classes.size > 2:
        raise ValueError(f"{metric} is only defined for binary problems")
    return classes


def _sensitivity(t, p, positive_label):
    classes = _require_binary(t, p, "sensitivity")
    pos = resolve_positive_label(classes, positive_label)
    return _recall_of(t, p, pos)


def _specificity(t, p, positive_label):
    classes = _require_binary(t, p, "specificity")
    pos = resolve_positive_label(classes, positive_label)
    neg = [c for c in classes if c != pos]
    if not neg:
        # degenerate: only the positive class ever appears
        return 0.0
    return _recall_of(t, p, float(neg[0]))


def _matthews(t, p, positive_label):
    _require_binary(t, p, "matthews_corrcoef")
    c = confusion_counts(t, p, positive_label)
    denom = math.sqrt(
        float(c.tp + c.fp) * float(c.tp + c.fn) * float(c.tn + c.fp) * float(c.tn + c.fn)
    )
    if denom == 0.0:
        return 0.0
    return (c.tp * c.tn - c.fp * c.fn) / denom


def _mae(t, p, positive_label):
    return float(np.mean(np.abs(t - p)))


def _mse(t, p, positive_label):
    return float(np.mean((t - p) ** 2))


def _r2(t, p, positive_label):
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        return 0.0
    ss_res = float(np.sum((t - p) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class MetricInfo:
    name: str
    kind: str
    greater_is_better: bool
    fn: object


_REGISTRY: dict[str, MetricInfo] = {}


def register_metric(name: str, kind: str, greater_is_better: bool, fn) -> None:
    if name in _REGISTRY:
        raise ValueError(f"metric {name!r} already registered")
    if kind not in (CLASSIFICATION, REGRESSION):
        raise ValueError(f"unknown metric kind {kind!r}")
    _REGISTRY[name] = MetricInfo(name, kind, greater_is_better, fn)


def metric_info(name: str) -> MetricInfo:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown metric {name!r}") from None


def registered_metrics() -> list[str]:
    return sorted(_REGISTRY)


def greater_is_better(name: str) -> bool:
    return metric_info(name).greater_is_better


def score(name: str, y_true, y_pred, positive_label=None) -> float:
    info = metric_info(name)
    t, p = _check_pair(y_true, y_pred)
    return float(info.fn(t, p, positive_label))


def compute_metrics(names, y_true, y_pred, positive_label=None) -> dict[str, float]:
    t, p = _check_pair(y_true, y_pred)
    return {name: float(metric_info(name).fn(t, p, positive_label)) for name in names}


def aggregate(values) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation."""
    vals = np.asarray(list(values), dtype=np.float64)
    if vals.size == 0:
        raise ValueError("cannot aggregate an empty list")
    mean = float(vals.mean())
    return mean, float(np.sqrt(np.mean((vals - mean) ** 2)))


for _name, _fn in [
    ("accuracy", _accuracy),
    ("balanced_accuracy", _balanced_accuracy),
    ("f1_score", _f1),
    ("precision", _precision),
    ("recall", _recall),
    ("sensitivity", _sensitivity),
    ("specificity", _specificity),
    ("matthews_corrcoef", _matthews),
]:
    register_metric(_name, CLASSIFICATION, True, _fn)

register_metric("mean_absolute_error", REGRESSION, False, _mae)
register_metric("mean_squared_error", REGRESSION, False, _mse)
register_metric("r2", REGRESSION, True, _r2)
