"""Declarative analysis spec files (JSON) for the command line.

A spec file mirrors the programmatic setup: data source, CV strategies,
metrics, optimizer, constraints, and the ordered element list (with nested
children for switch/stack/branch).  Validation collects every problem with
its field path before failing.
"""

from __future__ import annotations

import json
from pathlib import Path

from .data import CLASSIFICATION, REGRESSION, load_csv_dataset
from .elements import registered_elements
from .engine import HyperpipeConfig
from .errors import SpecFileError
from .metrics import metric_info
from .optimization import (
    Boolean,
    Categorical,
    FloatRange,
    IntegerRange,
    MinimumPerformanceConstraint,
    optimizer_names,
)
from .pipeline import NAMED_CALLBACKS, Branch, Callback, Element, Pipeline, Stack, Switch
from .validation import CvStrategy


def load_spec_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except FileNotFoundError:
        raise SpecFileError([f"spec file not found: {path}"]) from None
    except json.JSONDecodeError as exc:
        raise SpecFileError([f"{path}: not valid JSON (line {exc.lineno}: {exc.msg})"]) from None
    if not isinstance(spec, dict):
        raise SpecFileError([f"{path}: top level must be a JSON object"])
    return spec


class _Collector:
    def __init__(self):
        self.errors = []

    def add(self, field, message):
        self.errors.append(f"{field}: {message}")

    def raise_if_any(self):
        if self.errors:
            raise SpecFileError(self.errors)


def _parse_hyperparameter(raw, field, errors):
    if isinstance(raw, list):
        if not raw:
            errors.add(field, "categorical list must not be empty")
            return None
        return Categorical(tuple(raw))
    if not isinstance(raw, dict):
        errors.add(field, f"expected a list or an object, got {type(raw).__name__}")
        return None
    kind = raw.get("type")
    try:
        if kind == "float_range":
            return FloatRange(
                start=float(raw["start"]),
                stop=float(raw["stop"]),
                step=raw.get("step"),
                num=raw.get("num"),
                range_type=raw.get("range_type", "linspace"),
            )
        if kind == "integer_range":
            return IntegerRange(
                int(raw["start"]),
                int(raw["stop"]),
                step=raw.get("step"),
                num=raw.get("num"),
            )
        if kind == "categorical":
            return Categorical(tuple(raw["values"]))
        if kind == "boolean":
            return Boolean()
    except (KeyError, TypeError, ValueError) as exc:
        errors.add(field, f"invalid {kind}: {exc}")
        return None
    errors.add(field, f"unknown hyperparameter type {kind!r}")
    return None


def _parse_node(raw, field, errors):
    if not isinstance(raw, dict):
        errors.add(field, "element entries must be objects")
        return None
    kind = raw.get("kind", "element")
    name = raw.get("name")
    try:
        if kind == "element":
            keyword = raw.get("keyword")
            if keyword not in registered_elements():
                errors.add(f"{field}.keyword", f"unknown element {keyword!r}")
                return None
            hyperparameters = {}
            for pname, spec in (raw.get("hyperparameters") or {}).items():
                parsed = _parse_hyperparameter(spec, f"{field}.hyperparameters.{pname}", errors)
                if parsed is not None:
                    hyperparameters[pname] = parsed
            return Element(
                keyword,
                name=name,
                hyperparameters=hyperparameters,
                test_disabled=bool(raw.get("test_disabled", False)),
                **(raw.get("fixed_params") or {}),
            )
        if kind in ("switch", "stack", "branch"):
            if not name:
                errors.add(f"{field}.name", f"{kind} nodes need a name")
                return None
            children = []
            for i, child in enumerate(raw.get("children") or []):
                node = _parse_node(child, f"{field}.children[{i}]", errors)
                if node is not None:
                    children.append(node)
            if not children:
                errors.add(f"{field}.children", f"{kind} needs at least one child")
                return None
            if kind == "switch":
                return Switch(name, children)
            if kind == "stack":
                return Stack(name, children, use_probabilities=bool(raw.get("use_probabilities", False)))
            return Branch(name, children)
        if kind == "callback":
            delegate = raw.get("delegate")
            if delegate not in NAMED_CALLBACKS:
                errors.add(
                    f"{field}.delegate",
                    f"unknown callback {delegate!r}; spec files may only use "
                    f"{sorted(NAMED_CALLBACKS)}",
                )
                return None
            return Callback(name or delegate, delegate)
    except ValueError as exc:
        errors.add(field, str(exc))
        return None
    errors.add(f"{field}.kind", f"unknown node kind {kind!r}")
    return None


def _parse_cv(raw, field, errors):
    if not isinstance(raw, dict):
        errors.add(field, "must be an object")
        return None
    try:
        return CvStrategy(
            variant=raw.get("strategy", "kfold"),
            n_splits=int(raw.get("n_splits", 5)),
            test_fraction=raw.get("test_fraction"),
            shuffle=bool(raw.get("shuffle", False)),
            seed=raw.get("seed"),
        )
    except (TypeError, ValueError) as exc:
        errors.add(field, str(exc))
        return None


def build_analysis(spec: dict, overrides: dict | None = None):
    """Turn a parsed spec (plus CLI overrides) into (HyperpipeConfig, Dataset)."""
    overrides = overrides or {}
    errors = _Collector()

    name = spec.get("name")
    if not name or not isinstance(name, str):
        errors.add("name", "a non-empty analysis name is required")

    data = spec.get("data")
    kind = None
    if not isinstance(data, dict):
        errors.add("data", "required object with path, target_column and kind")
    else:
        kind = data.get("kind")
        if kind not in (CLASSIFICATION, REGRESSION):
            errors.add("data.kind", f"must be '{CLASSIFICATION}' or '{REGRESSION}'")
        if "path" not in data:
            errors.add("data.path", "required")
        if "target_column" not in data:
            errors.add("data.target_column", "required")

    metric_names = spec.get("metrics")
    if not isinstance(metric_names, list) or not metric_names:
        errors.add("metrics", "a non-empty metric list is required")
        metric_names = []
    for i, m in enumerate(metric_names):
        try:
            info = metric_info(m)
            if kind and info.kind != kind:
                errors.add(f"metrics[{i}]", f"{m!r} is a {info.kind} metric, data is {kind}")
        except ValueError:
            errors.add(f"metrics[{i}]", f"unknown metric {m!r}")

    best_metric = spec.get("best_config_metric")
    if best_metric not in metric_names:
        errors.add("best_config_metric", f"{best_metric!r} must appear in metrics")

    optimizer = spec.get("optimizer") or {"name": "grid_search"}
    opt_name = optimizer.get("name", "grid_search")
    if opt_name not in optimizer_names():
        errors.add("optimizer.name", f"unknown optimizer {opt_name!r}; "
                                     f"choose from {optimizer_names()}")

    constraints = []
    for i, raw in enumerate(spec.get("performance_constraints") or []):
        try:
            constraints.append(
                MinimumPerformanceConstraint(
                    metric=raw["metric"],
                    threshold=float(raw["threshold"]),
                    strategy=raw.get("strategy", "mean"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            errors.add(f"performance_constraints[{i}]", str(exc))

    outer = _parse_cv(spec.get("cv", {}).get("outer"), "cv.outer", errors)
    inner = _parse_cv(spec.get("cv", {}).get("inner"), "cv.inner", errors)

    elements = spec.get("elements")
    nodes = []
    if not isinstance(elements, list) or not elements:
        errors.add("elements", "a non-empty element list is required")
    else:
        for i, raw in enumerate(elements):
            node = _parse_node(raw, f"elements[{i}]", errors)
            if node is not None:
                nodes.append(node)

    pipeline = None
    if nodes and len(nodes) == len(elements or []):
        try:
            pipeline = Pipeline(nodes)
        except ValueError as exc:
            errors.add("elements", str(exc))

    errors.raise_if_any()

    use_test_set = spec.get("use_test_set", True)
    if overrides.get("use_test_set") is not None:
        use_test_set = overrides["use_test_set"]
    seed = overrides.get("seed")
    if seed is None:
        seed = spec.get("seed", 0)
    cache_folder = overrides.get("cache_folder") or spec.get("cache_folder")
    project_folder = overrides.get("project_folder") or spec.get("project_folder", ".")
    verbosity = overrides.get("verbosity")
    if verbosity is None:
        verbosity = spec.get("verbosity", 1)

    config = HyperpipeConfig(
        name=name,
        pipeline=pipeline,
        metrics=list(metric_names),
        best_config_metric=best_metric,
        optimizer=opt_name,
        optimizer_params=dict(optimizer.get("params") or {}),
        outer_cv=outer,
        inner_cv=inner,
        performance_constraints=constraints,
        use_test_set=bool(use_test_set),
        seed=int(seed),
        project_folder=project_folder,
        cache_folder=cache_folder,
        verbosity=int(verbosity),
        jobs=int(overrides.get("jobs") or spec.get("jobs", 1)),
        positive_label=spec.get("positive_label"),
    )

    data_path = Path(data["path"])
    if not data_path.is_absolute() and "spec_dir" in overrides:
        data_path = Path(overrides["spec_dir"]) / data_path
    try:
        dataset = load_csv_dataset(data_path, data["target_column"], kind)
    except (OSError, ValueError) as exc:
        raise SpecFileError([f"data: {exc}"]) from None
    return config, dataset
