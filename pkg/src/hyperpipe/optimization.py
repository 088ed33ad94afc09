"""Hyperparameter spaces, grid expansion, ask/tell optimizers, pruning rules."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .metrics import greater_is_better
from .pipeline import Branch, Callback, Element, Stack, Switch
from .rng import SplitMix64, derive_seed


@dataclass(frozen=True)
class FloatRange:
    """Float progression: half-open [start, stop) with ``step``, or
    ``num`` endpoint-inclusive points (linspace / logspace / geomspace)."""

    start: float
    stop: float
    step: float | None = None
    num: int | None = None
    range_type: str = "linspace"

    def __post_init__(self):
        if self.range_type not in ("linspace", "logspace", "geomspace"):
            raise ValueError(f"unknown range_type {self.range_type!r}")
        if self.start >= self.stop:
            raise ValueError("start must be < stop")
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be > 0")
        if self.num is not None and self.num < 2:
            raise ValueError("num must be >= 2")
        if self.range_type in ("logspace", "geomspace") and self.start <= 0:
            raise ValueError("log-scaled ranges require start > 0")


@dataclass(frozen=True)
class IntegerRange:
    """Integer progression: half-open [start, stop) with ``step`` (default 1),
    or ``num`` endpoint-inclusive points, rounded and deduplicated."""

    start: int
    stop: int
    step: int | None = None
    num: int | None = None

    def __post_init__(self):
        if self.start >= self.stop:
            raise ValueError("start must be < stop")
        if self.step is not None and self.step < 1:
            raise ValueError("step must be >= 1")
        if self.num is not None and self.num < 2:
            raise ValueError("num must be >= 2")


@dataclass(frozen=True)
class Categorical:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError("categorical spec needs at least one value")


@dataclass(frozen=True)
class Boolean:
    pass


def expand_spec(spec) -> list:
    """All candidate values of one hyperparameter, in deterministic order."""
    if isinstance(spec, (list, tuple)):
        spec = Categorical(tuple(spec))
    if isinstance(spec, Categorical):
        return list(spec.values)
    if isinstance(spec, Boolean):
        return [True, False]
    if isinstance(spec, IntegerRange):
        if spec.num is not None:
            raw = [
                int(round(spec.start + i * (spec.stop - spec.start) / (spec.num - 1)))
                for i in range(spec.num)
            ]
            return sorted(set(raw))
        return list(range(spec.start, spec.stop, spec.step or 1))
    if isinstance(spec, FloatRange):
        if spec.step is not None:
            values = []
            i = 0
            while True:
                v = spec.start + i * spec.step
                if v >= spec.stop:
                    return values
                values.append(v)
                i += 1
        num = spec.num if spec.num is not None else 10
        if spec.range_type == "linspace":
            inner = [
                spec.start + i * (spec.stop - spec.start) / (num - 1) for i in range(1, num - 1)
            ]
        else:
            la, lb = math.log(spec.start), math.log(spec.stop)
            inner = [math.exp(la + i * (lb - la) / (num - 1)) for i in range(1, num - 1)]
        return [spec.start] + inner + [spec.stop]
    raise TypeError(f"unknown hyperparameter spec {spec!r}")


def _element_grid(node: Element) -> list[dict]:
    names = list(node.hyperparameters)
    expanded = [expand_spec(node.hyperparameters[n]) for n in names]
    for n, values in zip(names, expanded):
        if not values:
            raise ValueError(f"{node.name}__{n} expands to zero values")
    configs = [
        {f"{node.name}__{n}": v for n, v in zip(names, combo)}
        for combo in itertools.product(*expanded)
    ]
    if node.test_disabled:
        configs.append({f"{node.name}__disabled": True})
    return configs


def _node_grid(node) -> list[dict]:
    if isinstance(node, Element):
        return _element_grid(node)
    if isinstance(node, Callback):
        return [{}]
    if isinstance(node, Switch):
        configs = []
        for i, child in enumerate(node.children):
            for sub in _node_grid(child):
                configs.append({f"{node.name}__current_element": i, **sub})
        return configs
    if isinstance(node, (Stack, Branch)):
        children = node.children if isinstance(node, Stack) else node.nodes
        configs = [{}]
        for child in children:
            configs = [{**a, **b} for a, b in itertools.product(configs, _node_grid(child))]
        return configs
    raise TypeError(f"unknown node type {type(node).__name__}")


def grid_configurations(pipeline) -> list[dict]:
    """Full Cartesian grid over the pipeline, deterministic odometer order
    (declaration order, last element varying fastest); Switch nodes contribute
    the disjoint union over their children."""
    configs = [{}]
    for node in pipeline.nodes:
        configs = [{**a, **b} for a, b in itertools.product(configs, _node_grid(node))]
    return configs


def grid_size(pipeline) -> int:
    """Closed-form count matching ``grid_configurations`` length."""

    def count(node):
        if isinstance(node, Element):
            total = 1
            for spec in node.hyperparameters.values():
                total *= len(expand_spec(spec))
            return total + (1 if node.test_disabled else 0)
        if isinstance(node, Callback):
            return 1
        if isinstance(node, Switch):
            return sum(count(c) for c in node.children)
        children = node.children if isinstance(node, Stack) else node.nodes
        total = 1
        for child in children:
            total *= count(child)
        return total

    total = 1
    for node in pipeline.nodes:
        total *= count(node)
    return total


# --- optimizers --------------------------------------------------------------


class GridSearch:
    """Exhaustive sweep in grid order; ignores tell()."""

    def __init__(self):
        self._grid = None

    def prepare(self, pipeline):
        self._grid = grid_configurations(pipeline)
        return self

    def prepare_with_grid(self, grid):
        self._grid = [dict(c) for c in grid]
        return self

    def ask(self):
        if self._grid is None:
            raise RuntimeError("optimizer asked before prepare()")
        for config in self._grid:
            yield dict(config)

    def tell(self, config, performance, metric_greater_is_better=True):
        pass


class RandomGridSearch(GridSearch):
    """A seeded permutation of the grid, truncated to ``n_configurations``."""

    def __init__(self, n_configurations=10, seed=None):
        super().__init__()
        if n_configurations < 1:
            raise ValueError("n_configurations must be >= 1")
        self.n_configurations = n_configurations
        self.seed = seed

    def _permute(self):
        order = SplitMix64(self.seed or 0).permutation(len(self._grid))
        self._grid = [self._grid[i] for i in order[: self.n_configurations]]

    def prepare(self, pipeline):
        super().prepare(pipeline)
        self._permute()
        return self

    def prepare_with_grid(self, grid):
        super().prepare_with_grid(grid)
        self._permute()
        return self


class SwitchOptimizer:
    """One independent sub-optimizer per Switch child, asked round-robin.

    Each child's space is the shared (non-switch) grid crossed with that
    child's own grid; every sub-optimizer gets ``n_configurations`` draws.
    """

    def __init__(self, n_configurations=10, seed=None, sub_strategy="random_grid_search"):
        if sub_strategy not in ("random_grid_search", "grid_search"):
            raise ValueError(f"unknown sub-strategy {sub_strategy!r}")
        self.n_configurations = n_configurations
        self.seed = seed
        self.sub_strategy = sub_strategy
        self._subs = None

    def prepare(self, pipeline):
        switches = [n for n in pipeline.walk() if isinstance(n, Switch)]
        if not switches:
            raise ValueError("switch optimizer requires a Switch in the pipeline")
        if len(switches) > 1:
            raise ValueError("switch optimizer supports exactly one Switch")
        switch = switches[0]
        full = grid_configurations(pipeline)
        key = f"{switch.name}__current_element"
        self._subs = []
        for i in range(len(switch.children)):
            child_grid = [c for c in full if c.get(key) == i]
            if self.sub_strategy == "grid_search":
                sub = GridSearch()
            else:
                sub = RandomGridSearch(
                    self.n_configurations, derive_seed(self.seed or 0, ("switch_child", i))
                )
            sub.prepare_with_grid(child_grid)
            self._subs.append(sub)
        return self

    def ask(self):
        if self._subs is None:
            raise RuntimeError("optimizer asked before prepare()")
        streams = [sub.ask() for sub in self._subs]
        while streams:
            exhausted = []
            for stream in streams:
                try:
                    yield next(stream)
                except StopIteration:
                    exhausted.append(stream)
            streams = [s for s in streams if s not in exhausted]

    def tell(self, config, performance, metric_greater_is_better=True):
        pass


_OPTIMIZERS = {
    "grid_search": GridSearch,
    "random_grid_search": RandomGridSearch,
    "switch": SwitchOptimizer,
}


def make_optimizer(name: str, params: dict | None = None):
    try:
        factory = _OPTIMIZERS[name]
    except KeyError:
        raise ValueError(f"unknown optimizer {name!r}") from None
    return factory(**(params or {}))


def optimizer_names():
    return sorted(_OPTIMIZERS)


# --- performance constraints --------------------------------------------------


@dataclass(frozen=True)
class MinimumPerformanceConstraint:
    """Abort a configuration's remaining inner folds when its partial
    performance misses ``threshold`` under the chosen strategy."""

    metric: str
    threshold: float
    strategy: str = "mean"

    def __post_init__(self):
        if self.strategy not in ("first", "mean", "all"):
            raise ValueError(f"unknown constraint strategy {self.strategy!r}")
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")
        greater_is_better(self.metric)  # raises for unknown metrics

    def describe(self):
        return {"metric": self.metric, "threshold": self.threshold, "strategy": self.strategy}


def shall_continue(constraint: MinimumPerformanceConstraint, performances) -> bool:
    """Decide whether to evaluate further inner folds given results so far."""
    perfs = list(performances)
    if not perfs:
        raise ValueError("need at least one completed fold")
    gib = greater_is_better(constraint.metric)

    def misses(value):
        return value < constraint.threshold if gib else value > constraint.threshold

    if constraint.strategy == "first":
        return not misses(perfs[0])
    if constraint.strategy == "mean":
        return not misses(sum(perfs) / len(perfs))
    return not all(misses(p) for p in perfs)
