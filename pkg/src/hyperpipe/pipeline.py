"""Pipeline composition: ordered nodes with estimator-anywhere semantics.

A pipeline streams (X, y, extras) through a sequence of nodes.  Transformers
fit on the stream and replace X; target-modifying transformers (resamplers)
may replace y and duplicate/drop rows at fit time only; estimators placed
before the end contribute their predictions as a single new column; the final
node fits without streaming and produces the pipeline's predictions.
Composites: Switch routes to exactly one child, Stack fans out and
concatenates child outputs column-wise, Branch inlines a sub-pipeline,
Callback hands the current stream to a delegate for inspection.
"""

from __future__ import annotations

import logging

import numpy as np

from .data import fingerprint_arrays
from .elements import create_element
from .elements.base import BaseElement
from .errors import CallbackError, NotFittedError
from .jsonutil import canonical_json
from .rng import derive_seed

logger = logging.getLogger("hyperpipe")


def shape_logger(x, y, extras):
    """Built-in callback delegate: logs the shape of the running stream."""
    y_len = None if y is None else len(y)
    logger.info("stream shape: x=%s y=%s extras=%s", x.shape, y_len, sorted(extras))


NAMED_CALLBACKS = {"shape_logger": shape_logger}


def _noop_callback(x, y, extras):
    return None


class _Node:
    kind = ""

    def __init__(self, name):
        if "__" in name:
            raise ValueError(f"node name {name!r} may not contain '__'")
        self.name = name
        self.disabled = False


class Element(_Node):
    """Leaf node wrapping one registered algorithm.

    ``hyperparameters`` maps parameter names to value specs (see
    ``hyperpipe.optimization``); ``test_disabled`` adds an extra
    "skip this element entirely" configuration to the search space.
    """

    kind = "element"

    def __init__(self, keyword, name=None, hyperparameters=None, test_disabled=False,
                 **fixed_params):
        super().__init__(name or keyword)
        if isinstance(keyword, BaseElement):
            self.element = keyword
        else:
            self.element = create_element(keyword, **fixed_params)
        self.hyperparameters = dict(hyperparameters or {})
        self.test_disabled = bool(test_disabled)

    def clone(self):
        node = Element.__new__(Element)
        _Node.__init__(node, self.name)
        node.element = self.element.clone()
        node.hyperparameters = dict(self.hyperparameters)
        node.test_disabled = self.test_disabled
        node.disabled = self.disabled
        return node

    def describe(self):
        return {
            "kind": "element",
            "name": self.name,
            "keyword": self.element.keyword,
            "params": self.element.get_params(),
            "test_disabled": self.test_disabled,
            "disabled": self.disabled,
        }


class Switch(_Node):
    """OR-composite: exactly one child is active per configuration."""

    kind = "switch"

    def __init__(self, name, children=None):
        super().__init__(name)
        self.children = list(children or [])
        self.current_element = 0

    def __iadd__(self, node):
        self.children.append(node)
        return self

    @property
    def active(self):
        return self.children[self.current_element]

    def clone(self):
        node = Switch(self.name, [c.clone() for c in self.children])
        node.current_element = self.current_element
        node.disabled = self.disabled
        return node

    def describe(self):
        return {
            "kind": "switch",
            "name": self.name,
            "current_element": self.current_element,
            "children": [c.describe() for c in self.children],
        }


class Stack(_Node):
    """AND-composite: all children see the same input; outputs are
    concatenated column-wise (probability columns when requested)."""

    kind = "stack"

    def __init__(self, name, children=None, use_probabilities=False):
        super().__init__(name)
        self.children = list(children or [])
        self.use_probabilities = bool(use_probabilities)

    def __iadd__(self, node):
        self.children.append(node)
        return self

    def clone(self):
        node = Stack(self.name, [c.clone() for c in self.children], self.use_probabilities)
        node.disabled = self.disabled
        return node

    def describe(self):
        return {
            "kind": "stack",
            "name": self.name,
            "use_probabilities": self.use_probabilities,
            "children": [c.describe() for c in self.children],
        }


class Branch(_Node):
    """A sub-pipeline acting as a single node."""

    kind = "branch"

    def __init__(self, name, nodes=None):
        super().__init__(name)
        self.nodes = list(nodes or [])

    def __iadd__(self, node):
        self.nodes.append(node)
        return self

    def clone(self):
        node = Branch(self.name, [c.clone() for c in self.nodes])
        node.disabled = self.disabled
        return node

    def describe(self):
        return {"kind": "branch", "name": self.name, "nodes": [c.describe() for c in self.nodes]}


class Callback(_Node):
    """Inspection hook: the delegate sees exactly what the next node receives;
    its return value is ignored and the stream continues unchanged."""

    kind = "callback"

    def __init__(self, name, delegate):
        super().__init__(name)
        if isinstance(delegate, str):
            if delegate not in NAMED_CALLBACKS:
                raise ValueError(f"unknown named callback {delegate!r}")
            self.delegate_name = delegate
            self.delegate = NAMED_CALLBACKS[delegate]
        else:
            self.delegate_name = getattr(delegate, "__name__", "<custom>")
            self.delegate = delegate

    def clone(self):
        node = Callback.__new__(Callback)
        _Node.__init__(node, self.name)
        node.delegate = self.delegate
        node.delegate_name = self.delegate_name
        node.disabled = self.disabled
        return node

    def describe(self):
        name = self.delegate_name if self.delegate_name in NAMED_CALLBACKS else "<custom>"
        return {"kind": "callback", "name": self.name, "delegate": name}


def _walk(nodes):
    for node in nodes:
        yield node
        if isinstance(node, (Switch, Stack)):
            yield from _walk(node.children)
        elif isinstance(node, Branch):
            yield from _walk(node.nodes)


class Pipeline:
    """An ordered node sequence that can be configured, fitted, and queried."""

    def __init__(self, nodes=None):
        self.nodes = list(nodes or [])
        self.fitted = False
        self.n_features_in_ = None
        self._check_names()

    def __iadd__(self, node):
        self.nodes.append(node)
        self._check_names()
        self.fitted = False
        return self

    def _check_names(self):
        seen = set()
        for node in _walk(self.nodes):
            if node.name in seen:
                raise ValueError(f"duplicate node name {node.name!r}")
            seen.add(node.name)

    def walk(self):
        return _walk(self.nodes)

    def elements(self):
        """All leaf element nodes in traversal order."""
        return [n for n in self.walk() if isinstance(n, Element)]

    def node_by_name(self, name):
        for node in self.walk():
            if node.name == name:
                return node
        return None

    def clone(self):
        cloned = Pipeline([n.clone() for n in self.nodes])
        return cloned

    def describe(self):
        return [n.describe() for n in self.nodes]

    # configuration --------------------------------------------------------

    def apply_config(self, config: dict):
        """Apply one flat hyperparameter assignment ("node__param" keys).

        All disabled flags are reset first; a config fully determines which
        nodes are bypassed and which switch children are active.
        """
        for node in self.walk():
            node.disabled = False
        for key, value in config.items():
            if "__" not in key:
                raise ValueError(f"config key {key!r} is not of the form 'node__param'")
            name, param = key.split("__", 1)
            node = self.node_by_name(name)
            if node is None:
                raise ValueError(f"config key {key!r} addresses unknown node {name!r}")
            if param == "disabled":
                if not isinstance(value, bool):
                    raise ValueError(f"{key}: disabled flag must be boolean")
                node.disabled = value
            elif isinstance(node, Switch) and param == "current_element":
                if not isinstance(value, int) or isinstance(value, bool) or not (
                    0 <= value < len(node.children)
                ):
                    raise ValueError(
                        f"{key}: invalid child index {value!r} for switch with "
                        f"{len(node.children)} children"
                    )
                node.current_element = value
            elif isinstance(node, Element):
                node.element.set_params(**{param: value})
            else:
                raise ValueError(f"config key {key!r}: node {name!r} has no parameter {param!r}")
        self.fitted = False
        return self

    def assign_seeds(self, master_seed: int, scope=()):
        """Give every seeded element a scoped, parameter-dependent seed.

        The derivation covers (scope, node name, configured parameters), so
        the same element under the same configuration in the same fold trains
        identically whether it sits inside a Switch or in its own pipeline.
        Explicit user-set seeds are left untouched.
        """
        for node in self.walk():
            if isinstance(node, Element) and node.element.uses_seed:
                params = {k: v for k, v in node.element.get_params().items() if k != "seed"}
                node.element._derived_seed = derive_seed(
                    master_seed, list(scope) + ["element", node.name, canonical_json(params)]
                )
        return self

    # fitting ---------------------------------------------------------------

    def fit(self, x, y, extras=None, cache=None):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        y = np.asarray(y, dtype=np.float64).ravel()
        if x.shape[0] == 0:
            raise ValueError("cannot fit on an empty dataset")
        if not self.nodes:
            raise ValueError("pipeline has no nodes")
        extras = dict(extras or {})
        self._validate_terminal(self.nodes[-1])
        self.n_features_in_ = x.shape[1]

        idx = 0
        if cache is not None:
            chain = []
            while idx < len(self.nodes) - 1 and self._cacheable(self.nodes[idx]):
                node = self.nodes[idx]
                chain.append(self._node_descriptor(node))
                if not node.disabled:
                    key = cache.key(chain, fingerprint_arrays(x, y, extras), "fit")
                    hit = cache.load(key)
                    if hit is not None:
                        node.element.set_state(hit["state"])
                        x, y, extras = hit["x"], hit["y"], hit["extras"]
                    else:
                        x, y, extras = self._fit_streaming(node, x, y, extras)
                        cache.record_fit()
                        cache.store(
                            key,
                            {"state": node.element.get_state(), "x": x, "y": y, "extras": extras},
                        )
                idx += 1

        for node in self.nodes[idx:-1]:
            x, y, extras = self._fit_streaming(node, x, y, extras)
        self._fit_terminal(self.nodes[-1], x, y, extras)
        self.fitted = True
        return self

    @staticmethod
    def _cacheable(node):
        return isinstance(node, Element) and (
            node.disabled or (node.element.can_transform and not node.element.can_predict)
        )

    @staticmethod
    def _node_descriptor(node):
        desc = {
            "keyword": node.element.keyword,
            "params": node.element.get_params(),
            "disabled": node.disabled,
        }
        if node.element.uses_seed:
            desc["effective_seed"] = node.element.effective_seed()
        return desc

    def _fit_streaming(self, node, x, y, extras):
        """Process one node at fit time; estimators stream their predictions."""
        if node.disabled:
            return x, y, extras
        if isinstance(node, Element):
            elem = node.element
            if elem.modifies_targets:
                x, y, source = elem.fit_resample(x, y)
                extras = {name: chan[source] for name, chan in extras.items()}
                return x, y, extras
            if elem.can_transform:
                elem.fit(x, y)
                return elem.transform(x), y, extras
            elem.fit(x, y)
            return elem.predict(x).reshape(-1, 1), y, extras
        if isinstance(node, Callback):
            self._invoke_callback(node, x, y, extras)
            return x, y, extras
        if isinstance(node, Switch):
            return self._fit_streaming(node.active, x, y, extras)
        if isinstance(node, Branch):
            for sub in node.nodes:
                x, y, extras = self._fit_streaming(sub, x, y, extras)
            return x, y, extras
        if isinstance(node, Stack):
            return self._fit_stack(node, x, y, extras)
        raise TypeError(f"unknown node type {type(node).__name__}")

    def _fit_terminal(self, node, x, y, extras):
        if isinstance(node, Element):
            node.element.fit(x, y)
            return
        if isinstance(node, Switch):
            self._fit_terminal(node.active, x, y, extras)
            return
        if isinstance(node, Branch):
            for sub in node.nodes[:-1]:
                x, y, extras = self._fit_streaming(sub, x, y, extras)
            self._fit_terminal(node.nodes[-1], x, y, extras)
            return
        raise ValueError(f"node {node.name!r} cannot terminate a pipeline")

    def _fit_stack(self, node, x, y, extras):
        outputs = []
        for child in node.children:
            if child.disabled:  # a disabled child contributes nothing
                continue
            if isinstance(child, Element) and child.element.modifies_targets:
                raise ValueError(
                    f"stack child {child.name!r} modifies targets; stacks must preserve rows"
                )
            if isinstance(child, Callback):
                raise ValueError(f"callback {child.name!r} cannot be a stack child")
            if isinstance(child, Element) and not child.element.can_transform:
                elem = child.element
                elem.fit(x, y)
                if node.use_probabilities and elem.can_predict_proba:
                    outputs.append(elem.predict_proba(x))
                else:
                    outputs.append(elem.predict(x).reshape(-1, 1))
            else:
                cx, cy, _ = self._fit_streaming(child, x, y, extras)
                if cy.shape[0] != y.shape[0]:
                    raise ValueError(f"stack child {child.name!r} changed the row count")
                outputs.append(cx if cx.ndim == 2 else cx.reshape(-1, 1))
        if not outputs:
            raise ValueError(f"stack {node.name!r}: every child is disabled")
        rows = {o.shape[0] for o in outputs}
        if len(rows) != 1 or rows.pop() != x.shape[0]:
            raise ValueError(f"stack {node.name!r}: children produced mismatched row counts")
        return np.hstack(outputs), y, extras

    def _invoke_callback(self, node, x, y, extras):
        x_copy = x.copy()
        y_copy = None if y is None else y.copy()
        extras_copy = {name: chan.copy() for name, chan in extras.items()}
        try:
            node.delegate(x_copy, y_copy, extras_copy)
        except Exception as exc:  # delegate failures abort the run, attributed
            raise CallbackError(node.name, exc) from exc

    # prediction -------------------------------------------------------------

    def predict(self, x, extras=None):
        if not self.fitted:
            raise NotFittedError("pipeline is not fitted")
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        extras = dict(extras or {})
        for node in self.nodes[:-1]:
            x, extras = self._predict_streaming(node, x, extras)
        return np.asarray(self._predict_terminal(self.nodes[-1], x, extras)).ravel()

    def _predict_streaming(self, node, x, extras):
        if node.disabled:
            return x, extras
        if isinstance(node, Element):
            elem = node.element
            if elem.applies_during == "fit_only":
                return x, extras
            if elem.can_transform:
                return elem.transform(x), extras
            return elem.predict(x).reshape(-1, 1), extras
        if isinstance(node, Callback):
            self._invoke_callback(node, x, None, extras)
            return x, extras
        if isinstance(node, Switch):
            return self._predict_streaming(node.active, x, extras)
        if isinstance(node, Branch):
            for sub in node.nodes:
                x, extras = self._predict_streaming(sub, x, extras)
            return x, extras
        if isinstance(node, Stack):
            outputs = []
            for child in node.children:
                if child.disabled:
                    continue
                if isinstance(child, Element) and not child.element.can_transform:
                    elem = child.element
                    if node.use_probabilities and elem.can_predict_proba:
                        outputs.append(elem.predict_proba(x))
                    else:
                        outputs.append(elem.predict(x).reshape(-1, 1))
                else:
                    cx, _ = self._predict_streaming(child, x, extras)
                    outputs.append(cx if cx.ndim == 2 else cx.reshape(-1, 1))
            if not outputs:
                raise ValueError(f"stack {node.name!r}: every child is disabled")
            rows = {o.shape[0] for o in outputs}
            if len(rows) != 1 or rows.pop() != x.shape[0]:
                raise ValueError(f"stack {node.name!r}: children produced mismatched row counts")
            return np.hstack(outputs), extras
        raise TypeError(f"unknown node type {type(node).__name__}")

    def _predict_terminal(self, node, x, extras):
        if isinstance(node, Element):
            return node.element.predict(x)
        if isinstance(node, Switch):
            return self._predict_terminal(node.active, x, extras)
        if isinstance(node, Branch):
            for sub in node.nodes[:-1]:
                x, extras = self._predict_streaming(sub, x, extras)
            return self._predict_terminal(node.nodes[-1], x, extras)
        raise ValueError(f"node {node.name!r} cannot terminate a pipeline")

    def _validate_terminal(self, node):
        if node.disabled:
            raise ValueError(f"final node {node.name!r} is disabled; the pipeline cannot predict")
        if isinstance(node, Element):
            if not node.element.can_predict:
                raise ValueError(
                    f"final node {node.name!r} ({node.element.keyword}) cannot predict"
                )
            return
        if isinstance(node, Switch):
            self._validate_terminal(node.active)
            return
        if isinstance(node, Branch):
            if not node.nodes:
                raise ValueError(f"branch {node.name!r} is empty")
            self._validate_terminal(node.nodes[-1])
            return
        raise ValueError(f"final node {node.name!r} ({node.kind}) cannot predict")


def build_from_structure(structure: list) -> Pipeline:
    """Rebuild an unfitted pipeline from its ``describe()`` output."""
    return Pipeline([_node_from_dict(d) for d in structure])


def _node_from_dict(d: dict):
    kind = d["kind"]
    if kind == "element":
        node = Element(
            d["keyword"],
            name=d["name"],
            test_disabled=d.get("test_disabled", False),
            **d.get("params", {}),
        )
        node.disabled = d.get("disabled", False)
        return node
    if kind == "switch":
        node = Switch(d["name"], [_node_from_dict(c) for c in d["children"]])
        node.current_element = d.get("current_element", 0)
        return node
    if kind == "stack":
        return Stack(
            d["name"],
            [_node_from_dict(c) for c in d["children"]],
            use_probabilities=d.get("use_probabilities", False),
        )
    if kind == "branch":
        return Branch(d["name"], [_node_from_dict(c) for c in d["nodes"]])
    if kind == "callback":
        delegate = d.get("delegate", "<custom>")
        if delegate in NAMED_CALLBACKS:
            return Callback(d["name"], delegate)
        return Callback(d["name"], _noop_callback)
    raise ValueError(f"unknown node kind {kind!r}")
