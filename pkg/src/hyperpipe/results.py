"""Result tree serialization and derived tables.

The results file is canonical JSON (sorted keys, 17-significant-digit floats,
indices as integers), so serialize -> parse -> serialize is byte-identical and
two runs can be compared byte-wise after stripping volatile fields (creation
timestamp, durations).  The JSON schema is documented in the README.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .jsonutil import canonical_json_bytes
from .metrics import greater_is_better

VOLATILE_KEY_PARTS = ("duration", "created_at")


def canonical_tree_bytes(tree: dict) -> bytes:
    return canonical_json_bytes(tree) + b"\n"


def write_results_json(tree: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(canonical_tree_bytes(tree))
    return path


def load_results_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def strip_volatile(tree):
    """Copy of the tree without timestamps and wall-clock durations."""
    if isinstance(tree, dict):
        return {
            k: strip_volatile(v)
            for k, v in tree.items()
            if not any(part in k for part in VOLATILE_KEY_PARTS)
        }
    if isinstance(tree, list):
        return [strip_volatile(v) for v in tree]
    return tree


def _find_node(structure, name):
    for node in structure:
        if node.get("name") == name:
            return node
        for key in ("children", "nodes"):
            if key in node:
                found = _find_node(node[key], name)
                if found is not None:
                    return found
    return None


def best_config_per_estimator(tree: dict, switch_name: str) -> list[dict]:
    """Per Switch child: average the fold-best validation metrics.

    For each outer fold, the best completed configuration restricted to that
    child (by best_config_metric) contributes its mean validation metrics;
    folds where the child never completed are omitted and noted.  Rows come
    back sorted best-first on best_config_metric.
    """
    node = _find_node(tree["pipeline"], switch_name)
    if node is None:
        raise ValueError(f"unknown node {switch_name!r}")
    if node.get("kind") != "switch":
        raise ValueError(f"node {switch_name!r} is not a Switch")

    best_metric = tree["best_config_metric"]
    gib = greater_is_better(best_metric)
    key = f"{switch_name}__current_element"
    rows = []
    for child_idx, child in enumerate(node["children"]):
        fold_values = {name: [] for name in tree["metrics"]}
        folds_missing = []
        for fold in tree["outer_folds"]:
            candidates = [
                rec
                for rec in fold["tested_configs"]
                if rec["status"] == "completed" and rec["config"].get(key) == child_idx
            ]
            if not candidates:
                folds_missing.append(fold["fold_id"])
                continue
            chooser = max if gib else min
            best = chooser(candidates, key=lambda r: r["mean_validation_metrics"][best_metric])
            for name in tree["metrics"]:
                fold_values[name].append(best["mean_validation_metrics"][name])
        row = {
            "estimator": child.get("keyword", child.get("name")),
            "node": child.get("name"),
            "folds_counted": len(tree["outer_folds"]) - len(folds_missing),
            "folds_missing": folds_missing,
            "metrics": {
                name: (float(np.mean(vals)) if vals else None)
                for name, vals in fold_values.items()
            },
        }
        rows.append(row)

    def sort_key(row):
        value = row["metrics"].get(best_metric)
        if value is None:
            return float("-inf") if gib else float("inf")
        return value

    return sorted(rows, key=sort_key, reverse=gib)
