"""The analysis engine: nested cross-validation around a configurable pipeline.

For every outer split the engine establishes a dummy baseline, asks the
optimizer for configurations, evaluates each on inner splits drawn from the
outer training partition only, applies performance constraints between inner
folds, and tracks the fold-best configuration.  With ``use_test_set`` the
fold-best is refitted on the outer training partition and scored on the outer
test partition.  The overall best configuration is then fitted on all data and
archived.  Everything is deterministic given the master seed, including under
fold-level parallelism: every stochastic component draws from a seed derived
from its (fold, element, configuration) scope.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .archive import SUFFIX, save_model
from .cache import TransformerCache
from .data import CLASSIFICATION, Dataset, subset
from .errors import CallbackError, RunError
from .metrics import (
    compute_metrics,
    confusion_counts,
    greater_is_better,
    metric_info,
    resolve_positive_label,
)
from .optimization import make_optimizer, shall_continue
from .pipeline import Pipeline
from .results import write_results_json
from .rng import derive_seed
from .validation import CvStrategy

logger = logging.getLogger("hyperpipe")

_SEEDED_OPTIMIZERS = ("random_grid_search", "switch")


@dataclass
class HyperpipeConfig:
    """All workflow parameters of one analysis."""

    name: str
    pipeline: Pipeline
    metrics: list
    best_config_metric: str
    outer_cv: CvStrategy
    inner_cv: CvStrategy
    optimizer: str = "grid_search"
    optimizer_params: dict = field(default_factory=dict)
    performance_constraints: list = field(default_factory=list)
    use_test_set: bool = True
    seed: int = 0
    project_folder: str = "."
    cache_folder: str | None = None
    verbosity: int = 1
    jobs: int = 1
    positive_label: float | None = None
    write_report: bool = True

    def __post_init__(self):
        if not self.metrics:
            raise ValueError("at least one metric is required")
        if self.best_config_metric not in self.metrics:
            raise ValueError(
                f"best_config_metric {self.best_config_metric!r} must be one of {self.metrics}"
            )
        for name in self.metrics:
            metric_info(name)
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if not self.pipeline.nodes:
            raise ValueError("pipeline has no nodes")


class Hyperpipe:
    """Runs the full training, optimization and testing workflow."""

    def __init__(self, config: HyperpipeConfig):
        self.config = config
        self.results_ = None
        self.best_pipeline_ = None
        self.stats = {}

    # ------------------------------------------------------------------ fit

    def fit(self, dataset: Dataset):
        cfg = self.config
        self._validate_against(dataset)
        out_dir = Path(cfg.project_folder) / cfg.name
        out_dir.mkdir(parents=True, exist_ok=True)
        cache = TransformerCache(cfg.cache_folder) if cfg.cache_folder else None

        positive = (
            resolve_positive_label(dataset.y, cfg.positive_label)
            if dataset.kind == CLASSIFICATION
            else None
        )
        outer_seed = derive_seed(cfg.seed, ("outer_cv",))
        splits = cfg.outer_cv.make_splits(dataset.n_samples, dataset.y, outer_seed)

        started = time.perf_counter()
        if cfg.jobs > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                futures = [
                    pool.submit(self._run_fold, fold_id, split, dataset, cache, positive)
                    for fold_id, split in enumerate(splits)
                ]
                folds = [f.result() for f in futures]
        else:
            folds = [
                self._run_fold(fold_id, split, dataset, cache, positive)
                for fold_id, split in enumerate(splits)
            ]

        overall = self._select_overall_best(folds)
        final_pipe, final_record = self._final_fit(dataset, overall["config"], cache, out_dir)
        tree = self._build_tree(dataset, splits, folds, overall, final_record, positive)
        tree["durations_ms"] = {"total": (time.perf_counter() - started) * 1000.0}

        write_results_json(tree, out_dir / "results.json")
        if cfg.write_report:
            from .report import emit_html_report

            emit_html_report(tree, out_dir / "report.html")

        self.best_pipeline_ = final_pipe
        self.results_ = tree
        if cache is not None:
            self.stats = {
                "cache_hits": cache.hits,
                "cache_misses": cache.misses,
                "transformer_fits": cache.computed_fits,
            }
        return self

    def _validate_against(self, dataset: Dataset):
        cfg = self.config
        for name in cfg.metrics:
            info = metric_info(name)
            if info.kind != dataset.kind:
                raise ValueError(
                    f"metric {name!r} is a {info.kind} metric but the target is {dataset.kind}"
                )
        for constraint in cfg.performance_constraints:
            info = metric_info(constraint.metric)
            if info.kind != dataset.kind:
                raise ValueError(
                    f"constraint metric {constraint.metric!r} does not match {dataset.kind} targets"
                )

    # ------------------------------------------------------------- one fold

    def _make_optimizer(self, fold_id: int):
        cfg = self.config
        params = dict(cfg.optimizer_params)
        if cfg.optimizer in _SEEDED_OPTIMIZERS and params.get("seed") is None:
            params["seed"] = derive_seed(cfg.seed, ("fold", fold_id, "optimizer"))
        return make_optimizer(cfg.optimizer, params)

    def _run_fold(self, fold_id, split, dataset, cache, positive):
        cfg = self.config
        fold_started = time.perf_counter()
        train_abs = split.train_indices
        train_ds = subset(dataset, train_abs)
        test_ds = subset(dataset, split.test_indices) if cfg.use_test_set else None

        baseline = self._dummy_baseline(train_ds, test_ds, positive)

        inner_seed = derive_seed(cfg.seed, ("fold", fold_id, "inner_cv"))
        inner_splits = cfg.inner_cv.make_splits(train_ds.n_samples, train_ds.y, inner_seed)

        optimizer = self._make_optimizer(fold_id)
        optimizer.prepare(cfg.pipeline)

        gib = greater_is_better(cfg.best_config_metric)
        records = []
        collected = []  # per config: (val_true, val_pred) over completed inner folds
        for config_id, config in enumerate(optimizer.ask()):
            record, val_pairs = self._evaluate_config(
                config, config_id, fold_id, train_ds, train_abs, inner_splits, cache, positive
            )
            records.append(record)
            collected.append(val_pairs)
            perf = record["mean_validation_metrics"].get(cfg.best_config_metric)
            optimizer.tell(config, perf, gib)
            if cfg.verbosity >= 1:
                logger.info(
                    "fold %d config %d [%s] %s=%s",
                    fold_id,
                    config_id,
                    record["status"],
                    cfg.best_config_metric,
                    "n/a" if perf is None else f"{perf:.4f}",
                )

        best_id = self._fold_best(records)
        if best_id is None:
            raise RunError(
                f"outer fold {fold_id}: no configuration completed "
                f"({len(records)} tested); cannot select a best config",
                records=records,
            )
        best_record = records[best_id]

        fold = {
            "fold_id": fold_id,
            "train_indices": train_abs.tolist(),
            "test_indices": split.test_indices.tolist(),
            "baseline": baseline,
            "tested_configs": records,
            "best_config_id": best_id,
            "best_config": dict(best_record["config"]),
        }

        if cfg.use_test_set:
            pipe = self._configured_clone(best_record["config"], fold_id)
            pipe.fit(train_ds.x, train_ds.y, train_ds.extras, cache=cache)
            y_pred = pipe.predict(test_ds.x, test_ds.extras)
            fold["test_metrics"] = compute_metrics(cfg.metrics, test_ds.y, y_pred, positive)
            fold["best_config_evaluation"] = self._evaluation_payload(
                "test", test_ds.y, y_pred, dataset.kind, positive
            )
        else:
            y_true, y_pred = collected[best_id]
            fold["best_config_evaluation"] = self._evaluation_payload(
                "validation", y_true, y_pred, dataset.kind, positive
            )

        fold["duration_ms"] = (time.perf_counter() - fold_started) * 1000.0
        return fold

    def _dummy_baseline(self, train_ds, test_ds, positive):
        from .elements import create_element

        keyword = "DummyClassifier" if train_ds.kind == CLASSIFICATION else "DummyRegressor"
        dummy = create_element(keyword)
        dummy.fit(train_ds.x, train_ds.y)
        baseline = {
            "strategy": dummy.get_params()["strategy"],
            "train_metrics": compute_metrics(
                self.config.metrics, train_ds.y, dummy.predict(train_ds.x), positive
            ),
        }
        if test_ds is not None:
            baseline["test_metrics"] = compute_metrics(
                self.config.metrics, test_ds.y, dummy.predict(test_ds.x), positive
            )
        return baseline

    def _configured_clone(self, config, fold_id) -> Pipeline:
        pipe = self.config.pipeline.clone()
        pipe.apply_config(config)
        pipe.assign_seeds(self.config.seed, ("fold", fold_id))
        return pipe

    def _evaluate_config(
        self, config, config_id, fold_id, train_ds, train_abs, inner_splits, cache, positive
    ):
        """Evaluate one configuration over the inner splits, fold by fold."""
        cfg = self.config
        record = {
            "config_id": config_id,
            "config": dict(config),
            "status": "completed",
            "inner_folds": [],
        }
        constraint_history = {c.metric: [] for c in cfg.performance_constraints}
        val_true_parts, val_pred_parts = [], []

        for v, inner in enumerate(inner_splits):
            t0 = time.perf_counter()
            inner_train = subset(train_ds, inner.train_indices)
            inner_val = subset(train_ds, inner.test_indices)
            try:
                pipe = self._configured_clone(config, fold_id)
                pipe.fit(inner_train.x, inner_train.y, inner_train.extras, cache=cache)
                pred_train = pipe.predict(inner_train.x, inner_train.extras)
                pred_val = pipe.predict(inner_val.x, inner_val.extras)
            except CallbackError:
                raise  # a broken inspection hook aborts the whole run
            except Exception as exc:  # element failures poison only this config
                record["status"] = "failed"
                record["error"] = f"{type(exc).__name__}: {exc}"
                logger.warning(
                    "fold %d config %d failed in inner fold %d: %s", fold_id, config_id, v, exc
                )
                break
            fold_entry = {
                "fold": v,
                "train_indices": train_abs[inner.train_indices].tolist(),
                "validation_indices": train_abs[inner.test_indices].tolist(),
                "train_metrics": compute_metrics(cfg.metrics, inner_train.y, pred_train, positive),
                "validation_metrics": compute_metrics(cfg.metrics, inner_val.y, pred_val, positive),
                "duration_ms": (time.perf_counter() - t0) * 1000.0,
            }
            record["inner_folds"].append(fold_entry)
            val_true_parts.append(inner_val.y)
            val_pred_parts.append(pred_val)

            if cfg.performance_constraints and v < len(inner_splits) - 1:
                for constraint in cfg.performance_constraints:
                    constraint_history[constraint.metric].append(
                        fold_entry["validation_metrics"][constraint.metric]
                    )
                if not all(
                    shall_continue(c, constraint_history[c.metric])
                    for c in cfg.performance_constraints
                ):
                    record["status"] = "pruned"
                    break

        self._summarize_record(record)
        if val_true_parts:
            val_pairs = (np.concatenate(val_true_parts), np.concatenate(val_pred_parts))
        else:
            val_pairs = (np.empty(0), np.empty(0))
        return record, val_pairs

    def _summarize_record(self, record):
        folds = record["inner_folds"]
        if not folds:
            record["mean_validation_metrics"] = {}
            record["std_validation_metrics"] = {}
            record["mean_train_metrics"] = {}
            return
        mean_val, std_val, mean_train = {}, {}, {}
        for name in self.config.metrics:
            vals = np.array([f["validation_metrics"][name] for f in folds])
            mean_val[name] = float(vals.mean())
            std_val[name] = float(np.sqrt(np.mean((vals - vals.mean()) ** 2)))
            trains = np.array([f["train_metrics"][name] for f in folds])
            mean_train[name] = float(trains.mean())
        record["mean_validation_metrics"] = mean_val
        record["std_validation_metrics"] = std_val
        record["mean_train_metrics"] = mean_train

    def _fold_best(self, records):
        """Extremal mean validation best_config_metric among completed configs;
        ties keep the earliest configuration."""
        cfg = self.config
        gib = greater_is_better(cfg.best_config_metric)
        best_id, best_val = None, None
        for record in records:
            if record["status"] != "completed":
                continue
            value = record["mean_validation_metrics"][cfg.best_config_metric]
            if best_val is None or (value > best_val if gib else value < best_val):
                best_id, best_val = record["config_id"], value
        return best_id

    @staticmethod
    def _evaluation_payload(partition, y_true, y_pred, kind, positive):
        payload = {"partition": partition}
        if kind == CLASSIFICATION:
            c = confusion_counts(y_true, y_pred, positive)
            payload["confusion"] = {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn}
        else:
            payload["scatter"] = {
                "y_true": np.asarray(y_true).tolist(),
                "y_pred": np.asarray(y_pred).tolist(),
            }
        return payload

    # ----------------------------------------------------- overall selection

    def _select_overall_best(self, folds):
        cfg = self.config
        gib = greater_is_better(cfg.best_config_metric)
        best_fold, best_val = None, None
        for fold in folds:
            if cfg.use_test_set:
                value = fold["test_metrics"][cfg.best_config_metric]
            else:
                record = fold["tested_configs"][fold["best_config_id"]]
                value = record["mean_validation_metrics"][cfg.best_config_metric]
            if best_val is None or (value > best_val if gib else value < best_val):
                best_fold, best_val = fold, value
        return {
            "fold_id": best_fold["fold_id"],
            "config": dict(best_fold["best_config"]),
            "performance": best_val,
            "selected_by": "test" if cfg.use_test_set else "validation",
        }

    def _final_fit(self, dataset, config, cache, out_dir):
        cfg = self.config
        t0 = time.perf_counter()
        pipe = cfg.pipeline.clone()
        pipe.apply_config(config)
        pipe.assign_seeds(cfg.seed, ("final",))
        pipe.fit(dataset.x, dataset.y, dataset.extras, cache=cache)
        model_file = f"model{SUFFIX}"
        save_model(
            pipe,
            out_dir / model_file,
            metadata={
                "name": cfg.name,
                "target_kind": dataset.kind,
                "config": config,
                "positive_label": cfg.positive_label,
            },
        )
        return pipe, {
            "duration_ms": (time.perf_counter() - t0) * 1000.0,
            "model_file": model_file,
        }

    # ------------------------------------------------------------- the tree

    def _build_tree(self, dataset, splits, folds, overall, final_record, positive):
        cfg = self.config
        tree = {
            "schema_version": 1,
            "name": cfg.name,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "seed": cfg.seed,
            "target_kind": dataset.kind,
            "positive_label": positive,
            "n_samples": dataset.n_samples,
            "n_features": dataset.n_features,
            "metrics": list(cfg.metrics),
            "best_config_metric": cfg.best_config_metric,
            "optimizer": {"name": cfg.optimizer, "params": dict(cfg.optimizer_params)},
            "outer_cv": cfg.outer_cv.describe(),
            "inner_cv": cfg.inner_cv.describe(),
            "use_test_set": cfg.use_test_set,
            "performance_constraints": [c.describe() for c in cfg.performance_constraints],
            "pipeline": cfg.pipeline.describe(),
            "outer_folds": folds,
            "overall_best": overall,
            "final_fit": final_record,
            "summary": self._summary(dataset, folds),
        }
        return tree

    def _summary(self, dataset, folds):
        cfg = self.config
        per_metric = {}
        for name in cfg.metrics:
            entry = {}
            best_records = [f["tested_configs"][f["best_config_id"]] for f in folds]
            for label, values in (
                ("train", [r["mean_train_metrics"][name] for r in best_records]),
                ("validation", [r["mean_validation_metrics"][name] for r in best_records]),
            ):
                arr = np.asarray(values)
                entry[f"{label}_mean"] = float(arr.mean())
                entry[f"{label}_std"] = float(np.sqrt(np.mean((arr - arr.mean()) ** 2)))
            if cfg.use_test_set:
                arr = np.asarray([f["test_metrics"][name] for f in folds])
                entry["test_mean"] = float(arr.mean())
                entry["test_std"] = float(np.sqrt(np.mean((arr - arr.mean()) ** 2)))
            entry["baseline_train"] = float(
                np.mean([f["baseline"]["train_metrics"][name] for f in folds])
            )
            if cfg.use_test_set:
                entry["baseline_test"] = float(
                    np.mean([f["baseline"]["test_metrics"][name] for f in folds])
                )
            per_metric[name] = entry

        summary = {"per_metric": per_metric}
        if dataset.kind == CLASSIFICATION:
            total = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
            for fold in folds:
                for key, value in fold["best_config_evaluation"]["confusion"].items():
                    total[key] += value
            summary["aggregated_confusion"] = total
        return summary


def hyperpipe_fit(config: HyperpipeConfig, dataset: Dataset):
    """Functional entry point: returns (fitted pipeline, result tree)."""
    engine = Hyperpipe(config).fit(dataset)
    return engine.best_pipeline_, engine.results_
