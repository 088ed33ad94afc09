"""Static single-file HTML report with inline vector figures.

The report is a pure function of the result tree: every number shown in its
tables comes straight from results.json, figures are rendered to SVG with a
fixed hash salt and no timestamp metadata (byte-deterministic), and all assets
are inlined.  Alongside the HTML, the figures are also written as standalone
SVG files and the main tables as CSV.
"""

from __future__ import annotations

import csv
import html
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import greater_is_better  # noqa: E402

_SVG_RC = {
    "svg.hashsalt": "hyperpipe-report",
    "svg.fonttype": "path",
    "figure.dpi": 100,
    "font.size": 9,
}

_PALETTE = {"train": "#4878a8", "validation": "#8a6fae", "test": "#30343a",
            "baseline": "#c44e52"}


def format_value(value) -> str:
    """Display formatting shared by every table cell (and mirrored by tests)."""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".4f")
    if value is None:
        return "-"
    return str(value)


def _esc(value) -> str:
    return html.escape(format_value(value))


def _fig_to_svg(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    svg = buf.getvalue()
    return svg[svg.index("<svg") :]


def _completed_configs(tree):
    for fold in tree["outer_folds"]:
        for rec in fold["tested_configs"]:
            if rec["status"] == "completed":
                yield fold["fold_id"], rec


# ---------------------------------------------------------------- figures


def _fig_metric_bars(tree):
    metrics = tree["metrics"]
    summary = tree["summary"]["per_metric"]
    use_test = tree["use_test_set"]
    partitions = ["train", "validation"] + (["test"] if use_test else [])
    fig, axes = plt.subplots(
        1, len(metrics), figsize=(2.1 * len(metrics) + 1, 2.8), sharey=False
    )
    if len(metrics) == 1:
        axes = [axes]
    for ax, name in zip(axes, metrics):
        entry = summary[name]
        means = [entry[f"{p}_mean"] for p in partitions]
        stds = [entry[f"{p}_std"] for p in partitions]
        xs = np.arange(len(partitions))
        ax.bar(xs, means, yerr=stds, capsize=3,
               color=[_PALETTE[p] for p in partitions], width=0.7)
        baseline = entry["baseline_test"] if use_test else entry["baseline_train"]
        ax.axhline(baseline, color=_PALETTE["baseline"], linestyle="--", linewidth=1.2,
                   label="dummy baseline")
        ax.set_xticks(xs)
        ax.set_xticklabels(partitions, rotation=30, ha="right")
        ax.set_title(name, fontsize=8)
    axes[-1].legend(loc="lower right", fontsize=7)
    fig.suptitle("Performance per metric with dummy baseline", fontsize=10)
    return fig


def _fig_confusion(tree):
    counts = tree["summary"]["aggregated_confusion"]
    matrix = np.array([[counts["tn"], counts["fp"]], [counts["fn"], counts["tp"]]], dtype=float)
    fig, ax = plt.subplots(figsize=(3.4, 3.0))
    ax.imshow(matrix, cmap="Blues")
    for i in range(2):
        for j in range(2):
            color = "white" if matrix[i, j] > matrix.max() / 2 else "black"
            ax.text(j, i, str(int(matrix[i, j])), ha="center", va="center", color=color)
    ax.set_xticks([0, 1])
    ax.set_yticks([0, 1])
    ax.set_xticklabels(["pred neg", "pred pos"])
    ax.set_yticklabels(["true neg", "true pos"])
    ax.set_title("Aggregated confusion matrix (fold-best models)", fontsize=9)
    return fig


def _fig_scatter(tree):
    fig, ax = plt.subplots(figsize=(4.0, 3.4))
    cmap = plt.get_cmap("viridis")
    n_folds = max(len(tree["outer_folds"]), 1)
    lo, hi = np.inf, -np.inf
    for fold in tree["outer_folds"]:
        scatter = fold["best_config_evaluation"]["scatter"]
        t = np.asarray(scatter["y_true"])
        p = np.asarray(scatter["y_pred"])
        if t.size:
            lo = min(lo, t.min(), p.min())
            hi = max(hi, t.max(), p.max())
        ax.scatter(t, p, s=10, alpha=0.6, color=cmap(fold["fold_id"] / n_folds),
                   label=f"fold {fold['fold_id']}")
    if np.isfinite(lo):
        ax.plot([lo, hi], [lo, hi], color="#888888", linewidth=1, linestyle=":")
    ax.set_xlabel("true value")
    ax.set_ylabel("predicted value")
    ax.set_title("True vs predicted (fold-best models)", fontsize=9)
    if len(tree["outer_folds"]) <= 8:
        ax.legend(fontsize=7)
    return fig


def _fig_progress(tree):
    best_metric = tree["best_config_metric"]
    gib = greater_is_better(best_metric)
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    cmap = plt.get_cmap("viridis")
    n_folds = max(len(tree["outer_folds"]), 1)
    for fold in tree["outer_folds"]:
        xs, ys = [], []
        best = None
        for rec in fold["tested_configs"]:
            if rec["status"] != "completed":
                continue
            value = rec["mean_validation_metrics"][best_metric]
            if best is None or (value > best if gib else value < best):
                best = value
            xs.append(rec["config_id"])
            ys.append(best)
        if xs:
            ax.step(xs, ys, where="post", color=cmap(fold["fold_id"] / n_folds),
                    label=f"fold {fold['fold_id']}")
    ax.set_xlabel("configuration index")
    ax.set_ylabel(f"best-so-far {best_metric}")
    ax.set_title("Hyperparameter optimization progress per outer fold", fontsize=9)
    if len(tree["outer_folds"]) <= 8:
        ax.legend(fontsize=7)
    return fig


def _fig_parallel(tree):
    best_metric = tree["best_config_metric"]
    entries = [
        (rec["config"], rec["mean_validation_metrics"][best_metric])
        for _, rec in _completed_configs(tree)
    ]
    axes_keys = sorted({key for config, _ in entries for key in config})
    if not axes_keys or not entries:
        return None

    # per-axis value -> vertical position in [0, 1]
    def positions(key):
        values = [config[key] for config, _ in entries if key in config]
        numeric = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values)
        if numeric:
            lo, hi = min(values), max(values)
            span = (hi - lo) or 1.0
            return lambda v: (v - lo) / span, [(lo, 0.0), (hi, 1.0)] if hi > lo else [(lo, 0.5)]
        cats = sorted({str(v) for v in values})
        span = max(len(cats) - 1, 1)
        lookup = {c: i / span for i, c in enumerate(cats)}
        return lambda v: lookup[str(v)], [(c, lookup[c]) for c in cats]

    mappers, tick_sets = {}, {}
    for key in axes_keys:
        mappers[key], tick_sets[key] = positions(key)

    scores = np.array([s for _, s in entries])
    lo, hi = scores.min(), scores.max()
    span = (hi - lo) or 1.0
    cmap = plt.get_cmap("coolwarm")
    fig, ax = plt.subplots(figsize=(1.6 * len(axes_keys) + 2.5, 3.4))
    order = np.argsort(scores) if greater_is_better(best_metric) else np.argsort(-scores)
    for idx in order:  # draw best-performing lines last (on top)
        config, score = entries[idx]
        xs = [i for i, key in enumerate(axes_keys) if key in config]
        ys = [mappers[axes_keys[i]](config[axes_keys[i]]) for i in xs]
        if len(xs) == 1:
            ax.plot(xs, ys, marker="o", markersize=3, color=cmap((score - lo) / span))
        else:
            ax.plot(xs, ys, linewidth=1.1, alpha=0.8, color=cmap((score - lo) / span))
    for i, key in enumerate(axes_keys):
        ax.axvline(i, color="#cccccc", linewidth=0.8)
        for label, pos in tick_sets[key]:
            ax.annotate(format_value(label), (i, pos), textcoords="offset points",
                        xytext=(3, 0), fontsize=6, color="#444444")
    ax.set_xticks(range(len(axes_keys)))
    ax.set_xticklabels(axes_keys, rotation=20, ha="right", fontsize=7)
    ax.set_yticks([])
    sm = plt.cm.ScalarMappable(cmap=cmap, norm=plt.Normalize(vmin=lo, vmax=hi))
    fig.colorbar(sm, ax=ax, label=best_metric)
    ax.set_title("Hyperparameter exploration colored by performance", fontsize=9)
    return fig


# ----------------------------------------------------------------- tables


def _metric_summary_rows(tree):
    rows = []
    for name in tree["metrics"]:
        entry = tree["summary"]["per_metric"][name]
        row = {
            "metric": name,
            "train_mean": entry["train_mean"],
            "train_std": entry["train_std"],
            "validation_mean": entry["validation_mean"],
            "validation_std": entry["validation_std"],
        }
        if tree["use_test_set"]:
            row["test_mean"] = entry["test_mean"]
            row["test_std"] = entry["test_std"]
        row["baseline_train"] = entry["baseline_train"]
        if tree["use_test_set"]:
            row["baseline_test"] = entry["baseline_test"]
        rows.append(row)
    return rows


def _config_table_rows(tree):
    best_metric = tree["best_config_metric"]
    gib = greater_is_better(best_metric)
    rows = []
    for fold in tree["outer_folds"]:
        for rec in fold["tested_configs"]:
            rows.append(
                {
                    "fold": fold["fold_id"],
                    "config_id": rec["config_id"],
                    "status": rec["status"],
                    "config": rec["config"],
                    "metrics": rec["mean_validation_metrics"],
                    "is_fold_best": rec["config_id"] == fold["best_config_id"],
                }
            )

    def sort_key(row):
        rank = {"completed": 0, "pruned": 1, "failed": 2}[row["status"]]
        value = row["metrics"].get(best_metric)
        if value is None:
            score = float("inf")
        else:
            score = -value if gib else value
        return (rank, score, row["fold"], row["config_id"])

    return sorted(rows, key=sort_key)


def _html_table(headers, rows):
    parts = ["<table>", "<thead><tr>"]
    parts.extend(f"<th>{html.escape(h)}</th>" for h in headers)
    parts.append("</tr></thead><tbody>")
    for row in rows:
        parts.append("<tr>" + "".join(f"<td>{cell}</td>" for cell in row) + "</tr>")
    parts.append("</tbody></table>")
    return "".join(parts)


def _config_cell(config):
    if not config:
        return "<em>defaults</em>"
    items = [f"{html.escape(k)}={_esc(v)}" for k, v in sorted(config.items())]
    return "; ".join(items)


def _structure_html(nodes, best_config):
    parts = ["<ul class='structure'>"]
    for node in nodes:
        kind = node["kind"]
        if kind == "element":
            bits = [f"<strong>{html.escape(node['name'])}</strong> "
                    f"({html.escape(node['keyword'])})"]
            assigned = {
                k.split("__", 1)[1]: v
                for k, v in best_config.items()
                if k.startswith(node["name"] + "__")
            }
            params = {k: v for k, v in node["params"].items() if v is not None}
            params.update(assigned)
            if params:
                rendered = ", ".join(
                    f"{html.escape(k)}=<mark>{_esc(v)}</mark>" if k in assigned
                    else f"{html.escape(k)}={_esc(v)}"
                    for k, v in sorted(params.items())
                )
                bits.append(f": {rendered}")
            if assigned.get("disabled") or node.get("disabled"):
                bits.append(" <em>(disabled in best config)</em>")
            parts.append(f"<li>{''.join(bits)}</li>")
        elif kind in ("switch", "stack"):
            label = "Switch (OR)" if kind == "switch" else "Stack (AND)"
            extra = ""
            if kind == "switch":
                chosen = best_config.get(f"{node['name']}__current_element")
                if chosen is not None:
                    extra = f" <em>active child: {_esc(chosen)}</em>"
            parts.append(
                f"<li><strong>{html.escape(node['name'])}</strong> [{label}]{extra}"
                + _structure_html(node["children"], best_config)
                + "</li>"
            )
        elif kind == "branch":
            parts.append(
                f"<li><strong>{html.escape(node['name'])}</strong> [Branch]"
                + _structure_html(node["nodes"], best_config)
                + "</li>"
            )
        else:
            parts.append(
                f"<li><strong>{html.escape(node['name'])}</strong> [Callback: "
                f"{html.escape(str(node.get('delegate')))}]</li>"
            )
    parts.append("</ul>")
    return "".join(parts)


_CSS = """
body { font-family: 'Helvetica Neue', Arial, sans-serif; margin: 2em auto; max-width: 70em;
       color: #21242a; }
h1 { border-bottom: 2px solid #4878a8; padding-bottom: 0.2em; }
h2 { margin-top: 1.6em; color: #2d4a66; }
table { border-collapse: collapse; margin: 0.8em 0; font-size: 0.85em; }
th, td { border: 1px solid #c9d2dc; padding: 0.35em 0.6em; text-align: left; }
th { background: #eef2f7; }
tr:nth-child(even) td { background: #f7f9fb; }
mark { background: #ffe9a8; }
figure { margin: 0.6em 0; }
ul.structure { list-style: square; }
.statusline { color: #5a6572; font-size: 0.9em; }
"""


def emit_html_report(tree: dict, path) -> Path:
    """Write report.html plus standalone figure SVGs and CSV tables."""
    import json

    from .jsonutil import canonical_json

    # normalize through the canonical form so rendering from a live tree and
    # from a reloaded results.json is byte-identical (e.g. 1.0 vs 1)
    tree = json.loads(canonical_json(tree))
    path = Path(path)
    out_dir = path.parent
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    classification = tree["target_kind"] == "classification"

    with plt.rc_context(_SVG_RC):
        figures = {"metric_bars": _fig_to_svg(_fig_metric_bars(tree))}
        if classification:
            figures["confusion_matrix"] = _fig_to_svg(_fig_confusion(tree))
        else:
            figures["prediction_scatter"] = _fig_to_svg(_fig_scatter(tree))
        figures["optimization_progress"] = _fig_to_svg(_fig_progress(tree))
        parallel = _fig_parallel(tree)
        if parallel is not None:
            figures["parallel_coordinates"] = _fig_to_svg(parallel)

    for name, svg in figures.items():
        (fig_dir / f"{name}.svg").write_text(svg, encoding="utf-8")

    summary_rows = _metric_summary_rows(tree)
    config_rows = _config_table_rows(tree)
    _write_csvs(tree, out_dir, summary_rows, config_rows)

    doc = _render_html(tree, figures, summary_rows, config_rows, classification)
    path.write_text(doc, encoding="utf-8")
    return path


def _write_csvs(tree, out_dir, summary_rows, config_rows):
    with open(out_dir / "metrics_summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        headers = list(summary_rows[0].keys())
        writer.writerow(headers)
        for row in summary_rows:
            writer.writerow([format_value(row[h]) for h in headers])

    with open(out_dir / "tested_configs.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        metric_names = tree["metrics"]
        writer.writerow(["fold", "config_id", "status", "config"]
                        + [f"validation_{m}" for m in metric_names])
        for row in config_rows:
            writer.writerow(
                [row["fold"], row["config_id"], row["status"],
                 "; ".join(f"{k}={format_value(v)}" for k, v in sorted(row["config"].items()))]
                + [format_value(row["metrics"].get(m)) for m in metric_names]
            )


def _render_html(tree, figures, summary_rows, config_rows, classification):
    metric_names = tree["metrics"]
    parts = [
        "<!DOCTYPE html><html><head><meta charset='utf-8'>",
        f"<title>{html.escape(tree['name'])} analysis report</title>",
        f"<style>{_CSS}</style></head><body>",
        f"<h1>{html.escape(tree['name'])}</h1>",
    ]

    # analysis design header
    outer = tree["outer_cv"]
    inner = tree["inner_cv"]
    design_rows = [
        ("target kind", tree["target_kind"]),
        ("samples", tree["n_samples"]),
        ("features", tree["n_features"]),
        ("seed", tree["seed"]),
        ("outer cv", f"{outer['strategy']} (n_splits={format_value(outer['n_splits'])}"
                     + (f", test_fraction={format_value(outer['test_fraction'])}"
                        if "test_fraction" in outer else "") + ")"),
        ("inner cv", f"{inner['strategy']} (n_splits={format_value(inner['n_splits'])})"),
        ("optimizer", tree["optimizer"]["name"]),
        ("metrics", ", ".join(metric_names)),
        ("best config metric", tree["best_config_metric"]),
        ("outer test set used", tree["use_test_set"]),
    ]
    parts.append("<h2>Analysis design</h2>")
    parts.append(_html_table(["setting", "value"],
                             [(html.escape(str(k)), _esc(v)) for k, v in design_rows]))

    parts.append("<h2>A. Performance metrics</h2>")
    parts.append(f"<figure>{figures['metric_bars']}</figure>")
    headers = list(summary_rows[0].keys())
    parts.append(_html_table(headers, [[_esc(r[h]) for h in headers] for r in summary_rows]))

    if classification:
        parts.append("<h2>B. Confusion matrix</h2>")
        parts.append(f"<figure>{figures['confusion_matrix']}</figure>")
        detail = []
        for fold in tree["outer_folds"]:
            ev = fold["best_config_evaluation"]
            c = ev["confusion"]
            detail.append([_esc(fold["fold_id"]), html.escape(ev["partition"]),
                           _esc(c["tp"]), _esc(c["fp"]), _esc(c["tn"]), _esc(c["fn"])])
        parts.append(_html_table(["fold", "partition", "tp", "fp", "tn", "fn"], detail))
    else:
        parts.append("<h2>B. True vs predicted</h2>")
        parts.append(f"<figure>{figures['prediction_scatter']}</figure>")

    parts.append("<h2>C. Optimization progress</h2>")
    parts.append(f"<figure>{figures['optimization_progress']}</figure>")

    parts.append("<h2>D. Pipeline and best configuration</h2>")
    best = tree["overall_best"]
    parts.append(
        f"<p class='statusline'>overall best configuration from fold {_esc(best['fold_id'])} "
        f"(selected by {html.escape(best['selected_by'])} {html.escape(tree['best_config_metric'])}"
        f" = {_esc(best['performance'])})</p>"
    )
    parts.append(_structure_html(tree["pipeline"], best["config"]))

    parts.append("<h2>E. Hyperparameter exploration</h2>")
    if "parallel_coordinates" in figures:
        parts.append(f"<figure>{figures['parallel_coordinates']}</figure>")
    else:
        parts.append("<p>No hyperparameters were explored.</p>")

    parts.append("<h2>F. Tested configurations</h2>")
    parts.append("<p class='statusline'>pre-sorted: completed configurations first, "
                 "best validation performance on top</p>")
    rows = []
    for row in config_rows:
        rows.append(
            [_esc(row["fold"]), _esc(row["config_id"]),
             html.escape(row["status"]) + (" &#9733;" if row["is_fold_best"] else ""),
             _config_cell(row["config"])]
            + [_esc(row["metrics"].get(m)) for m in metric_names]
        )
    parts.append(_html_table(["fold", "config", "status", "parameters"]
                             + [f"validation {m}" for m in metric_names], rows))

    parts.append("</body></html>")
    return "".join(parts)
