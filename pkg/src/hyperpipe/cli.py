"""Command line front door: run | predict | report | list-elements.

Exit codes: 0 success, 1 runtime failure, 2 validation error.  Flags override
spec-file fields; the HYPERPIPE_CACHE environment variable overrides the spec
cache folder (an explicit --cache-folder flag beats both).
"""

from __future__ import annotations

import csv
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import archive
from .elements import element_metadata, registered_elements
from .engine import Hyperpipe
from .errors import ArchiveError, HyperpipeError, SpecFileError
from .report import emit_html_report
from .results import load_results_json
from .specfile import build_analysis, load_spec_file

_LEVELS = {0: logging.WARNING, 1: logging.INFO, 2: logging.DEBUG}


def _setup_logging(verbosity: int):
    logging.basicConfig(format="%(message)s", stream=sys.stderr, force=True)
    logging.getLogger("hyperpipe").setLevel(_LEVELS.get(verbosity, logging.INFO))


@click.group()
def main():
    """Compose, optimize and evaluate ML pipelines under nested cross-validation."""


@main.command()
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Analysis spec file (JSON).")
@click.option("--project-folder", default=None, type=click.Path(file_okay=False),
              help="Output root; overrides the spec.")
@click.option("--cache-folder", default=None, help="Transformer cache folder.")
@click.option("--seed", default=None, type=int, help="Master seed; overrides the spec.")
@click.option("--use-test-set/--no-use-test-set", "use_test_set", default=None,
              help="Evaluate fold-best configs on the outer test partitions.")
@click.option("--verbosity", default=None, type=click.IntRange(0, 2))
@click.option("--jobs", default=None, type=click.IntRange(min=1),
              help="Concurrent outer folds.")
def run(spec_path, project_folder, cache_folder, seed, use_test_set, verbosity, jobs):
    """Run a full analysis: optimize, evaluate, persist model + results + report."""
    if cache_folder is None:
        cache_folder = os.environ.get("HYPERPIPE_CACHE") or None
    try:
        spec = load_spec_file(spec_path)
        config, dataset = build_analysis(
            spec,
            overrides={
                "project_folder": project_folder,
                "cache_folder": cache_folder,
                "seed": seed,
                "use_test_set": use_test_set,
                "verbosity": verbosity,
                "jobs": jobs,
                "spec_dir": Path(spec_path).parent,
            },
        )
    except SpecFileError as exc:
        click.echo("spec validation failed:", err=True)
        for line in exc.errors:
            click.echo(f"  {line}", err=True)
        sys.exit(2)

    _setup_logging(config.verbosity)
    try:
        engine = Hyperpipe(config).fit(dataset)
    except HyperpipeError as exc:
        click.echo(f"run failed: {exc}", err=True)
        sys.exit(1)
    out_dir = Path(config.project_folder) / config.name
    click.echo(f"results: {out_dir / 'results.json'}")
    click.echo(f"report:  {out_dir / 'report.html'}")
    click.echo(f"model:   {out_dir / engine.results_['final_fit']['model_file']}")


@main.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_path", type=click.Path(dir_okay=False))
def predict(model_path, csv_path, out_path):
    """Predict with a saved model on a feature CSV (no target column)."""
    try:
        pipeline = archive.load_model(model_path)
    except ArchiveError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    try:
        x = _read_feature_csv(csv_path)
    except ValueError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    expected = pipeline.n_features_in_
    if expected is not None and x.shape[1] != expected:
        click.echo(
            f"column mismatch: model was fitted on {expected} features, "
            f"{csv_path} has {x.shape[1]} columns",
            err=True,
        )
        sys.exit(1)
    predictions = pipeline.predict(x)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prediction"])
        for value in predictions:
            writer.writerow([format(float(value), ".17g")])
    click.echo(f"wrote {len(predictions)} predictions to {out_path}")


def _read_feature_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    x = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell == "":
                x[i, j] = np.nan
            else:
                try:
                    x[i, j] = float(cell)
                except ValueError:
                    raise ValueError(f"{path}: non-numeric cell {cell!r} in row {i + 2}") from None
    return x


@main.command()
@click.argument("results_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_path", type=click.Path(dir_okay=False))
def report(results_path, out_path):
    """Regenerate the HTML report (and sidecar files) from a results file."""
    try:
        tree = load_results_json(results_path)
    except ValueError as exc:
        click.echo(f"{results_path}: malformed results file: {exc}", err=True)
        sys.exit(2)
    try:
        emit_html_report(tree, out_path)
    except (KeyError, TypeError) as exc:
        click.echo(f"{results_path}: incomplete results tree ({exc})", err=True)
        sys.exit(2)
    click.echo(f"report: {out_path}")


@main.command("list-elements")
def list_elements():
    """List registered elements with their kind and parameters."""
    rows = []
    for keyword in registered_elements():
        meta = element_metadata(keyword)
        kind = "estimator" if meta["can_predict"] else "transformer"
        if meta["modifies_targets"]:
            kind = "resampler"
        rows.append((keyword, kind, ", ".join(meta["params"]) or "-"))
    width = max(len(r[0]) for r in rows) + 2
    kind_width = max(len(r[1]) for r in rows) + 2
    click.echo(f"{'keyword':<{width}}{'kind':<{kind_width}}parameters")
    for keyword, kind, params in rows:
        click.echo(f"{keyword:<{width}}{kind:<{kind_width}}{params}")


if __name__ == "__main__":
    main()
