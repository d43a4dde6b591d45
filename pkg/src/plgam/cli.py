"""Batch command-line entry points."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import report
from .constraints import ConstraintSpec
from .dataset import kfold, load_csv
from .errors import ConfigurationError, IngestionError, PlgamError, ValidationError
from .evaluation import cross_validate, gen_synthetic_load
from .gam import TrainConfig, load_model, save_model, train

CONFIG_KEYS = {
    "lambda": ("lam", float),
    "k-basis": ("k_basis", int),
    "step": ("step", float),
    "rounds": ("rounds", int),
    "alpha": ("alpha", float),
    "grid-size": ("grid_size", int),
    "pairwise": ("pairwise", lambda s: s.lower() in ("1", "true", "yes", "on")),
    "standardize-target": ("standardize_target", lambda s: s.lower() in ("1", "true", "yes", "on")),
    "seed": ("seed", int),
}


def _fail(msg: str, code: int = 2):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _load_config_file(path) -> dict:
    """key = value lines; keys mirror the CLI flag names."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"{path}:{lineno}: unknown config key {key!r}")
        field, conv = CONFIG_KEYS[key]
        try:
            values[field] = conv(raw.strip())
        except ValueError:
            raise ConfigurationError(f"{path}:{lineno}: bad value for {key!r}: {raw.strip()!r}")
    return values


def _build_config(config_path, **flags) -> TrainConfig:
    values = _load_config_file(config_path) if config_path else {}
    for field, v in flags.items():
        if v is not None:
            values[field] = v
    return TrainConfig(**values).validate()


def _config_options(f):
    opts = [
        click.option("--lambda", "lam", type=float, default=None, help="ridge trade-off"),
        click.option("--k-basis", type=int, default=None, help="max basis selections per fit"),
        click.option("--step", type=float, default=None, help="boosting step size"),
        click.option("--rounds", type=int, default=None, help="boosting rounds"),
        click.option("--alpha", type=float, default=None, help="projected-update blend coefficient"),
        click.option("--grid-size", type=int, default=None, help="thresholds per feature"),
        click.option("--pairwise/--no-pairwise", default=None, help="pairwise hinge selection"),
        click.option("--standardize-target/--no-standardize-target", default=None),
        click.option("--seed", type=int, default=None),
        click.option("--config", "config_path", type=click.Path(), default=None,
                     help="key = value config file; flags override"),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _load_constraints(path, feature_names) -> list:
    doc = json.loads(Path(path).read_text())
    specs = []
    for item in doc:
        feat = item["feature"]
        if isinstance(feat, str):
            if feat not in feature_names:
                raise ConfigurationError(f"unknown feature in constraints file: {feat!r}")
            feat = feature_names.index(feat)
        lo, hi = item["range"]
        specs.append(ConstraintSpec(int(feat), item["kind"], float(lo), float(hi)))
    return specs


@click.group()
def cli():
    """Interpretable piecewise-linear additive models."""


@cli.command("train")
@click.argument("dataset_path", type=click.Path())
@click.option("--target", required=True, help="target column name")
@click.option("--weight-column", default=None)
@click.option("--id-column", default=None)
@click.option("--constraints", "constraints_path", type=click.Path(), default=None,
              help="JSON list of {feature, kind, range}")
@click.option("--output", "-o", required=True, type=click.Path(), help="model file to write")
@_config_options
def cmd_train(dataset_path, target, weight_column, id_column, constraints_path, output,
              config_path, **flags):
    """Train a model on a CSV dataset and write the model file."""
    try:
        cfg = _build_config(config_path, **flags)
        d = load_csv(dataset_path, target, weight_column, id_column)
        specs = _load_constraints(constraints_path, d.feature_names) if constraints_path else []
        model = train(d, cfg, specs)
        Path(output).write_bytes(save_model(model))
    except PlgamError as e:
        _fail(str(e))
    trace = model.training_meta["loss_trace"]
    for t, loss in enumerate(trace, start=1):
        click.echo(f"round {t}: loss {loss:.6g}")
    click.echo(f"model written to {output}")


@cli.command("eval")
@click.argument("dataset_path", type=click.Path())
@click.option("--target", required=True)
@click.option("--weight-column", default=None)
@click.option("--id-column", default=None)
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--report", "report_base", type=click.Path(), default=None,
              help="base path for the report files (.csv/.json/.png)")
@_config_options
def cmd_eval(dataset_path, target, weight_column, id_column, folds, report_base,
             config_path, **flags):
    """Cross-validate on a CSV dataset and write a metrics report."""
    try:
        if folds < 2:
            raise ValidationError("need at least 2 folds")
        cfg = _build_config(config_path, **flags)
        d = load_csv(dataset_path, target, weight_column, id_column)
        plan = kfold(d, folds, cfg.seed)
        fold_metrics, mean = cross_validate(d, cfg, plan)
        if report_base:
            report.write_eval_report(Path(report_base), Path(dataset_path).stem,
                                     cfg, cfg.seed, fold_metrics, mean)
    except PlgamError as e:
        _fail(str(e))
    click.echo(report.format_metrics_table(fold_metrics, mean))


@cli.command("predict")
@click.argument("model_path", type=click.Path())
@click.argument("dataset_path", type=click.Path())
@click.option("--output", "-o", required=True, type=click.Path(),
              help="CSV with columns row_id, prediction")
def cmd_predict(model_path, dataset_path, output):
    """Predict for every row of a CSV file, in input order."""
    try:
        model = load_model(Path(model_path).read_bytes())
        rows, ids, extra = _read_feature_rows(dataset_path, model.feature_names)
        if extra:
            click.echo(f"warning: ignoring unused columns: {', '.join(extra)}", err=True)
        preds = model.predict(rows)
        with open(output, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["row_id", "prediction"])
            for rid, p in zip(ids, preds):
                w.writerow([rid, repr(float(p))])
    except (PlgamError, OSError) as e:
        _fail(str(e))
    click.echo(f"{len(preds)} predictions written to {output}")


def _read_feature_rows(path, feature_names):
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as e:
        raise ConfigurationError(f"dataset not found: {path}") from e
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestionError(f"{path}: empty file")
        missing = [n for n in feature_names if n not in header]
        if missing:
            raise ConfigurationError(f"{path}: missing feature columns: {', '.join(missing)}")
        idx = [header.index(n) for n in feature_names]
        id_i = header.index("row_id") if "row_id" in header else None
        extra = [h for i, h in enumerate(header) if i not in idx and i != id_i]
        rows, ids = [], []
        for rno, rec in enumerate(reader, start=1):
            if not rec:
                continue
            try:
                rows.append([float(rec[i]) for i in idx])
            except (ValueError, IndexError):
                raise IngestionError(f"{path}: row {rno}: cannot parse feature cells")
            ids.append(rec[id_i] if id_i is not None else str(rno - 1))
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    return np.array(rows), ids, extra


@cli.command("export-shapes")
@click.argument("model_path", type=click.Path())
@click.option("--feature", default=None, help="export a single feature by name")
@click.option("--dataset", "dataset_path", type=click.Path(), default=None,
              help="CSV used for the density overlay")
@click.option("--target", default=None, help="target column of --dataset")
@click.option("--out-dir", "-o", required=True, type=click.Path())
def cmd_export_shapes(model_path, feature, dataset_path, target, out_dir):
    """Dump per-feature (anchor, value) tables and density plots."""
    try:
        model = load_model(Path(model_path).read_bytes())
        features = None
        if feature is not None:
            if feature not in model.feature_names:
                raise ConfigurationError(f"unknown feature {feature!r}")
            features = [model.feature_names.index(feature)]
        d = None
        if dataset_path:
            if not target:
                raise ConfigurationError("--dataset requires --target")
            d = load_csv(dataset_path, target)
        written = report.write_shape_report(Path(out_dir), model, d, features)
    except (PlgamError, OSError) as e:
        _fail(str(e))
    for item in written:
        click.echo(f"{item['feature']}: {item['csv']} {item['png']}")


@cli.command("gen-data")
@click.option("--days", type=int, default=120, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output", "-o", required=True, type=click.Path())
def cmd_gen_data(days, seed, output):
    """Generate the synthetic load dataset as CSV."""
    try:
        d = gen_synthetic_load(days, seed)
        with open(output, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["row_id", *d.feature_names, "load"])
            for i in range(d.n_rows):
                w.writerow([d.row_ids[i], *(repr(float(v)) for v in d.features[i]),
                            repr(float(d.target[i]))])
    except PlgamError as e:
        _fail(str(e))
    click.echo(f"{d.n_rows} rows written to {output}")


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True, envvar="PLGAM_HOST")
@click.option("--port", type=int, default=8000, show_default=True, envvar="PLGAM_PORT")
@click.option("--data-dir", type=click.Path(), default="plgam-data", show_default=True,
              envvar="PLGAM_DATA_DIR")
@click.option("--seed", type=int, default=0, show_default=True, envvar="PLGAM_SEED")
def cmd_serve(host, port, data_dir, seed):
    """Run the interactive editing HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(Path(data_dir), default_seed=seed), host=host, port=port)


if __name__ == "__main__":
    cli()
