"""Report rendering: delimited metric tables plus matplotlib figures."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dataset import Dataset  # noqa: E402
from .evaluation import Metrics  # noqa: E402
from .gam import GamModel, TrainConfig  # noqa: E402

_PNG_META = {"Software": None}  # byte-identical figures across runs


def config_hash(cfg: TrainConfig) -> str:
    payload = json.dumps(cfg.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def write_eval_report(base: Path, dataset_name: str, cfg: TrainConfig, seed: int,
                      folds: Sequence[Metrics], mean: Metrics) -> dict:
    """Write {base}.csv, {base}.json and {base}.png; returns written paths."""
    base = Path(base)
    base.parent.mkdir(parents=True, exist_ok=True)

    csv_path = base.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["fold", "mse", "rnmse"])
        for i, m in enumerate(folds):
            w.writerow([i, _fmt(m.mse), _fmt(m.rnmse)])
        w.writerow(["mean", _fmt(mean.mse), _fmt(mean.rnmse)])

    json_path = base.with_suffix(".json")
    doc = {
        "dataset": dataset_name,
        "config_hash": config_hash(cfg),
        "config": cfg.to_dict(),
        "seed": seed,
        "folds": [{"mse": m.mse, "rnmse": m.rnmse} for m in folds],
        "mean": {"mse": mean.mse, "rnmse": mean.rnmse},
    }
    json_path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")

    png_path = base.with_suffix(".png")
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(range(len(folds)), [m.mse for m in folds], color="#4878cf")
    ax.axhline(mean.mse, color="#d65f5f", linestyle="--", label=f"mean {mean.mse:.4g}")
    ax.set_xlabel("fold")
    ax.set_ylabel("MSE")
    ax.set_title(dataset_name)
    ax.legend()
    fig.tight_layout()
    fig.savefig(png_path, metadata=_PNG_META)
    plt.close(fig)
    return {"csv": csv_path, "json": json_path, "png": png_path}


def format_metrics_table(folds: Sequence[Metrics], mean: Metrics) -> str:
    lines = [f"{'fold':>6} {'mse':>14} {'rnmse':>14}"]
    for i, m in enumerate(folds):
        r = f"{m.rnmse:.6f}" if m.rnmse is not None else "-"
        lines.append(f"{i:>6} {m.mse:>14.6f} {r:>14}")
    r = f"{mean.rnmse:.6f}" if mean.rnmse is not None else "-"
    lines.append(f"{'mean':>6} {mean.mse:>14.6f} {r:>14}")
    return "\n".join(lines)


def density_profile(raw_values: np.ndarray, raw_anchors: np.ndarray,
                    weights: Optional[np.ndarray] = None):
    """Histogram over anchor-aligned bins; masses sum to 1.

    Bin edges are the anchor midpoints extended to the data range, so the
    density overlays the shape polyline without resampling.
    """
    a = np.asarray(raw_anchors, dtype=float)
    mids = 0.5 * (a[:-1] + a[1:])
    lo = min(float(np.min(raw_values)), a[0]) - 1e-12
    hi = max(float(np.max(raw_values)), a[-1]) + 1e-12
    edges = np.concatenate([[lo], mids, [hi]])
    counts, _ = np.histogram(raw_values, bins=edges, weights=weights)
    total = counts.sum()
    mass = counts / total if total > 0 else counts.astype(float)
    return counts, mass


def write_shape_report(out_dir: Path, model: GamModel, dataset: Optional[Dataset] = None,
                       features: Optional[Sequence[int]] = None) -> list:
    """Per-feature (anchor, value) CSV tables in raw units plus density plots."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for d in features if features is not None else range(len(model.shapes)):
        name = model.feature_names[d]
        anchors, values, slopes = model.shape_values(d, in_raw_units=True)
        counts = mass = None
        if dataset is not None:
            counts, mass = density_profile(dataset.column(d), anchors, dataset.weights)

        csv_path = out_dir / f"shape_{name}.csv"
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["anchor", "value"])
            for a, v in zip(anchors, values):
                w.writerow([repr(float(a)), repr(float(v))])

        png_path = out_dir / f"shape_{name}.png"
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot(anchors, values, color="#4878cf", marker=".", label="shape")
        ax.set_xlabel(name)
        ax.set_ylabel("contribution")
        if mass is not None:
            ax2 = ax.twinx()
            ax2.fill_between(anchors, mass, step="mid", alpha=0.25, color="#6acc65")
            ax2.set_ylabel("prob")
        ax.set_title(name)
        fig.tight_layout()
        fig.savefig(png_path, metadata=_PNG_META)
        plt.close(fig)
        written.append({"feature": name, "csv": csv_path, "png": png_path})
    return written
