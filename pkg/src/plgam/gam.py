"""Additive model training via cyclic boosting of piecewise-linear increments.

Each feature's shape function is stored as values on an anchor grid (threshold
knots plus the training min/max) with linear interpolation inside the range
and linear extension of the edge segments outside it.  Constrained features
use a blended projected update; unconstrained features take the plain step.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np

from . import constraints as cons
from .dataset import Dataset, NormStats, apply_normalization, fit_normalization
from .errors import DegenerateFeatureError, ModelFormatError, ValidationError
from .pla import ThresholdGrid, build_threshold_grid, fit_pla

MODEL_FORMAT = "plgam-model"
MODEL_VERSION = 1


@dataclass
class TrainConfig:
    """Hyperparameters of one training run."""

    lam: float = 1.0            # ridge trade-off
    k_basis: int = 7            # max selections per piecewise-linear fit
    step: float = 0.1           # boosting step size
    rounds: int = 100           # boosting rounds
    alpha: float = 0.1          # blend coefficient for projected updates
    grid_size: int = 256        # candidate thresholds per feature
    pairwise: bool = True
    standardize_target: bool = False
    seed: int = 0
    warm_start: bool = False    # continue boosting on retrain instead of restarting

    def validate(self):
        if self.lam < 0:
            raise ValidationError("lambda must be >= 0")
        if self.k_basis < 1:
            raise ValidationError("k-basis must be >= 1")
        if self.step <= 0:
            raise ValidationError("step size must be > 0")
        if self.rounds < 1:
            raise ValidationError("rounds must be >= 1")
        if not 0 <= self.alpha < 1:
            raise ValidationError("alpha must be in [0, 1)")
        if self.grid_size < 1:
            raise ValidationError("grid size must be >= 1")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(doc: dict) -> "TrainConfig":
        cfg = TrainConfig(**{k: v for k, v in doc.items() if k in TrainConfig.__dataclass_fields__})
        return cfg.validate()


@dataclass
class ShapeFunction:
    """Per-feature additive component on an anchor grid (normalized units)."""

    feature: int
    anchors: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.anchors, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if a.ndim != 1 or a.shape != v.shape or a.size < 2:
            raise ValidationError("anchors/values must be matching 1-D arrays of size >= 2")
        if not (np.diff(a) > 0).all():
            raise ValidationError("anchors must be strictly increasing")
        self.anchors, self.values = a, v

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, v = self.anchors, self.values
        out = np.interp(x, a, v)
        left = x < a[0]
        if left.any():
            s0 = (v[1] - v[0]) / (a[1] - a[0])
            out = np.where(left, v[0] + s0 * (x - a[0]), out)
        right = x > a[-1]
        if right.any():
            s1 = (v[-1] - v[-2]) / (a[-1] - a[-2])
            out = np.where(right, v[-1] + s1 * (x - a[-1]), out)
        return out if out.shape else float(out)

    def edge_slopes(self) -> tuple[float, float]:
        a, v = self.anchors, self.values
        return (float((v[1] - v[0]) / (a[1] - a[0])),
                float((v[-1] - v[-2]) / (a[-1] - a[-2])))


@dataclass
class GamModel:
    """Trained additive model: shape functions + normalization + constraints."""

    shapes: list
    norm: NormStats
    config: TrainConfig
    constraints: list = field(default_factory=list)
    display_intercept: float = 0.0
    training_meta: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)   # feature -> ThresholdGrid

    @property
    def feature_names(self) -> tuple:
        return self.norm.feature_names

    def predict(self, rows) -> np.ndarray:
        """Predictions in raw target units for raw-unit feature rows."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[1] != len(self.shapes):
            raise ValidationError(
                f"expected {len(self.shapes)} features, got {rows.shape[1]}")
        z = self.norm.transform_features(rows)
        out = np.full(rows.shape[0], self.display_intercept)
        for shape in self.shapes:
            out += shape(z[:, shape.feature])
        return self.norm.inverse_target(out)

    def predict_normalized(self, z: np.ndarray) -> np.ndarray:
        """Model-unit predictions for already-normalized features."""
        out = np.full(z.shape[0], self.display_intercept)
        for shape in self.shapes:
            out += shape(z[:, shape.feature])
        return out

    def shape_values(self, d: int, in_raw_units: bool = True):
        """(anchors, values, edge_slopes) for one feature.

        Anchors are mapped back to raw feature units on request; values stay
        in model target units (normalized target units when target
        standardization is on).
        """
        shape = self.shapes[d]
        anchors = shape.anchors
        if in_raw_units:
            anchors = anchors * self.norm.feature_scales[d] + self.norm.feature_means[d]
        return anchors.copy(), shape.values.copy(), shape.edge_slopes()

    def center_display(self, d_normalized: Dataset):
        """Move each shape's weighted mean contribution into display_intercept.

        Presentation only: predictions are unchanged because predict() adds
        display_intercept back.
        """
        w = d_normalized.weights
        for shape in self.shapes:
            m = float(np.average(shape(d_normalized.column(shape.feature)), weights=w))
            shape.values = shape.values - m
            self.display_intercept += m

    def constraint_window(self, spec: cons.ConstraintSpec) -> np.ndarray:
        """Anchor indices covered by a spec, after raw->normalized conversion."""
        d = spec.feature
        lo = (spec.lo - self.norm.feature_means[d]) / self.norm.feature_scales[d]
        hi = (spec.hi - self.norm.feature_means[d]) / self.norm.feature_scales[d]
        return cons.window_indices(self.shapes[d].anchors, lo, hi)

    # -- persistence ---------------------------------------------------------

    def to_document(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "config": self.config.to_dict(),
            "norm": {
                "feature_means": self.norm.feature_means.tolist(),
                "feature_scales": self.norm.feature_scales.tolist(),
                "feature_names": list(self.norm.feature_names),
                "target_mean": self.norm.target_mean,
                "target_scale": self.norm.target_scale,
                "standardize_target": self.norm.standardize_target,
            },
            "shapes": [
                {"feature": s.feature, "anchors": s.anchors.tolist(),
                 "values": s.values.tolist()}
                for s in self.shapes
            ],
            "constraints": [c.to_dict() for c in self.constraints],
            "display_intercept": self.display_intercept,
            "training_meta": self.training_meta,
        }

    @staticmethod
    def from_document(doc: dict) -> "GamModel":
        if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
            raise ModelFormatError("not a recognized model document")
        if doc.get("version") != MODEL_VERSION:
            raise ModelFormatError(
                f"unsupported model version {doc.get('version')!r}; expected {MODEL_VERSION}")
        try:
            nd = doc["norm"]
            norm = NormStats(np.array(nd["feature_means"]), np.array(nd["feature_scales"]),
                             tuple(nd["feature_names"]), nd["target_mean"], nd["target_scale"],
                             nd["standardize_target"])
            shapes = [ShapeFunction(s["feature"], np.array(s["anchors"]), np.array(s["values"]))
                      for s in doc["shapes"]]
            specs = [cons.ConstraintSpec.from_dict(c) for c in doc["constraints"]]
            return GamModel(shapes, norm, TrainConfig.from_dict(doc["config"]), specs,
                            float(doc["display_intercept"]), dict(doc.get("training_meta", {})))
        except (KeyError, TypeError, IndexError) as e:
            raise ModelFormatError(f"corrupt model document: {e}") from e


def save_model(m: GamModel) -> bytes:
    return json.dumps(m.to_document(), sort_keys=True).encode("utf-8")


def load_model(payload: bytes) -> GamModel:
    try:
        doc = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"cannot decode model payload: {e}") from e
    return GamModel.from_document(doc)


# -- training ----------------------------------------------------------------

def _build_anchors(values: np.ndarray, grid: Optional[ThresholdGrid]) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if grid is None:
        # degenerate feature: flat placeholder, never updated
        return np.array([lo - 0.5, lo + 0.5]) if lo == hi else np.array([lo, hi])
    return np.unique(np.concatenate([[lo, hi], grid.thresholds]))


def init_model(d_normalized: Dataset, cfg: TrainConfig,
               specs: Sequence[cons.ConstraintSpec] = (), norm: Optional[NormStats] = None):
    """Zero-initialized model plus its training state (residuals = target)."""
    if norm is None:
        norm = NormStats(np.zeros(d_normalized.n_features), np.ones(d_normalized.n_features),
                         d_normalized.feature_names)
    shapes, grids, skipped = [], {}, []
    for d in range(d_normalized.n_features):
        col = d_normalized.column(d)
        try:
            grid = build_threshold_grid(col, cfg.grid_size)
            grids[d] = grid
        except DegenerateFeatureError:
            grid = None
            skipped.append(d_normalized.feature_names[d])
        anchors = _build_anchors(col, grid)
        shapes.append(ShapeFunction(d, anchors, np.zeros(anchors.size)))
    model = GamModel(shapes, norm, cfg, list(specs),
                     training_meta={"loss_trace": [], "skipped_features": skipped},
                     grids=grids)
    residuals = d_normalized.target.copy()
    return model, residuals


def compute_residuals(d_normalized: Dataset, m: GamModel) -> np.ndarray:
    """r_i = y_i - sum_d f_d(x_i^d), in model units."""
    if d_normalized.feature_names != m.feature_names:
        raise ValidationError("dataset schema does not match model")
    return d_normalized.target - m.predict_normalized(d_normalized.features)


def boost_feature(residuals: np.ndarray, d: int, m: GamModel, cfg: TrainConfig,
                  d_normalized: Dataset, specs: Sequence[cons.ConstraintSpec]):
    """One inner-loop update of feature d's shape; residuals updated in place."""
    grid = m.grids.get(d)
    if grid is None:
        return
    shape = m.shapes[d]
    x = d_normalized.column(d)
    g = fit_pla(x, residuals, d_normalized.weights, grid, cfg.lam, cfg.k_basis, cfg.pairwise)
    candidate = shape.values + cfg.step * g(shape.anchors)
    if specs:
        projected = candidate
        for spec in sorted(specs, key=lambda s: s.created_at):
            lo = (spec.lo - m.norm.feature_means[d]) / m.norm.feature_scales[d]
            hi = (spec.hi - m.norm.feature_means[d]) / m.norm.feature_scales[d]
            projected = cons.apply_to_anchors(projected, shape.anchors, spec.kind, lo, hi).values
        new_values = cfg.alpha * shape.values + (1.0 - cfg.alpha) * projected
    else:
        new_values = candidate
    old_contrib = shape(x)
    shape.values = new_values
    residuals += old_contrib - shape(x)


def train(d: Dataset, cfg: TrainConfig, specs: Sequence[cons.ConstraintSpec] = (),
          start: Optional[GamModel] = None) -> GamModel:
    """Cyclic boosting over features in column order, T rounds, deterministic.

    Normalization is fitted on the given rows, so per-fold training is
    leakage-free.  Pass a previous model as `start` to warm-start (the
    normalization and anchor grids are rebuilt from scratch regardless unless
    warm_start is set).
    """
    cfg.validate()
    for spec in specs:
        if not 0 <= spec.feature < d.n_features:
            raise ValidationError(f"constraint feature index {spec.feature} out of range")
    if start is not None and cfg.warm_start:
        model = start
        dn = apply_normalization(d, model.norm)
        residuals = compute_residuals(dn, model)
    else:
        norm = fit_normalization(d, cfg.standardize_target)
        dn = apply_normalization(d, norm)
        model, residuals = init_model(dn, cfg, specs, norm)
    model.constraints = list(specs)
    for spec in specs:
        if model.constraint_window(spec).size < 2:
            raise ValidationError(
                f"constraint {spec.id} range [{spec.lo}, {spec.hi}] covers fewer than "
                f"2 anchors of feature {d.feature_names[spec.feature]!r}")
    by_feature = {}
    for spec in specs:
        by_feature.setdefault(spec.feature, []).append(spec)

    loss_trace = model.training_meta.setdefault("loss_trace", [])
    n = dn.n_rows
    for _ in range(cfg.rounds):
        for feat in range(dn.n_features):
            boost_feature(residuals, feat, model, cfg, dn, by_feature.get(feat, ()))
        loss_trace.append(float((dn.weights * residuals * residuals).sum() / n))
    model.training_meta["trained_at"] = time.time()
    return model
