"""Tabular dataset ingestion, normalization, sample weights and fold splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, IngestionError, ValidationError


@dataclass(frozen=True)
class Dataset:
    """Immutable feature table with target and strictly positive sample weights."""

    features: np.ndarray          # (N, D) float64, raw or normalized units
    target: np.ndarray            # (N,)
    weights: np.ndarray           # (N,), all > 0
    feature_names: tuple[str, ...]
    row_ids: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        f = np.asarray(self.features, dtype=float)
        y = np.asarray(self.target, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if f.ndim != 2:
            raise ValidationError("features must be a 2-D matrix")
        n = f.shape[0]
        if y.shape != (n,) or w.shape != (n,):
            raise ValidationError("features, target and weights must share length N")
        if len(self.feature_names) != f.shape[1]:
            raise ValidationError("feature_names must match feature count")
        if self.row_ids is not None and len(self.row_ids) != n:
            raise ValidationError("row_ids must have length N")
        if not (np.isfinite(f).all() and np.isfinite(y).all() and np.isfinite(w).all()):
            raise ValidationError("dataset contains non-finite values")
        if not (w > 0).all():
            raise ValidationError("all sample weights must be strictly positive")
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "target", y)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def column(self, d: int) -> np.ndarray:
        return self.features[:, d]

    def subset(self, rows: np.ndarray) -> "Dataset":
        """Row subset (copy); used by the cross-validation harness."""
        ids = None if self.row_ids is None else tuple(self.row_ids[i] for i in np.atleast_1d(rows))
        return Dataset(self.features[rows], self.target[rows], self.weights[rows],
                       self.feature_names, ids)


@dataclass(frozen=True)
class NormStats:
    """Per-feature z-score statistics, plus optional target standardization."""

    feature_means: np.ndarray
    feature_scales: np.ndarray    # population std; constant columns get 1
    feature_names: tuple[str, ...]
    target_mean: float = 0.0
    target_scale: float = 1.0
    standardize_target: bool = False

    def transform_features(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.feature_means) / self.feature_scales

    def inverse_features(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float) * self.feature_scales + self.feature_means

    def transform_target(self, y: np.ndarray) -> np.ndarray:
        if not self.standardize_target:
            return np.asarray(y, dtype=float)
        return (np.asarray(y, dtype=float) - self.target_mean) / self.target_scale

    def inverse_target(self, z: np.ndarray) -> np.ndarray:
        if not self.standardize_target:
            return np.asarray(z, dtype=float)
        return np.asarray(z, dtype=float) * self.target_scale + self.target_mean


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of every row to one of k folds."""

    k: int
    assignments: np.ndarray   # (N,) ints in [0, k)

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=int)
        if self.k < 1:
            raise ValidationError("k must be positive")
        counts = np.bincount(a, minlength=self.k)
        if len(counts) != self.k or (counts == 0).any():
            raise ValidationError("every fold must be non-empty")
        object.__setattr__(self, "assignments", a)

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def load_csv(path, target_column: str, weight_column: Optional[str] = None,
             id_column: Optional[str] = None) -> Dataset:
    """Read a UTF-8 comma-separated file with a header row into a Dataset.

    Every column other than the target, weight and id columns becomes a feature.
    Missing weight column means unit weights.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as e:
        raise ConfigurationError(f"dataset not found: {path}") from e
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file")
        header = [h.strip() for h in header]
        for name in (target_column, weight_column, id_column):
            if name is not None and name not in header:
                raise ConfigurationError(f"column not found: {name!r}")
        tgt_i = header.index(target_column)
        wgt_i = header.index(weight_column) if weight_column else None
        id_i = header.index(id_column) if id_column else None
        feat_is = [i for i in range(len(header)) if i not in (tgt_i, wgt_i, id_i)]

        rows, targets, weights, ids = [], [], [], []
        for rno, rec in enumerate(reader, start=1):
            if not rec:
                continue
            if len(rec) != len(header):
                raise IngestionError(f"{path}: row {rno} has {len(rec)} cells, expected {len(header)}")

            def cell(i):
                try:
                    v = float(rec[i])
                except ValueError:
                    raise IngestionError(
                        f"{path}: row {rno}, column {header[i]!r}: cannot parse {rec[i]!r}")
                if not math.isfinite(v):
                    raise IngestionError(f"{path}: row {rno}, column {header[i]!r}: non-finite value")
                return v

            rows.append([cell(i) for i in feat_is])
            targets.append(cell(tgt_i))
            weights.append(cell(wgt_i) if wgt_i is not None else 1.0)
            ids.append(rec[id_i] if id_i is not None else str(rno - 1))

    if not rows:
        raise IngestionError(f"{path}: no data rows")
    w = np.array(weights)
    if (w <= 0).any():
        bad = int(np.flatnonzero(w <= 0)[0])
        raise ValidationError(f"{path}: non-positive weight at row {bad + 1}")
    return Dataset(np.array(rows), np.array(targets), w,
                   tuple(header[i] for i in feat_is), tuple(ids))


def fit_normalization(d: Dataset, standardize_target: bool = False) -> NormStats:
    """Z-score statistics from the given rows (training split only).

    Scales are population standard deviations; constant columns get scale 1.
    """
    if d.n_rows < 2:
        raise ValidationError("need at least 2 rows to fit normalization")
    means = d.features.mean(axis=0)
    scales = d.features.std(axis=0)
    scales = np.where(scales == 0.0, 1.0, scales)
    t_mean, t_scale = 0.0, 1.0
    if standardize_target:
        t_mean = float(d.target.mean())
        t_scale = float(d.target.std())
        if t_scale == 0.0:
            t_scale = 1.0
    return NormStats(means, scales, d.feature_names, t_mean, t_scale, standardize_target)


def apply_normalization(d: Dataset, s: NormStats) -> Dataset:
    """Replace features (and optionally target) with their z-scores."""
    if s.feature_names != d.feature_names:
        raise ValidationError("normalization stats were fitted on a different schema")
    return replace(d, features=s.transform_features(d.features),
                   target=s.transform_target(d.target))


def multiply_weights(d: Dataset, rows: Sequence[int], factor: float) -> Dataset:
    """Scale the weights of the given rows by a positive factor."""
    if factor <= 0:
        raise ValidationError("weight factor must be > 0")
    idx = np.asarray(list(rows), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= d.n_rows):
        raise ValidationError("row index out of range")
    w = d.weights.copy()
    w[idx] *= factor
    return replace(d, weights=w)


def kfold(d: Dataset, k: int, seed: int) -> FoldPlan:
    """Deterministic shuffled k-fold split with sizes differing by at most 1."""
    if k < 1 or k > d.n_rows:
        raise ValidationError(f"k must be in [1, N]; got k={k}, N={d.n_rows}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(d.n_rows)
    assignments = np.empty(d.n_rows, dtype=int)
    assignments[perm] = np.arange(d.n_rows) % k
    return FoldPlan(k, assignments)
