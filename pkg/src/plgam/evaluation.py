"""Metrics, cross-validation harness and the synthetic load generator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset, FoldPlan
from .errors import ValidationError
from .gam import TrainConfig, train

RECORDS_PER_DAY = 96
HEAT_WAVE_TAG = "+HW"


@dataclass(frozen=True)
class Metrics:
    mse: float
    rnmse: Optional[float] = None


def mse(y, y_hat) -> float:
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.size == 0:
        raise ValidationError("mse requires equal-length non-empty vectors")
    return float(np.mean((y - y_hat) ** 2))


def rnmse(y, y_hat) -> float:
    """sqrt of the mean squared relative error; targets must be nonzero."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.size == 0:
        raise ValidationError("rnmse requires equal-length non-empty vectors")
    zeros = np.flatnonzero(y == 0)
    if zeros.size:
        raise ValidationError(f"rnmse undefined: target is zero at row {int(zeros[0])}")
    return float(np.sqrt(np.mean(((y - y_hat) / y) ** 2)))


def cross_validate(d: Dataset, cfg: TrainConfig, plan: FoldPlan):
    """Train per fold (normalization fitted on the train rows only) and score
    the held-out rows.

    When the config standardizes the target, the reported MSE is in
    standardized target units (raw MSE divided by the train-fold target
    variance), matching the usual benchmark convention.  RNMSE is reported
    only when all held-out targets are nonzero.

    Returns (per-fold Metrics list, mean Metrics).
    """
    folds = []
    for fold in range(plan.k):
        d_train = d.subset(plan.train_rows(fold))
        d_test = d.subset(plan.test_rows(fold))
        model = train(d_train, cfg)
        pred = model.predict(d_test.features)
        err = mse(d_test.target, pred)
        if cfg.standardize_target:
            err /= model.norm.target_scale ** 2
        rel = None
        if (d_test.target != 0).all():
            rel = rnmse(d_test.target, pred)
        folds.append(Metrics(err, rel))
    mean = Metrics(float(np.mean([f.mse for f in folds])),
                   None if any(f.rnmse is None for f in folds)
                   else float(np.mean([f.rnmse for f in folds])))
    return folds, mean


def _temperature_response(t: np.ndarray, knee: float = 32.0) -> np.ndarray:
    """Load response to temperature: convex below the knee, concave above it."""
    below = np.minimum(t, knee)
    r = 0.8 * np.maximum(below - 18.0, 0.0) ** 2
    over = np.maximum(t - knee, 0.0)
    slope = 1.6 * (knee - 18.0)          # continue with matching slope at the knee
    r += slope * over - 0.5 * over ** 2  # curvature flips sign: concave regime
    return r


def gen_synthetic_load(days: int, seed: int) -> Dataset:
    """Deterministic quarter-hourly load series with a rare heat-wave regime.

    Features: time-of-day, day-of-week, skin temperature, previous-day
    temperature.  Target = strictly positive base load + daily/weekly
    seasonality + piecewise temperature response + seeded noise.  Rows on
    heat-wave days carry a "+HW" suffix in their row_ids.
    """
    if days < 7:
        raise ValidationError("need at least 7 days of synthetic data")
    rng = np.random.default_rng(seed)
    n = days * RECORDS_PER_DAY
    day = np.repeat(np.arange(days), RECORDS_PER_DAY)
    tod = np.tile(np.arange(RECORDS_PER_DAY) / 4.0, days)   # hours, 0..23.75
    dow = day % 7

    daily_mean = 24.0 + 4.0 * np.sin(2 * np.pi * np.arange(days) / 30.0)
    daily_mean += rng.normal(0.0, 1.5, size=days)
    # rare heat-wave days: ~3%, at least one, never in the first week
    n_hw = max(1, int(round(0.03 * days)))
    hw_days = rng.choice(np.arange(7, days), size=n_hw, replace=False)
    daily_mean[hw_days] += 14.0
    is_hw_day = np.zeros(days, dtype=bool)
    is_hw_day[hw_days] = True

    temp = daily_mean[day] + 5.0 * np.sin(2 * np.pi * (tod - 9.0) / 24.0)
    temp += rng.normal(0.0, 0.4, size=n)
    temp_lag = np.concatenate([temp[:RECORDS_PER_DAY], temp[:-RECORDS_PER_DAY]])

    target = (
        1000.0
        + 140.0 * np.sin(2 * np.pi * (tod - 9.0) / 24.0)
        + np.where(dow >= 5, -60.0, 20.0)
        + _temperature_response(temp)
        + 0.3 * _temperature_response(temp_lag)
        + rng.normal(0.0, 12.0, size=n)
    )

    features = np.column_stack([tod, dow.astype(float), temp, temp_lag])
    hw = is_hw_day[day]
    row_ids = tuple(f"d{d:04d}t{q:02d}" + (HEAT_WAVE_TAG if h else "")
                    for d, q, h in zip(day, np.tile(np.arange(RECORDS_PER_DAY), days), hw))
    return Dataset(features, target, np.ones(n),
                   ("time_of_day", "day_of_week", "skin_temperature", "skin_temperature_lag1d"),
                   row_ids)


def heat_wave_mask(d: Dataset) -> np.ndarray:
    """Boolean mask of rows flagged as heat-wave by the synthetic generator."""
    if d.row_ids is None:
        raise ValidationError("dataset has no row ids")
    return np.array([rid.endswith(HEAT_WAVE_TAG) for rid in d.row_ids])
