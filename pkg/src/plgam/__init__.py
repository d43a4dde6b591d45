"""Boosted piecewise-linear additive models with interactive editing."""

from .constraints import (ConstraintSpec, project_concave, project_convex,
                          project_decreasing, project_increasing)
from .dataset import (Dataset, FoldPlan, NormStats, apply_normalization,
                      fit_normalization, kfold, load_csv, multiply_weights)
from .errors import (ConfigurationError, DegenerateFeatureError, IngestionError,
                     ModelFormatError, PlgamError, SolverError, ValidationError)
from .evaluation import (Metrics, cross_validate, gen_synthetic_load,
                         heat_wave_mask, mse, rnmse)
from .gam import (GamModel, ShapeFunction, TrainConfig, load_model, save_model,
                  train)
from .pla import (PiecewiseLinearFn, ThresholdGrid, build_threshold_grid,
                  evaluate_pla, fit_pla, solve_weights, weighted_correlations,
                  weighted_norms)

__version__ = "0.1.0"
