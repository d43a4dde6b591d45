"""Piecewise-linear fitting of weighted (x, residual) pairs.

Greedy sparse selection over an implicit design matrix [1, hinge columns,
reverse-hinge columns] with ridge-regularized joint refits.  Selection
statistics are computed in O(N + L) per step from prefix/suffix sums over the
sorted sample, instead of materializing the N x (2L+1) design matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DegenerateFeatureError, SolverError, ValidationError


@dataclass(frozen=True)
class ThresholdGrid:
    """Strictly increasing candidate knot locations for the hinge basis."""

    thresholds: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValidationError("threshold grid must be a non-empty 1-D array")
        if not (np.diff(t) > 0).all():
            raise ValidationError("thresholds must be strictly increasing")
        object.__setattr__(self, "thresholds", t)

    @property
    def size(self) -> int:
        return self.thresholds.size


def build_threshold_grid(values, L: int) -> ThresholdGrid:
    """Quantile-based knot grid: ranks l/(L+1), interpolated between order
    statistics, deduplicated, restricted to the open interval (min, max)."""
    v = np.asarray(values, dtype=float)
    if L < 1:
        raise ValidationError("L must be positive")
    if v.size < 2 or np.unique(v).size < 2:
        raise DegenerateFeatureError("need at least 2 distinct values for a threshold grid")
    ranks = np.arange(1, L + 1) / (L + 1)
    t = np.quantile(v, ranks)
    lo, hi = v.min(), v.max()
    t = np.unique(t[(t > lo) & (t < hi)])
    if t.size == 0:
        raise DegenerateFeatureError("all candidate thresholds collapse onto the data range edges")
    return ThresholdGrid(t)


@dataclass
class PiecewiseLinearFn:
    """One boosting increment: intercept plus weighted hinge / reverse-hinge terms.

    g(x) = intercept + sum phi * max(x - eta, 0) + sum phi_r * max(eta - x, 0)
    """

    intercept: float = 0.0
    hinge_terms: list = field(default_factory=list)    # [(eta, phi), ...]
    rhinge_terms: list = field(default_factory=list)   # [(eta, phi_r), ...]
    objective_trace: Optional[list] = None             # per-selection-round objective

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.intercept, dtype=float)
        for eta, phi in self.hinge_terms:
            out += phi * np.maximum(x - eta, 0.0)
        for eta, phi in self.rhinge_terms:
            out += phi * np.maximum(eta - x, 0.0)
        return out if out.shape else float(out)


def evaluate_pla(g: PiecewiseLinearFn, x):
    """Evaluate the hinge expansion at x (scalar or array)."""
    return g(x)


def _is_sorted(x: np.ndarray) -> bool:
    return bool((np.diff(x) >= 0).all())


def _suffix_sums(a: np.ndarray) -> np.ndarray:
    """s[i] = sum(a[i:]); s[N] = 0."""
    out = np.zeros(a.size + 1)
    np.cumsum(a[::-1], out=out[-2::-1])
    return out


def _prefix_sums(a: np.ndarray) -> np.ndarray:
    """p[i] = sum(a[:i]); p[0] = 0."""
    out = np.zeros(a.size + 1)
    np.cumsum(a, out=out[1:])
    return out


class PrefixStats:
    """Shared accumulations over a sorted sample for one threshold grid.

    Norms depend only on (x, w) and are computed once; correlations against a
    residual vector are recomputed per selection step in O(N + L).
    """

    def __init__(self, x_sorted: np.ndarray, w: np.ndarray, grid: ThresholdGrid):
        assert _is_sorted(x_sorted), "PrefixStats requires x sorted ascending"
        self.x = x_sorted
        self.w = w
        self.grid = grid
        t = grid.thresholds
        # breakpoints: first index i with x[i] >= eta, i.e. x[i-1] < eta <= x[i]
        self.bp = np.searchsorted(x_sorted, t, side="left")
        sw = _suffix_sums(w)
        swx = _suffix_sums(w * x_sorted)
        swx2 = _suffix_sums(w * x_sorted * x_sorted)
        pw = _prefix_sums(w)
        pwx = _prefix_sums(w * x_sorted)
        pwx2 = _prefix_sums(w * x_sorted * x_sorted)
        self.hinge_norms = swx2[self.bp] - 2.0 * t * swx[self.bp] + t * t * sw[self.bp]
        self.rhinge_norms = t * t * pw[self.bp] - 2.0 * t * pwx[self.bp] + pwx2[self.bp]
        # tiny negatives from cancellation
        np.maximum(self.hinge_norms, 0.0, out=self.hinge_norms)
        np.maximum(self.rhinge_norms, 0.0, out=self.rhinge_norms)

    def correlations(self, b: np.ndarray):
        """(b^T W a) for every hinge and reverse-hinge column, O(N + L)."""
        t = self.grid.thresholds
        swb = _suffix_sums(self.w * b)
        swbx = _suffix_sums(self.w * b * self.x)
        hinge = swbx[self.bp] - t * swb[self.bp]
        pwb = _prefix_sums(self.w * b)
        pwbx = _prefix_sums(self.w * b * self.x)
        rhinge = t * pwb[self.bp] - pwbx[self.bp]
        return hinge, rhinge

    def column(self, j: int) -> np.ndarray:
        """Materialize design column j: j < L hinge, j >= L reverse hinge."""
        L = self.grid.size
        if j < L:
            return np.maximum(self.x - self.grid.thresholds[j], 0.0)
        return np.maximum(self.grid.thresholds[j - L] - self.x, 0.0)


def weighted_norms(x_sorted, w, grid: ThresholdGrid):
    """(a^T W a) for every hinge and reverse-hinge column on a sorted sample."""
    s = PrefixStats(np.asarray(x_sorted, float), np.asarray(w, float), grid)
    return s.hinge_norms, s.rhinge_norms


def weighted_correlations(x_sorted, b, w, grid: ThresholdGrid):
    """(b^T W a) for every hinge and reverse-hinge column on a sorted sample."""
    s = PrefixStats(np.asarray(x_sorted, float), np.asarray(w, float), grid)
    return s.correlations(np.asarray(b, float))


def solve_weights(A, r, w, lam: float, n: int, penalize=None):
    """Solve the ridge normal equations (A^T W A + lam*n*P) q = A^T W r.

    P is the identity by default; a boolean mask exempts columns (the trainer
    exempts the intercept) from the penalty.  Solved as a dense symmetric
    positive-definite system; a singular system at lam=0 raises SolverError.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    w = np.asarray(w, dtype=float)
    gram = A.T @ (A * w[:, None])
    if penalize is None:
        diag = np.full(A.shape[1], lam * n)
    else:
        diag = np.where(np.asarray(penalize, bool), lam * n, 0.0)
    gram[np.diag_indices_from(gram)] += diag
    rhs = A.T @ (w * np.asarray(r, dtype=float))
    try:
        c = scipy.linalg.cho_factor(gram, check_finite=False)
        return scipy.linalg.cho_solve(c, rhs, check_finite=False)
    except scipy.linalg.LinAlgError as e:
        raise SolverError("singular normal equations; use lambda > 0") from e


def selection_scores(norms, corrs, lam: float, n: int):
    """Per-column objective-reduction score (b^T W a)^2 / (a^T W a + lam*N)."""
    denom = norms + lam * n
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 0, corrs * corrs / denom, 0.0)
    return s


def select_basis(b, stats: PrefixStats, selected, lam: float, pairwise: bool):
    """Pick the next column (or threshold pair) with the best score.

    Returns a column index j in [0, 2L) in single mode, or a threshold index
    j in [0, L) in pairwise mode.  Returns None when every candidate score is
    zero (no-op round).  Ties break toward the lowest index.
    """
    n = stats.x.size
    ch, cr = stats.correlations(b)
    sh = selection_scores(stats.hinge_norms, ch, lam, n)
    sr = selection_scores(stats.rhinge_norms, cr, lam, n)
    L = stats.grid.size
    if pairwise:
        score = sh + sr
        mask = np.zeros(L, dtype=bool)
        mask[list(selected)] = True
        score = np.where(mask, -np.inf, score)
        j = int(np.argmax(score))
        return None if score[j] <= 0.0 else j
    score = np.concatenate([sh, sr])
    mask = np.zeros(2 * L, dtype=bool)
    mask[list(selected)] = True
    score = np.where(mask, -np.inf, score)
    j = int(np.argmax(score))
    return None if score[j] <= 0.0 else j


def fit_pla(x, r, w, grid: ThresholdGrid, lam: float, K: int,
            pairwise: bool = True) -> PiecewiseLinearFn:
    """Fit one piecewise-linear increment by greedy selection with joint refits.

    The constant column is pre-seeded and exempt from the ridge penalty; K
    counts selection rounds (thresholds in pairwise mode, single columns
    otherwise).  The recorded objective
    (1/N) ||W^0.5 (r - A q)||^2 + lam ||q_hinge||^2 is non-increasing.
    """
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    w = np.asarray(w, dtype=float)
    if not (x.shape == r.shape == w.shape):
        raise ValidationError("x, r, w must have equal lengths")
    if lam < 0 or K < 1:
        raise ValidationError("need lambda >= 0 and K >= 1")
    n = x.size
    order = np.argsort(x, kind="stable")
    xs, rs, ws = x[order], r[order], w[order]
    stats = PrefixStats(xs, ws, grid)
    L = grid.size

    A = np.ones((n, 1))
    penalize = [False]           # intercept is not penalized
    col_ids: list[int] = []      # design-column ids of the hinge columns in A
    selected: set[int] = set()   # threshold ids (pairwise) or column ids

    def refit():
        q = solve_weights(A, rs, ws, lam, n, penalize)
        b = rs - A @ q
        obj = float((ws * b * b).sum() / n + lam * (q[1:] ** 2).sum())
        return q, b, obj

    q, b, obj = refit()
    trace = [obj]
    for _ in range(K):
        j = select_basis(b, stats, selected, lam, pairwise)
        if j is None:
            break
        selected.add(j)
        new_cols = [j, j + L] if pairwise else [j]
        A_new = np.column_stack([A] + [stats.column(c) for c in new_cols])
        try:
            A, penalize = A_new, penalize + [True] * len(new_cols)
            col_ids += new_cols
            q, b, obj = refit()
        except SolverError:
            # collinear candidate at lambda=0: drop it and stop selecting
            A = A[:, : A.shape[1] - len(new_cols)]
            penalize = penalize[: len(penalize) - len(new_cols)]
            col_ids = col_ids[: len(col_ids) - len(new_cols)]
            break
        trace.append(obj)

    fn = PiecewiseLinearFn(intercept=float(q[0]), objective_trace=trace)
    for c, phi in zip(col_ids, q[1:]):
        if c < L:
            fn.hinge_terms.append((float(grid.thresholds[c]), float(phi)))
        else:
            fn.rhinge_terms.append((float(grid.thresholds[c - L]), float(phi)))
    return fn
