"""Shape constraints and envelope-average projections onto their feasible sets.

Four kinds are supported: monotone increase/decrease and convex/concave, each
restricted to a user-chosen range.  The monotone projection averages the
running-max majorant and the suffix-min minorant; curvature kinds apply the
same projection in slope space and reaccumulate.  All four are O(M), exact
fixed points on feasible input, and idempotent.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError

KINDS = ("increase", "decrease", "convex", "concave")

_ids = itertools.count(1)


def _new_id() -> str:
    return f"c{next(_ids)}"


@dataclass(frozen=True)
class ConstraintSpec:
    """User-declared shape constraint on one feature over a raw-unit range."""

    feature: int
    kind: str
    lo: float
    hi: float
    id: str = field(default_factory=_new_id)
    created_at: float = field(default_factory=time.time)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown constraint kind {self.kind!r}")
        if not self.lo < self.hi:
            raise ValidationError("constraint range must satisfy lo < hi")

    def to_dict(self) -> dict:
        return {"feature": self.feature, "kind": self.kind, "range": [self.lo, self.hi],
                "id": self.id, "created_at": self.created_at}

    @staticmethod
    def from_dict(doc: dict) -> "ConstraintSpec":
        return ConstraintSpec(int(doc["feature"]), doc["kind"],
                              float(doc["range"][0]), float(doc["range"][1]),
                              id=doc.get("id", _new_id()),
                              created_at=float(doc.get("created_at", 0.0)))


@dataclass(frozen=True)
class ProjectionResult:
    values: np.ndarray
    changed: bool
    max_displacement: float


def project_increasing(v) -> np.ndarray:
    """Average of the running-max upper envelope and the suffix-min lower envelope."""
    v = np.asarray(v, dtype=float)
    upper = np.maximum.accumulate(v)
    lower = np.minimum.accumulate(v[::-1])[::-1]
    return 0.5 * (upper + lower)


def project_decreasing(v) -> np.ndarray:
    """Reverse, project increasing, reverse back."""
    v = np.asarray(v, dtype=float)
    return project_increasing(v[::-1])[::-1]


def _check_anchors(v: np.ndarray, anchors) -> np.ndarray:
    a = np.asarray(anchors, dtype=float)
    if a.shape != v.shape:
        raise ValidationError("anchors must match values in length")
    if not (np.diff(a) > 0).all():
        raise ValidationError("anchor positions must be strictly increasing")
    return a


def project_convex(v, anchors) -> np.ndarray:
    """Force nondecreasing slopes: project slopes, reaccumulate from the left."""
    v = np.asarray(v, dtype=float)
    if v.size <= 2:
        return v.copy()
    a = _check_anchors(v, anchors)
    gaps = np.diff(a)
    slopes = np.diff(v) / gaps
    if (np.diff(slopes) >= 0).all():
        return v.copy()            # exact fixed point on feasible input
    s = project_increasing(slopes)
    out = np.empty_like(v)
    out[0] = v[0]
    out[1:] = v[0] + np.cumsum(s * gaps)
    return out


def project_concave(v, anchors) -> np.ndarray:
    """Force nonincreasing slopes; dual of project_convex."""
    v = np.asarray(v, dtype=float)
    if v.size <= 2:
        return v.copy()
    a = _check_anchors(v, anchors)
    gaps = np.diff(a)
    slopes = np.diff(v) / gaps
    if (np.diff(slopes) <= 0).all():
        return v.copy()
    s = project_decreasing(slopes)
    out = np.empty_like(v)
    out[0] = v[0]
    out[1:] = v[0] + np.cumsum(s * gaps)
    return out


def project(kind: str, v, anchors=None) -> np.ndarray:
    if kind == "increase":
        return project_increasing(v)
    if kind == "decrease":
        return project_decreasing(v)
    if kind == "convex":
        return project_convex(v, anchors)
    if kind == "concave":
        return project_concave(v, anchors)
    raise ValidationError(f"unknown constraint kind {kind!r}")


def is_feasible(kind: str, v, anchors=None, tol: float = 1e-12) -> bool:
    """Difference / slope inequalities for the given kind, within tol."""
    v = np.asarray(v, dtype=float)
    if v.size <= 1:
        return True
    if kind == "increase":
        return bool((np.diff(v) >= -tol).all())
    if kind == "decrease":
        return bool((np.diff(v) <= tol).all())
    a = np.asarray(anchors, dtype=float)
    slopes = np.diff(v) / np.diff(a)
    if kind == "convex":
        return bool((np.diff(slopes) >= -tol).all())
    if kind == "concave":
        return bool((np.diff(slopes) <= tol).all())
    raise ValidationError(f"unknown constraint kind {kind!r}")


def window_indices(anchors: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Indices of anchors inside [lo, hi]."""
    return np.flatnonzero((anchors >= lo) & (anchors <= hi))


def apply_to_anchors(values: np.ndarray, anchors: np.ndarray, kind: str,
                     lo: float, hi: float) -> ProjectionResult:
    """Project only the anchor values inside [lo, hi]; leave the rest untouched.

    lo/hi must already be in the same units as the anchors.  Continuity is
    automatic: values, not segments, are edited.
    """
    idx = window_indices(anchors, lo, hi)
    if idx.size < 2:
        raise ValidationError(
            f"constraint range [{lo}, {hi}] covers {idx.size} anchor(s); need at least 2")
    out = np.asarray(values, dtype=float).copy()
    sub = project(kind, out[idx], anchors[idx])
    disp = float(np.abs(sub - out[idx]).max()) if idx.size else 0.0
    changed = bool((sub != out[idx]).any())
    out[idx] = sub
    return ProjectionResult(out, changed, disp)
