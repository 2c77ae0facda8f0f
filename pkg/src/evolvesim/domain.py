"""Points, finite distributions, target halfspaces and bounded linear hypotheses.

Conventions
-----------
* Domain points live in the unit ball of R^n; they are plain float arrays.
  The constant coordinate x_0 = 1 is never stored, it is synthesized when a
  hypothesis is evaluated.
* A hypothesis is a clipped linear form  clip_p1(a_0 + sum_i a_i x_i)  with
  range [-1, 1].
* Targets are halfspaces sign(w.x - theta) stored jointly normalized so that
  ||w||_2 = 1 and |theta| <= 1.
* Distributions have finite support with exact probabilities; all
  expectations in the library are exact sums over the support.

All types are immutable after construction and safe to share across workers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    InputDomainError,
    MarginViolationError,
)

NORM_TOL = 1e-12


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InputDomainError(f"{name} must be a 1-d real vector")
    if not np.all(np.isfinite(arr)):
        raise InputDomainError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def clip_p1(a):
    """Clip a real (or array) to [-1, 1], preserving sign outside the range."""
    arr = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InputDomainError("clip_p1 requires finite input")
    out = np.clip(arr, -1.0, 1.0)
    return float(out) if np.isscalar(a) or arr.ndim == 0 else out


def validate_point(coords) -> np.ndarray:
    """Check membership in the unit ball and return the coordinate array."""
    arr = _as_vector(coords, "point")
    norm = float(np.linalg.norm(arr))
    if norm > 1.0 + NORM_TOL:
        raise InputDomainError(f"point has norm {norm!r} > 1")
    return arr


@dataclass(frozen=True)
class FiniteDistribution:
    """Explicit support (rows of ``points``) with exact probabilities."""

    points: np.ndarray  # shape (m, n), rows in the unit ball
    probs: np.ndarray  # shape (m,), non-negative, sums to 1

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        pr = np.asarray(self.probs, dtype=np.float64)
        if pts.ndim != 2:
            raise InputDomainError("support must be a 2-d array of points")
        if pr.ndim != 1 or pr.shape[0] != pts.shape[0]:
            raise DimensionMismatchError("probs length must match support size")
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(pr)):
            raise InputDomainError("distribution contains non-finite values")
        if np.any(pr < 0):
            raise InputDomainError("probabilities must be non-negative")
        if abs(float(pr.sum()) - 1.0) > NORM_TOL:
            raise InputDomainError("probabilities must sum to 1")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms > 1.0 + NORM_TOL):
            raise InputDomainError("support point outside the unit ball")
        if len({pts[i].tobytes() for i in range(pts.shape[0])}) != pts.shape[0]:
            raise InputDomainError("support points must be distinct")
        pts.setflags(write=False)
        pr.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "probs", pr)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def density_ratio(self, other: "FiniteDistribution") -> np.ndarray:
        """Pointwise self/other probability ratios over a shared support."""
        if self.points.shape != other.points.shape or not np.array_equal(
            self.points, other.points
        ):
            raise DimensionMismatchError("density ratios need identical supports")
        if np.any(other.probs == 0):
            raise InputDomainError("reference distribution has zero-mass points")
        return self.probs / other.probs


@dataclass(frozen=True)
class Halfspace:
    """Target concept sign(w.x - theta), stored with ||w|| = 1 and |theta| <= 1."""

    w: np.ndarray
    theta: float
    normalize: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        w = _as_vector(self.w, "w").copy()
        theta = float(self.theta)
        if not np.isfinite(theta):
            raise InputDomainError("theta must be finite")
        if self.normalize:
            scale = float(np.linalg.norm(w))
            if scale == 0.0:
                raise InputDomainError("w must be non-zero")
            w = w / scale
            theta = theta / scale
        if abs(theta) > 1.0 + NORM_TOL:
            raise InputDomainError(
                f"|theta| = {abs(theta)!r} > 1 after normalization; the halfspace "
                "is constant on the unit ball"
            )
        if float(np.dot(w, w)) + theta * theta > 2.0 + NORM_TOL:
            raise InputDomainError("halfspace violates ||w||^2 + theta^2 <= 2")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def raw_values(self, points: np.ndarray) -> np.ndarray:
        """w.x - theta for each row of ``points``."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[1] != self.n:
            raise DimensionMismatchError(
                f"points have dimension {points.shape[1]}, halfspace has {self.n}"
            )
        return points @ self.w - self.theta

    def values(self, points: np.ndarray) -> np.ndarray:
        """Sign labels in {-1, +1} on each row; exact zeros are rejected."""
        raw = self.raw_values(points)
        if np.any(raw == 0.0):
            raise MarginViolationError("halfspace is exactly zero on a point")
        return np.where(raw > 0, 1.0, -1.0)


@dataclass(frozen=True)
class BoundedLinearRep:
    """Evolving hypothesis clip_p1(a_0 + sum_i a_i x_i); coeffs[0] is a_0."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_vector(self.coeffs, "coeffs"))

    @property
    def n(self) -> int:
        return self.coeffs.shape[0] - 1

    def key(self) -> bytes:
        """Structural identity of the coefficient vector."""
        return self.coeffs.tobytes()

    def values(self, points: np.ndarray) -> np.ndarray:
        """Clipped evaluation on each row of ``points``."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[1] != self.n:
            raise DimensionMismatchError(
                f"points have dimension {points.shape[1]}, rep has {self.n}"
            )
        return np.clip(self.coeffs[0] + points @ self.coeffs[1:], -1.0, 1.0)


def zero_rep(n: int) -> BoundedLinearRep:
    return BoundedLinearRep(np.zeros(n + 1))


def eval_rep(rep: BoundedLinearRep, x) -> float:
    """clip_p1(a_0 + sum_i a_i x_i) at a single point."""
    x = _as_vector(x, "x")
    if x.shape[0] != rep.n:
        raise DimensionMismatchError(f"point dim {x.shape[0]} != rep dim {rep.n}")
    return float(np.clip(rep.coeffs[0] + float(x @ rep.coeffs[1:]), -1.0, 1.0))


def eval_halfspace(f: Halfspace, x) -> float:
    """Sign label of the halfspace at a single point (never 0)."""
    return float(f.values(np.asarray(x, dtype=np.float64)[None, :])[0])


def margin(f: Halfspace, D: FiniteDistribution) -> float:
    """min over the support of |w.x - theta|; must be strictly positive."""
    raw = np.abs(f.raw_values(D.points))
    gamma = float(raw.min())
    if gamma == 0.0:
        raise MarginViolationError(
            "zero margin on a support point; (f, D) has no positive margin"
        )
    return gamma


def scaled_cube_points(patterns: np.ndarray, n: int) -> np.ndarray:
    """Map {0,1}-patterns to {-1/sqrt(n), +1/sqrt(n)}^n (bit 1 -> +1/sqrt(n))."""
    patterns = np.atleast_2d(np.asarray(patterns))
    if patterns.shape[1] != n:
        raise DimensionMismatchError("pattern width must equal n")
    if not np.all((patterns == 0) | (patterns == 1)):
        raise InputDomainError("patterns must be 0/1 valued")
    return (2.0 * patterns - 1.0) / np.sqrt(n)


def all_bit_patterns(n: int) -> np.ndarray:
    """All 2^n {0,1}-patterns in lexicographic order (bit 0 = leftmost column)."""
    idx = np.arange(2**n, dtype=np.int64)
    return (idx[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1


def scaled_hypercube(n: int) -> np.ndarray:
    """All 2^n scaled-hypercube points, one per Boolean pattern."""
    if n < 1:
        raise InputDomainError("n must be >= 1")
    return scaled_cube_points(all_bit_patterns(n), n)


def scaled_hypercube_uniform(n: int) -> FiniteDistribution:
    """Uniform distribution over the full scaled Boolean hypercube."""
    pts = scaled_hypercube(n)
    return FiniteDistribution(pts, np.full(pts.shape[0], 1.0 / pts.shape[0]))


def majority_halfspace(n: int) -> Halfspace:
    """Majority vote of all n coordinates (n odd recommended)."""
    return Halfspace(np.ones(n), 0.0)


def conjunction_halfspace(n: int, k: int) -> Halfspace:
    """AND of the first k bits over the scaled hypercube (bit 1 = true)."""
    if not 1 <= k <= n:
        raise InputDomainError("need 1 <= k <= n")
    w = np.zeros(n)
    w[:k] = 1.0
    # true exactly when all k scaled coordinates equal +1/sqrt(n)
    theta = (k - 1) / np.sqrt(n)
    return Halfspace(w, theta)


# ---------------------------------------------------------------------------
# JSON serialization (exact: floats round-trip bit-identically)
# ---------------------------------------------------------------------------

def distribution_to_json(D: FiniteDistribution) -> str:
    doc = {
        "n": D.n,
        "support": [[float(v) for v in row] for row in D.points],
        "probs": [float(p) for p in D.probs],
    }
    return json.dumps(doc, indent=2)


def distribution_from_json(text: str) -> FiniteDistribution:
    doc = json.loads(text)
    pts = np.asarray(doc["support"], dtype=np.float64).reshape(-1, int(doc["n"]))
    return FiniteDistribution(pts, np.asarray(doc["probs"], dtype=np.float64))


def halfspace_to_json(f: Halfspace) -> str:
    return json.dumps({"w": [float(v) for v in f.w], "theta": float(f.theta)}, indent=2)


def halfspace_from_json(text: str) -> Halfspace:
    doc = json.loads(text)
    return Halfspace(np.asarray(doc["w"], dtype=np.float64), float(doc["theta"]))


def rep_to_json(rep: BoundedLinearRep) -> str:
    return json.dumps({"coeffs": [float(v) for v in rep.coeffs]}, indent=2)


def rep_from_json(text: str) -> BoundedLinearRep:
    return BoundedLinearRep(np.asarray(json.loads(text)["coeffs"], dtype=np.float64))
