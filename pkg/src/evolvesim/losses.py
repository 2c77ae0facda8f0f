"""Loss functions, numerical well-behavedness certification, and performance.

A loss maps (label in {-1,1}, prediction in [-1,1]) to a non-negative real.
Well-behaved losses additionally satisfy, for labels l in {-1, 1}:

  1. L(-1,-1) = L(1,1) = 0
  2. L(1,-1) = L(-1,1) = 2
  3. twice differentiable in the prediction on [-1, 1]
  4. L'(l, l) = 0 and  -l * L'(l, l(1-z)) >= A * L(l, l(1-z))^a  on z in [0, 2]
  5. L''(l, z) <= B on [-1, 1]

for positive bounds (a, A, B). Performance of a hypothesis phi against a
Boolean target f is

    lperf = 1 - 2 * E[L(f(x), phi(x))] / L(-1, 1)

which lies in [-1, 1] and equals 1 exactly when the loss vanishes on the
support. Derivatives are always taken in the prediction argument.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domain import BoundedLinearRep, FiniteDistribution, Halfspace
from .exceptions import CertificationError, DimensionMismatchError, InputDomainError

__all__ = [
    "Loss",
    "Certificate",
    "Violation",
    "power_loss",
    "unscaled_quadratic",
    "linear_loss",
    "convex_combination",
    "verify_well_behaved",
    "lperf_true",
    "lperf_empirical",
    "target_values",
    "rep_values",
]

# exponent grid searched for condition (4); any feasible exponent certifies
A_EXPONENT_GRID = np.arange(1, 9) / 8.0


@dataclass(frozen=True)
class Loss:
    """A loss with vectorized evaluation, derivatives, and optional bounds.

    ``bounds`` is the certified (a, A, B) triple for well-behaved losses and
    ``None`` for losses that are not (or not yet) certified. ``scale`` is
    L(-1, 1), the normalizer used by lperf.
    """

    name: str
    eval: Callable[[np.ndarray, np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray, np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray, np.ndarray], np.ndarray]
    scale: float
    bounds: tuple[float, float, float] | None = None
    params: tuple = ()

    def __call__(self, y, z):
        return self.eval(np.asarray(y, dtype=float), np.asarray(z, dtype=float))


@dataclass(frozen=True)
class Certificate:
    a: float
    A: float
    B: float
    grid_step: float

    def as_dict(self) -> dict:
        return {
            "certified": True,
            "a": self.a,
            "A": self.A,
            "B": self.B,
            "grid_step": self.grid_step,
        }


@dataclass(frozen=True)
class Violation:
    condition: int
    witness_z: float
    detail: str

    def as_dict(self) -> dict:
        return {
            "certified": False,
            "condition": self.condition,
            "witness_z": self.witness_z,
            "detail": self.detail,
        }


def power_loss(c: float) -> Loss:
    """|y - z|^c / 2^(c-1) with analytically derived bounds.

    a = (c-1)/c, A = c * 2^(-(c-1)/c), B = c(c-1)/2. Rejected for c < 2
    because the second derivative is unbounded near y = z.
    """
    c = float(c)
    if not np.isfinite(c) or c < 2.0:
        raise InputDomainError("power loss requires c >= 2")
    denom = 2.0 ** (c - 1.0)

    def _eval(y, z):
        return np.abs(y - z) ** c / denom

    def _d1(y, z):
        d = np.asarray(z - y, dtype=float)
        return c * np.abs(d) ** (c - 1.0) * np.sign(d) / denom

    def _d2(y, z):
        return c * (c - 1.0) * np.abs(y - z) ** (c - 2.0) / denom

    bounds = ((c - 1.0) / c, c * 2.0 ** (-(c - 1.0) / c), c * (c - 1.0) / 2.0)
    return Loss(
        name=f"power({c:g})",
        eval=_eval,
        d1=_d1,
        d2=_d2,
        scale=2.0,
        bounds=bounds,
        params=("power", c),
    )


def unscaled_quadratic() -> Loss:
    """(z - y)^2; L(-1,1) = 4, so lperf matches power_loss(2) exactly."""

    return Loss(
        name="quadratic_unscaled",
        eval=lambda y, z: (z - y) ** 2,
        d1=lambda y, z: 2.0 * (np.asarray(z, dtype=float) - y),
        d2=lambda y, z: np.full(np.broadcast(y, z).shape, 2.0),
        scale=4.0,
        bounds=None,
        params=("quadratic_unscaled",),
    )


def linear_loss() -> Loss:
    """|y - z|; a negative control that fails well-behavedness (condition 4)."""

    return Loss(
        name="linear",
        eval=lambda y, z: np.abs(np.asarray(y, dtype=float) - z),
        d1=lambda y, z: np.sign(np.asarray(z, dtype=float) - y),
        d2=lambda y, z: np.zeros(np.broadcast(y, z).shape),
        scale=2.0,
        bounds=None,
        params=("linear",),
    )


def convex_combination(losses: list[Loss], weights) -> Loss:
    """Pointwise convex combination; bounds are re-certified numerically."""
    weights = np.asarray(weights, dtype=float)
    if len(losses) == 0:
        raise InputDomainError("need at least one loss")
    if weights.shape != (len(losses),) or np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise InputDomainError("weights must be a simplex vector matching losses")

    comps = list(losses)
    ws = [float(w) for w in weights]

    def _mix(fns):
        def inner(y, z):
            acc = ws[0] * fns[0](y, z)
            for w, fn in zip(ws[1:], fns[1:]):
                acc = acc + w * fn(y, z)
            return acc

        return inner

    mixed = Loss(
        name="convex(" + ", ".join(f"{w:g}*{l.name}" for w, l in zip(ws, comps)) + ")",
        eval=_mix([l.eval for l in comps]),
        d1=_mix([l.d1 for l in comps]),
        d2=_mix([l.d2 for l in comps]),
        scale=float(sum(w * l.scale for w, l in zip(ws, comps))),
        bounds=None,
        params=("convex", tuple(l.params for l in comps), tuple(ws)),
    )
    result = verify_well_behaved(mixed)
    if isinstance(result, Certificate):
        mixed = Loss(
            name=mixed.name,
            eval=mixed.eval,
            d1=mixed.d1,
            d2=mixed.d2,
            scale=mixed.scale,
            bounds=(result.a, result.A, result.B),
            params=mixed.params,
        )
    return mixed


def verify_well_behaved(loss: Loss, grid_step: float = 0.001) -> Certificate | Violation:
    """Grid certification of the five well-behavedness conditions.

    Conditions (1)-(2) are checked exactly, (3) by finite-difference
    consistency of d1/d2, (4) by searching exponents over {1/8, ..., 1} and
    taking A as the grid infimum of (-l L') / L^a over z in (0, 2], and (5)
    by the grid maximum of L''. Violations are returned as values, not
    raised.
    """
    if not 0.0 < grid_step <= 0.01:
        raise InputDomainError("grid_step must be in (0, 0.01]")

    # (1) and (2), exact
    for label, pred, want, cond in (
        (-1.0, -1.0, 0.0, 1),
        (1.0, 1.0, 0.0, 1),
        (1.0, -1.0, 2.0, 2),
        (-1.0, 1.0, 2.0, 2),
    ):
        got = float(loss.eval(label, pred))
        if abs(got - want) > 1e-12:
            return Violation(cond, 0.0 if pred == label else 2.0,
                             f"L({label:g},{pred:g}) = {got!r}, expected {want:g}")

    # (3): central-difference consistency on interior grids. The grids keep a
    # margin from the label point, where higher derivatives of fractional
    # powers are unbounded and central differences lose accuracy.
    h = 1e-4
    zg1 = np.linspace(-0.99, 0.99, 401)
    zg2 = np.linspace(-0.9, 0.9, 401)
    for label in (-1.0, 1.0):
        d1_fd = (loss.eval(label, zg1 + h) - loss.eval(label, zg1 - h)) / (2 * h)
        err1 = np.abs(d1_fd - loss.d1(label, zg1))
        if err1.max() > 1e-6:
            return Violation(3, float(1.0 - label * zg1[err1.argmax()]),
                             f"d1 deviates from finite differences by {err1.max():.3g}")
        d2_fd = (
            loss.eval(label, zg2 + h)
            - 2 * loss.eval(label, zg2)
            + loss.eval(label, zg2 - h)
        ) / (h * h)
        err2 = np.abs(d2_fd - loss.d2(label, zg2))
        if err2.max() > 1e-6:
            return Violation(3, float(1.0 - label * zg2[err2.argmax()]),
                             f"d2 deviates from finite differences by {err2.max():.3g}")

    # (4) first clause: one-sided slope at the perfect prediction must vanish
    for label in (-1.0, 1.0):
        one_sided = float(loss.eval(label, label * (1.0 - grid_step))) / grid_step
        if one_sided > np.sqrt(grid_step):
            return Violation(4, 0.0,
                             f"L'({label:g},{label:g}) = {-one_sided:.6g} != 0")

    # (4) second clause: search the exponent grid for a feasible (a, A)
    zg4 = np.arange(1, int(round(2.0 / grid_step)) + 1) * grid_step
    best: tuple[float, float] | None = None
    slope_viol: Violation | None = None
    for label in (-1.0, 1.0):
        slopes = -label * loss.d1(label, label * (1.0 - zg4))
        if np.any(slopes <= 0) and slope_viol is None:
            z_bad = float(zg4[np.argmax(slopes <= 0)])
            slope_viol = Violation(4, z_bad, "-l L' is not positive")
    if slope_viol is not None:
        return slope_viol
    for a in A_EXPONENT_GRID:
        A_cand = np.inf
        for label in (-1.0, 1.0):
            vals = loss.eval(label, label * (1.0 - zg4))
            slopes = -label * loss.d1(label, label * (1.0 - zg4))
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(vals > 0, slopes / np.maximum(vals, 1e-300) ** a, np.inf)
            A_cand = min(A_cand, float(ratio.min()))
        if A_cand > 1e-9 and (best is None or A_cand > best[1]):
            best = (float(a), A_cand)
    if best is None:
        return Violation(4, float(zg4[0]), "no exponent in the grid admits a positive A")

    # (5): grid maximum of the second derivative on [-1, 1]
    zg5 = np.linspace(-1.0, 1.0, int(round(2.0 / grid_step)) + 1)
    B = max(float(np.max(loss.d2(label, zg5))) for label in (-1.0, 1.0))
    if not np.isfinite(B) or B <= 0:
        return Violation(5, 0.0, f"second derivative bound {B!r} is not a positive real")

    return Certificate(a=best[0], A=best[1], B=B, grid_step=grid_step)


def require_certified(loss: Loss, grid_step: float = 0.001) -> Certificate:
    result = verify_well_behaved(loss, grid_step)
    if isinstance(result, Violation):
        raise CertificationError(
            f"{loss.name} is not well-behaved: condition {result.condition} "
            f"at z = {result.witness_z:g} ({result.detail})"
        )
    return result


# ---------------------------------------------------------------------------
# Performance
# ---------------------------------------------------------------------------

def target_values(f, D: FiniteDistribution) -> np.ndarray:
    """Labels of the target on the support; accepts a Halfspace or an array."""
    if isinstance(f, Halfspace):
        return f.values(D.points)
    arr = np.asarray(f, dtype=float)
    if arr.shape != (D.size,):
        raise DimensionMismatchError("target values must align with the support")
    return arr


def rep_values(phi, D: FiniteDistribution) -> np.ndarray:
    """Predictions of the hypothesis on the support; Rep or array."""
    if isinstance(phi, BoundedLinearRep):
        return phi.values(D.points)
    arr = np.asarray(phi, dtype=float)
    if arr.shape != (D.size,):
        raise DimensionMismatchError("hypothesis values must align with the support")
    return arr


def lperf_true(f, phi, D: FiniteDistribution, loss: Loss) -> float:
    """Exact performance 1 - 2 E_D[L(f, phi)] / L(-1, 1) over the support."""
    fv = target_values(f, D)
    pv = rep_values(phi, D)
    expected = float(np.dot(D.probs, loss.eval(fv, pv)))
    return 1.0 - 2.0 * expected / loss.scale


def lperf_empirical(
    f, phi, D: FiniteDistribution, loss: Loss, s: int, rng: np.random.Generator
) -> float:
    """Empirical performance from s i.i.d. draws out of D.

    The s draws are realized as one multinomial count vector over the finite
    support, which has exactly the distribution of tallied i.i.d. samples and
    keeps the cost independent of s.
    """
    if s < 1:
        raise InputDomainError("sample count must be >= 1")
    fv = target_values(f, D)
    pv = rep_values(phi, D)
    counts = rng.multinomial(s, D.probs)
    total = float(np.dot(counts, loss.eval(fv, pv)))
    return 1.0 - 2.0 * total / (loss.scale * s)
