"""Single-coordinate mutation neighborhoods and the randomized mutator.

The neighborhood of a hypothesis phi consists of phi itself (the stay-put
member) plus, for each configured step magnitude alpha and each coordinate
i in [0..n] (0 is the constant term), the hypotheses obtained by adding
+alpha or -alpha to coefficient i. Coefficients are stored unclipped (range
clipping happens at evaluation) but are capped at |a_i| <= n + 1 as a safety
rail against unbounded drift; the cap is tested not to bind in practice.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import BoundedLinearRep, FiniteDistribution, Halfspace
from .exceptions import DimensionMismatchError, InputDomainError
from .kernels import batch_true_perf
from .losses import Loss, lperf_true, target_values

__all__ = [
    "NeighborhoodSpec",
    "alpha_schedule",
    "schedule_for_alpha",
    "theoretical_alpha",
    "neighborhood",
    "neighborhood_matrix",
    "mutate",
    "Mutator",
    "best_neighbor_exact",
    "design_matrix",
]


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Step magnitudes, sorted descending; the stay-put member is implicit."""

    alpha_levels: tuple[float, ...]
    include_stay: bool = True

    def __post_init__(self):
        levels = tuple(float(a) for a in self.alpha_levels)
        if not levels:
            raise InputDomainError("need at least one step magnitude")
        if any(not 0.0 < a <= 1.0 for a in levels):
            raise InputDomainError("step magnitudes must lie in (0, 1]")
        if list(levels) != sorted(levels, reverse=True):
            raise InputDomainError("step magnitudes must be sorted descending")
        if not self.include_stay:
            raise InputDomainError("the stay-put member is always included")
        object.__setattr__(self, "alpha_levels", levels)

    def size(self, n: int) -> int:
        return 1 + 2 * (n + 1) * len(self.alpha_levels)


def alpha_schedule(n: int) -> list[float]:
    """Geometric step schedule {2^-t : t in [n]}."""
    if n < 1:
        raise InputDomainError("n must be >= 1")
    return [2.0**-t for t in range(1, n + 1)]


def schedule_for_alpha(alpha: float) -> list[float]:
    """Powers of two from 1/2 down to the first level <= alpha (>= alpha/2).

    Used when the target step size is known: the smallest level lands within
    a factor two of alpha, so the schedule retains a constant fraction of the
    guaranteed improvement while the larger levels accelerate early progress.
    """
    if not 0.0 < alpha <= 1.0:
        raise InputDomainError("alpha must be in (0, 1]")
    t_max = max(1, int(np.ceil(-np.log2(alpha))))
    return [2.0**-t for t in range(1, t_max + 1)]


def theoretical_alpha(
    epsilon: float, gamma: float, n: int, bounds: tuple[float, float, float] | None = None
) -> float:
    """Guaranteed-improvement step size.

    Quadratic regime (bounds None): epsilon * gamma / (3 sqrt(n)).
    Well-behaved regime: A * gamma * epsilon^(a+1) / (B * 2^(a+3) * sqrt(n)).
    """
    # a normalized halfspace has margin at most ||w|| + |theta| <= 2 on the ball
    if not (0.0 < epsilon <= 1.0 and 0.0 < gamma <= 2.0 and n >= 1):
        raise InputDomainError("need epsilon in (0, 1], gamma in (0, 2], n >= 1")
    if bounds is None:
        return epsilon * gamma / (3.0 * np.sqrt(n))
    a, A, B = bounds
    if a <= 0 or A <= 0 or B <= 0:
        raise InputDomainError("loss bounds must be positive")
    return A * gamma * epsilon ** (a + 1.0) / (B * 2.0 ** (a + 3.0) * np.sqrt(n))


def neighborhood_matrix(
    phi: BoundedLinearRep, spec: NeighborhoodSpec, n: int
) -> tuple[np.ndarray, list[tuple[float, int, int]]]:
    """All candidate coefficient vectors as rows, plus (level, coord, sign) meta.

    Row 0 is the stay-put member with meta (0.0, -1, 0); the rest enumerate
    levels in descending order, coordinates 0..n, +step before -step.
    """
    if phi.n != n:
        raise DimensionMismatchError(f"rep dimension {phi.n} != n = {n}")
    cap = float(n + 1)
    size = spec.size(n)
    coeffs = np.tile(phi.coeffs, (size, 1))
    meta: list[tuple[float, int, int]] = [(0.0, -1, 0)]
    row = 1
    for level in spec.alpha_levels:
        for i in range(n + 1):
            for sign in (1, -1):
                value = phi.coeffs[i] + sign * level
                coeffs[row, i] = min(cap, max(-cap, value))
                meta.append((level, i, sign))
                row += 1
    return coeffs, meta


def neighborhood(
    phi: BoundedLinearRep, spec: NeighborhoodSpec, n: int
) -> list[BoundedLinearRep]:
    coeffs, _ = neighborhood_matrix(phi, spec, n)
    return [BoundedLinearRep(coeffs[i]) for i in range(coeffs.shape[0])]


def mutate(
    phi: BoundedLinearRep, spec: NeighborhoodSpec, n: int, rng: np.random.Generator
) -> BoundedLinearRep:
    """One uniform draw from the neighborhood."""
    candidates = neighborhood(phi, spec, n)
    return candidates[int(rng.integers(len(candidates)))]


class Mutator:
    """Uniform mutator over the coordinate-step neighborhood of a hypothesis."""

    def __init__(self, spec: NeighborhoodSpec, n: int):
        self.spec = spec
        self.n = int(n)

    def candidates(self, phi: BoundedLinearRep):
        return neighborhood_matrix(phi, self.spec, self.n)

    def sample_indices(self, phi: BoundedLinearRep, p: int, rng: np.random.Generator):
        """Indices of p independent uniform draws from the neighborhood."""
        return rng.integers(0, self.spec.size(self.n), size=p)


def design_matrix(D: FiniteDistribution) -> np.ndarray:
    """Support points with the synthesized constant column x_0 = 1 prepended."""
    return np.hstack([np.ones((D.size, 1)), D.points])


def best_neighbor_exact(
    phi: BoundedLinearRep,
    f: Halfspace,
    D: FiniteDistribution,
    loss: Loss,
    spec: NeighborhoodSpec,
) -> tuple[BoundedLinearRep, float]:
    """Exhaustive audit: the neighbor with maximal exact lperf and its gain.

    Ties resolve to the earliest candidate in enumeration order (stay-put
    first, then lower coordinate index, +step before -step). Never used by
    the evolution loop, which only sees empirical fitness.
    """
    coeffs, _ = neighborhood_matrix(phi, spec, phi.n)
    fv = target_values(f, D)
    perfs = batch_true_perf(design_matrix(D), coeffs, fv, D.probs, loss)
    best = int(np.argmax(perfs))
    gain = float(perfs[best]) - lperf_true(fv, phi, D, loss)
    return BoundedLinearRep(coeffs[best]), gain
