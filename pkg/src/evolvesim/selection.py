"""The tolerance-based beneficial/neutral selection rule.

One selection step draws p candidate mutations, estimates every distinct
candidate's empirical fitness from s fresh samples, classifies candidates
against the current hypothesis' fitness with tolerance t, and outputs a
frequency-weighted draw from the beneficial set (falling back to the
neutral set, then to extinction). Candidate identity is structural equality
of coefficient vectors; duplicates are merged with summed frequencies and
evaluated once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domain import BoundedLinearRep, FiniteDistribution
from .exceptions import InputDomainError
from .kernels import batch_empirical_perf, batch_true_perf
from .losses import Loss, target_values
from .mutation import Mutator, design_matrix
from .streams import StreamNode

__all__ = ["SelectionParams", "SelectionOutcome", "classify", "sel_nb"]

BENEFICIAL = "beneficial"
NEUTRAL = "neutral"
DELETERIOUS = "deleterious"
EXTINCT = "extinct"


@dataclass(frozen=True)
class SelectionParams:
    """Tolerance t, pool size p, and per-candidate sample count s."""

    t: float
    p: int
    s: int

    def __post_init__(self):
        if not 0.0 < self.t < 2.0:
            raise InputDomainError("tolerance must be in (0, 2)")
        if self.p < 1 or self.s < 1:
            raise InputDomainError("pool and sample sizes must be >= 1")


@dataclass(frozen=True)
class SelectionOutcome:
    """Result of one selection step; ``result`` is None iff the case is extinct."""

    result: BoundedLinearRep | None
    case: str
    v_current: float
    chosen_meta: tuple[float, int, int] | None  # (level, coord, sign)
    chosen_v: float
    bene_count: int
    neut_count: int
    diagnostics: dict = field(repr=False, default_factory=dict)


def classify(v_r: float, v_cand: float, t: float) -> str:
    """Beneficial iff v_cand >= v_r + t; neutral iff |v_cand - v_r| < t."""
    if t <= 0:
        raise InputDomainError("tolerance must be positive")
    diff = v_cand - v_r
    if diff >= t:
        return BENEFICIAL
    if abs(diff) < t:
        return NEUTRAL
    return DELETERIOUS


def sel_nb(
    f,
    D: FiniteDistribution,
    mutator: Mutator,
    r: BoundedLinearRep,
    params: SelectionParams,
    loss: Loss,
    stream: StreamNode,
    exact_fitness: bool = False,
    full_pool: bool = False,
) -> SelectionOutcome:
    """One selection step.

    Stream layout under ``stream``: child 0 drives the pool draws and the
    final frequency-weighted choice; child 1 the current hypothesis' fitness
    samples; child (2 + j) the fitness samples of the candidate whose lowest
    neighborhood index is j. ``exact_fitness`` replaces empirical fitness
    with the exact value (test hook); ``full_pool`` enumerates the whole
    neighborhood once instead of drawing p mutations.
    """
    coeffs, meta = mutator.candidates(r)
    size = coeffs.shape[0]
    rng_pool = stream.child(0).generator()
    if full_pool:
        drawn = np.arange(size)
    else:
        drawn = np.asarray(mutator.sample_indices(r, params.p, rng_pool))

    # merge structurally equal candidates; order groups by lowest index
    groups: dict[bytes, list[int]] = {}
    order: list[bytes] = []
    freqs: dict[bytes, int] = {}
    for idx in drawn:
        key = coeffs[idx].tobytes()
        if key not in groups:
            groups[key] = [int(idx)]
            freqs[key] = 0
            order.append(key)
        else:
            groups[key].append(int(idx))
        freqs[key] += 1
    reps_idx = sorted((min(groups[k]), k) for k in order)
    lead_indices = np.array([i for i, _ in reps_idx])
    keys = [k for _, k in reps_idx]
    cand_coeffs = coeffs[lead_indices]
    cand_freqs = np.array([freqs[k] for k in keys], dtype=np.int64)

    design = design_matrix(D)
    fv = target_values(f, D)
    if exact_fitness:
        v_r = float(batch_true_perf(design, r.coeffs[None, :], fv, D.probs, loss)[0])
        v_cand = batch_true_perf(design, cand_coeffs, fv, D.probs, loss)
    else:
        rng_r = stream.child(1).generator()
        counts_r = rng_r.multinomial(params.s, D.probs)[None, :]
        v_r = float(
            batch_empirical_perf(design, r.coeffs[None, :], fv, counts_r, params.s, loss)[0]
        )
        counts = np.empty((len(keys), D.size), dtype=np.int64)
        for row, lead in enumerate(lead_indices):
            rng_c = stream.child(2 + int(lead)).generator()
            counts[row] = rng_c.multinomial(params.s, D.probs)
        v_cand = batch_empirical_perf(design, cand_coeffs, fv, counts, params.s, loss)

    diffs = v_cand - v_r
    bene = diffs >= params.t
    neut = (~bene) & (np.abs(diffs) < params.t)

    diagnostics = {
        "v_current": v_r,
        "candidates": [
            {
                "index": int(lead_indices[i]),
                "level": meta[lead_indices[i]][0],
                "coord": meta[lead_indices[i]][1],
                "sign": meta[lead_indices[i]][2],
                "freq": int(cand_freqs[i]),
                "v": float(v_cand[i]),
                "class": BENEFICIAL if bene[i] else NEUTRAL if neut[i] else DELETERIOUS,
            }
            for i in range(len(keys))
        ],
        "bene_count": int(bene.sum()),
        "neut_count": int(neut.sum()),
    }

    pick_from = bene if bene.any() else neut
    if not pick_from.any():
        return SelectionOutcome(
            result=None,
            case=EXTINCT,
            v_current=v_r,
            chosen_meta=None,
            chosen_v=float("nan"),
            bene_count=int(bene.sum()),
            neut_count=int(neut.sum()),
            diagnostics=diagnostics,
        )
    pool_idx = np.flatnonzero(pick_from)
    weights = cand_freqs[pool_idx].astype(np.float64)
    weights /= weights.sum()
    chosen = int(pool_idx[rng_pool.choice(len(pool_idx), p=weights)])
    lead = int(lead_indices[chosen])
    return SelectionOutcome(
        result=BoundedLinearRep(cand_coeffs[chosen]),
        case=BENEFICIAL if bene.any() else NEUTRAL,
        v_current=v_r,
        chosen_meta=meta[lead],
        chosen_v=float(v_cand[chosen]),
        bene_count=int(bene.sum()),
        neut_count=int(neut.sum()),
        diagnostics=diagnostics,
    )
