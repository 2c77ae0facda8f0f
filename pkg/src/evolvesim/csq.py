"""Correlational-query lab: Fourier machinery over {0,1}^k, conjunction /
distribution pairs with a hidden low-degree band, greedy set packing, the
correlational oracle, and the counting audit for distinguishing queries.

Conventions: points of {0,1}^n are bitmask indices where bit (i-1) of the
index holds coordinate x_i (coordinates are 1-based here, matching index-set
notation I ⊆ [n]). Parities are chi_I(x) = prod_{i in I} (1 - 2 x_i) =
(-1)^{popcount(mask(I) & x)}; Fourier coefficients are uniform-distribution
inner products with parities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ConstructionError, InputDomainError

__all__ = [
    "parity",
    "fwht",
    "FourierSpectrum",
    "ConjDistPair",
    "conj_fourier",
    "conjunction_table",
    "build_pair",
    "expand_to_full",
    "greedy_disjoint_sets",
    "csq_oracle",
    "heavy_coefficient_count",
    "distinguishing_audit",
]

PARSEVAL_TOL = 1e-10


def _mask(I: Iterable[int]) -> int:
    m = 0
    for i in I:
        if i < 1:
            raise InputDomainError("index sets are 1-based")
        m |= 1 << (i - 1)
    return m


def _set_from_mask(m: int) -> frozenset[int]:
    return frozenset(i + 1 for i in range(m.bit_length()) if m >> i & 1)


def parity(I: Iterable[int], x: Sequence[int]) -> int:
    """chi_I(x) = prod_{i in I} (1 - 2 x_i); the empty parity is 1."""
    v = 1
    for i in I:
        if i < 1 or i > len(x):
            raise InputDomainError(f"index {i} outside [1..{len(x)}]")
        v *= 1 - 2 * int(x[i - 1])
    return v


def fwht(table: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform (an involution up to 2^n)."""
    a = np.array(table, dtype=np.float64)
    m = a.shape[0]
    if m & (m - 1) or m == 0:
        raise InputDomainError("table length must be a power of two")
    h = 1
    while h < m:
        a = a.reshape(-1, 2, h)
        top = a[:, 0, :] + a[:, 1, :]
        bot = a[:, 0, :] - a[:, 1, :]
        a = np.stack([top, bot], axis=1)
        h *= 2
    return a.reshape(m)


@dataclass(frozen=True)
class FourierSpectrum:
    """Sparse map from index sets I (frozensets of 1-based ints) to coefficients."""

    n: int
    coeffs: dict

    @classmethod
    def from_table(cls, table: np.ndarray, n: int) -> "FourierSpectrum":
        table = np.asarray(table, dtype=np.float64)
        if table.shape != (2**n,):
            raise InputDomainError(f"table must have length 2^{n}")
        hat = fwht(table) / 2.0**n
        norm_sq = float(np.mean(table**2))
        if abs(float(np.sum(hat**2)) - norm_sq) > PARSEVAL_TOL:
            raise ConstructionError("Parseval identity violated in transform")
        coeffs = {
            _set_from_mask(m): float(hat[m]) for m in range(2**n) if hat[m] != 0.0
        }
        return cls(n=n, coeffs=coeffs)

    def to_table(self) -> np.ndarray:
        hat = np.zeros(2**self.n)
        for I, c in self.coeffs.items():
            hat[_mask(I)] = c
        return fwht(hat)

    def __getitem__(self, I) -> float:
        return self.coeffs.get(frozenset(I), 0.0)


def conjunction_table(k: int) -> np.ndarray:
    """Sign table of the k-literal conjunction on its own coordinates.

    The expansion -1 + 2^{1-k} sum_{I subseteq S} chi_I collapses to +1 at
    the all-zeros pattern and -1 elsewhere, which fixes the orientation.
    """
    t = -np.ones(2**k)
    t[0] = 1.0
    return t


def conj_fourier(S: Iterable[int], n: int | None = None) -> FourierSpectrum:
    """Spectrum of the conjunction over S: 2^{1-k} on each nonempty I ⊆ S,
    -1 + 2^{1-k} on the empty set."""
    S = frozenset(S)
    k = len(S)
    if k < 1:
        raise InputDomainError("S must be nonempty")
    if n is None:
        n = max(S)
    if max(S) > n:
        raise InputDomainError("S exceeds ambient dimension")
    c = 2.0 ** (1 - k)
    coeffs = {frozenset(): -1.0 + c}
    members = sorted(S)
    for size in range(1, k + 1):
        for I in combinations(members, size):
            coeffs[frozenset(I)] = c
    return FourierSpectrum(n=n, coeffs=coeffs)


@dataclass(frozen=True)
class ConjDistPair:
    """A conjunction t_S with a distribution D_S that hides its low-degree band.

    Tables are over the 2^k patterns of the S-coordinates (the distribution
    is uniform on the remaining coordinates). ``density`` holds D_S as
    probabilities over S-patterns; ``ratio`` is D_S(x)/U(x).
    """

    S: frozenset
    k: int
    t_table: np.ndarray
    theta_table: np.ndarray
    density: np.ndarray
    ratio: np.ndarray
    alpha_scale: float
    l1_phi: float

    def validate(self) -> None:
        k = self.k
        if abs(float(np.sum(self.density)) - 1.0) > 1e-10:
            raise ConstructionError("density does not sum to 1")
        if np.any(self.ratio < 1.0 / 3.0 - 1e-12) or np.any(self.ratio > 3.0 + 1e-12):
            raise ConstructionError("density ratio outside [1/3, 3]")
        if not 2.0 / 3.0 - 1e-12 <= self.alpha_scale <= 2.0 + 1e-12:
            raise ConstructionError("alpha_scale outside [2/3, 2]")
        bridge = self.density * self.t_table - 2.0**-k * self.theta_table
        if np.max(np.abs(bridge)) > 1e-12:
            raise ConstructionError("pointwise bridge identity violated")
        hat = fwht(self.theta_table) / 2.0**k
        for m in range(1, 2**k):
            if 1 <= m.bit_count() <= k // 3 and abs(hat[m]) > 1e-12:
                raise ConstructionError(
                    f"low-degree coefficient {hat[m]} at mask {m} is nonzero"
                )


def _phi_table(k: int) -> np.ndarray:
    """The conjunction with parities of degree 1..k/3 removed:
    phi = -1 + 2^{1-k} + 2^{1-k} sum_{I: |I| > k/3} chi_I."""
    c = 2.0 ** (1 - k)
    hat = np.zeros(2**k)
    hat[0] = -1.0 + c
    for m in range(1, 2**k):
        if m.bit_count() > k // 3:
            hat[m] = c
    return fwht(hat)


def build_pair(S: Iterable[int]) -> ConjDistPair:
    """Construct (t_S, D_S, theta_S) and verify every invariant exhaustively.

    Sign preservation of phi relative to t_S is checked directly over all
    2^k patterns (the generic counting argument does not cover small k);
    a flip would falsify the construction at this k and raises.
    """
    S = frozenset(S)
    k = len(S)
    if k < 6 or k % 3 != 0:
        raise InputDomainError("need |S| >= 6 and divisible by 3")
    t = conjunction_table(k)
    phi = _phi_table(k)
    if np.any(phi * t <= 0.0):
        raise ConstructionError("phi changes sign relative to the conjunction")
    l1 = float(np.mean(np.abs(phi)))
    theta = phi / l1
    ratio = np.abs(phi) / l1
    density = ratio * 2.0**-k
    pair = ConjDistPair(
        S=S,
        k=k,
        t_table=t,
        theta_table=theta,
        density=density,
        ratio=ratio,
        alpha_scale=1.0 / l1,
        l1_phi=l1,
    )
    pair.validate()
    return pair


def expand_to_full(local_table: np.ndarray, S: frozenset, n: int) -> np.ndarray:
    """Lift a table on S-patterns to {0,1}^n (constant in the other coords)."""
    members = sorted(S)
    k = len(members)
    if local_table.shape != (2**k,):
        raise InputDomainError("local table length must be 2^|S|")
    if n < max(members):
        raise InputDomainError("S exceeds ambient dimension")
    x = np.arange(2**n)
    local_idx = np.zeros(2**n, dtype=np.int64)
    for j, i in enumerate(members):
        local_idx |= ((x >> (i - 1)) & 1) << j
    return np.asarray(local_table)[local_idx]


def _combination_masks(n: int, k: int, chunk: int = 1 << 18):
    """All k-subsets of [n] as uint64 bitmasks, in lexicographic order."""
    total = math.comb(n, k)
    out = np.empty(total, dtype=np.uint64)
    pos = 0
    it = combinations(range(n), k)
    while True:
        block = np.array(list(islice(it, chunk)), dtype=np.uint64)
        if block.size == 0:
            break
        out[pos : pos + block.shape[0]] = np.bitwise_or.reduce(
            np.uint64(1) << block, axis=1
        )
        pos += block.shape[0]
    return out


def greedy_disjoint_sets(n: int, k: int) -> list[frozenset]:
    """Greedy family of k-subsets of [n] with pairwise intersection <= k/3.

    Scans k-subsets in lexicographic order, accepting a set iff it overlaps
    every accepted set in at most k/3 indices. The resulting family has at
    least (n/(8k))^{k/3} + 1 members.
    """
    if k % 3 != 0 or not 6 <= k <= n // 2:
        raise InputDomainError("need k divisible by 3 with 6 <= k <= n/2")
    limit = np.uint64(k // 3)
    masks = _combination_masks(n, k)
    accepted: list[int] = []
    while masks.size:
        head = masks[0]
        accepted.append(int(head))
        masks = masks[np.bitwise_count(masks & head) <= limit]
    result = [_set_from_mask(m) for m in accepted]
    bound = (n / (8.0 * k)) ** (k / 3.0) + 1.0
    if len(result) < bound:
        raise ConstructionError(
            f"greedy family of size {len(result)} below guaranteed {bound}"
        )
    return result


def csq_oracle(
    fvals: np.ndarray,
    density: np.ndarray,
    g: np.ndarray,
    tau: float,
    mode: str = "exact",
    reference: float = 0.0,
) -> float:
    """Correlation E_{D}[f g], answered exactly or adversarially within tau.

    ``adversarial+``/``adversarial-`` shift the exact value by +-tau;
    ``toward-reference`` returns the admissible value closest to
    ``reference`` (the lower-bound oracle: answer as if the target were the
    reference hypothesis whenever tau allows it).
    """
    g = np.asarray(g, dtype=np.float64)
    if np.max(np.abs(g)) > 1.0 + 1e-12:
        raise InputDomainError("query must be bounded by 1 in sup norm")
    if not 0.0 < tau <= 1.0:
        raise InputDomainError("tau must be in (0, 1]")
    exact = float(np.sum(np.asarray(density) * np.asarray(fvals) * g))
    if mode == "exact":
        return exact
    if mode == "adversarial+":
        return exact + tau
    if mode == "adversarial-":
        return exact - tau
    if mode == "toward-reference":
        return float(np.clip(reference, exact - tau, exact + tau))
    raise InputDomainError(f"unknown oracle mode: {mode}")


def heavy_coefficient_count(g: np.ndarray, tau: float) -> int:
    """Number of Fourier coefficients with |hat g(I)| >= tau/4.

    For a query with E_U[g^2] <= 1, Parseval caps this at 16/tau^2.
    """
    g = np.asarray(g, dtype=np.float64)
    m = g.shape[0]
    if m & (m - 1):
        raise InputDomainError("table length must be a power of two")
    norm_sq = float(np.mean(g**2))
    if norm_sq > 1.0 + 1e-9:
        raise InputDomainError("query norm exceeds 1")
    if not 0.0 < tau:
        raise InputDomainError("tau must be positive")
    hat = fwht(g) / m
    count = int(np.sum(np.abs(hat) >= tau / 4.0))
    assert count <= 16.0 / tau**2
    return count


def _subset_masks_above(S: frozenset, floor: int) -> list[int]:
    members = sorted(S)
    out = []
    for size in range(floor + 1, len(members) + 1):
        for I in combinations(members, size):
            out.append(_mask(I))
    return out


def distinguishing_audit(
    pairs: Sequence[ConjDistPair],
    queries: Sequence[np.ndarray],
    tau: float,
    epsilon: float,
    n: int,
    hypotheses: Sequence[np.ndarray] = (),
    reference_alpha: float | None = None,
) -> dict:
    """Counting audit of the distinguishing mechanism.

    For each query g, a pair S is tau-distinguished when the oracle cannot
    answer with the reference value <psi, g>_U, i.e. when
    |<theta_S - psi, g>_U| > tau. The residual theta_S - psi is supported on
    parities of S-subsets of size > k/3, so each distinguished pair yields a
    heavy-coefficient witness I_S with |I_S| > k/3 and |hat g(I_S)| >= tau/4.
    Verified per query: witnesses across distinct pairs are distinct (a
    witness is a subset of its own S only), and the number of heavy
    coefficients is at most 16/tau^2. With ``hypotheses``, also verifies the
    change-of-measure bridge Pr_U[t_S != h] <= 3 Pr_{D_S}[t_S != h] exactly
    and reports how many pairs each hypothesis is epsilon-close to.

    ``reference_alpha`` selects the fixed-constant reading of the reference
    scale; by default each pair's own alpha_scale is used (for a common k
    the two coincide, and the report carries both values).
    """
    if not pairs:
        raise InputDomainError("need at least one pair")
    k = pairs[0].k
    if any(p.k != k for p in pairs):
        raise InputDomainError("all pairs must share k")
    floor = k // 3
    subset_masks = {id(p): _subset_masks_above(p.S, floor) for p in pairs}
    t_full = [expand_to_full(p.t_table, p.S, n) for p in pairs]
    m = 2**n

    per_query = []
    for qi, g in enumerate(queries):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != (m,):
            raise InputDomainError("query table has wrong length")
        hat = fwht(g) / m
        heavy = heavy_coefficient_count(g, tau)
        distinguished = []
        witnesses = set()
        for pi, p in enumerate(pairs):
            a_ref = p.alpha_scale if reference_alpha is None else reference_alpha
            coeff = p.alpha_scale * 2.0 ** (1 - k)
            masks = subset_masks[id(p)]
            diff = coeff * float(np.sum(hat[masks]))
            diff += (p.alpha_scale - a_ref) * (-1.0 + 2.0 ** (1 - k)) * float(hat[0])
            if abs(diff) > tau:
                best = max(masks, key=lambda mm: abs(hat[mm]))
                if abs(hat[best]) < tau / 4.0:
                    raise ConstructionError(
                        "distinguished pair lacks a heavy witness coefficient"
                    )
                witness = _set_from_mask(best)
                if witness in witnesses:
                    raise ConstructionError(
                        "shared witness across distinct pairs in audit"
                    )
                witnesses.add(witness)
                distinguished.append(
                    {"pair": pi, "witness": sorted(witness), "coefficient": float(hat[best])}
                )
        per_query.append(
            {"query": qi, "heavy_count": heavy, "distinguished": distinguished}
        )

    hypothesis_reports = []
    for hi, h in enumerate(hypotheses):
        h = np.asarray(h, dtype=np.float64)
        close = []
        for pi, p in enumerate(pairs):
            dis_local = expand_to_full(p.density, p.S, n) / 2.0 ** (n - k)
            disagree = t_full[pi] != h
            err_d = float(np.sum(dis_local[disagree]))
            err_u = float(np.mean(disagree))
            if err_u > 3.0 * err_d + 1e-12:
                raise ConstructionError("density bridge Pr_U <= 3 Pr_D violated")
            if err_d <= epsilon:
                close.append(pi)
        hypothesis_reports.append(
            {"hypothesis": hi, "close_pairs": close, "at_most_one": len(close) <= 1}
        )

    return {
        "k": k,
        "tau": tau,
        "epsilon": epsilon,
        "reference_alpha": reference_alpha,
        "per_pair_alpha": [p.alpha_scale for p in pairs],
        "queries": per_query,
        "hypotheses": hypothesis_reports,
    }
