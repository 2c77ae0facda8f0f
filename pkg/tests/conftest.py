import numpy as np
import pytest

from evolvesim.domain import BoundedLinearRep, FiniteDistribution, Halfspace, margin


def random_instance(rng, n=None, max_support=64, saturating=False):
    """A random (halfspace, distribution, hypothesis, margin) tuple.

    ``saturating=False`` rescales the hypothesis so its linear form stays in
    [-1, 1] on the support: the regime where stepping a coefficient always
    moves the clipped value, which the guaranteed-improvement analysis needs.
    """
    if n is None:
        n = int(rng.integers(2, 9))
    m = int(rng.integers(2, max_support + 1))
    pts = rng.standard_normal((m, n))
    pts /= np.maximum(1.0, np.linalg.norm(pts, axis=1, keepdims=True)) * (1 + 1e-9)
    D = FiniteDistribution(pts, rng.dirichlet(np.ones(m)))
    w = rng.standard_normal(n)
    w /= np.linalg.norm(w)
    f = Halfspace(w, float(rng.uniform(-0.5, 0.5)))
    raw = rng.uniform(-1, 1, n + 1)
    if not saturating:
        design = np.hstack([np.ones((m, 1)), pts])
        peak = float(np.max(np.abs(design @ raw)))
        raw *= float(rng.uniform(0.2, 1.0)) / max(1.0, peak)
    phi = BoundedLinearRep(raw)
    return f, D, phi, margin(f, D)


@pytest.fixture(scope="session")
def greedy_cache():
    """Session-wide cache for the expensive greedy packings."""
    from evolvesim.csq import greedy_disjoint_sets

    cache = {}

    def get(n, k):
        if (n, k) not in cache:
            cache[(n, k)] = greedy_disjoint_sets(n, k)
        return cache[(n, k)]

    return get
