"""Hot-loop kernels with backend selection at import time.

The compiled Cython extension is used when available; a NumPy implementation
with identical semantics is the fallback. Set ``EVOLVESIM_NO_EXT=1`` to force
the fallback (used by the parity tests and the benchmark).
"""
from __future__ import annotations

import os

import numpy as np

from .losses import Loss

try:
    from . import _ckernels as _ext
except ImportError:  # pragma: no cover - build environment dependent
    _ext = None

if os.environ.get("EVOLVESIM_NO_EXT"):
    _ext = None

HAVE_EXT = _ext is not None


def backend_name() -> str:
    return "cython" if HAVE_EXT else "numpy"


def clip_eval_numpy(design: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    return np.clip(coeffs @ design.T, -1.0, 1.0)


def clip_eval(design: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Clipped linear values, (ncand, m); design carries the ones column."""
    if HAVE_EXT:
        return _ext.clip_eval(
            np.ascontiguousarray(design), np.ascontiguousarray(coeffs)
        )
    return clip_eval_numpy(design, coeffs)


def _power_params(loss: Loss) -> tuple[float, float] | None:
    """(c, effective scale) when the loss reduces to a power family, else None."""
    if loss.params and loss.params[0] == "power":
        return float(loss.params[1]), loss.scale
    if loss.params and loss.params[0] == "quadratic_unscaled":
        # (z-y)^2 with L(-1,1)=4 yields the same lperf as power(2)
        return 2.0, 2.0
    return None


def batch_empirical_perf_numpy(
    design: np.ndarray,
    coeffs: np.ndarray,
    fvals: np.ndarray,
    counts: np.ndarray,
    s: int,
    loss: Loss,
) -> np.ndarray:
    values = clip_eval_numpy(design, coeffs)
    losses = loss.eval(fvals[None, :], values)
    totals = np.einsum("ij,ij->i", counts.astype(np.float64), losses)
    return 1.0 - 2.0 * totals / (loss.scale * s)


def batch_empirical_perf(
    design: np.ndarray,
    coeffs: np.ndarray,
    fvals: np.ndarray,
    counts: np.ndarray,
    s: int,
    loss: Loss,
) -> np.ndarray:
    """Empirical lperf per candidate from per-candidate sample counts."""
    pp = _power_params(loss)
    if HAVE_EXT and pp is not None:
        c, scale = pp
        return _ext.power_perf(
            np.ascontiguousarray(design),
            np.ascontiguousarray(coeffs),
            np.ascontiguousarray(fvals),
            np.ascontiguousarray(counts, dtype=np.int64),
            int(s),
            c,
            scale,
        )
    return batch_empirical_perf_numpy(design, coeffs, fvals, counts, s, loss)


def batch_true_perf(
    design: np.ndarray,
    coeffs: np.ndarray,
    fvals: np.ndarray,
    probs: np.ndarray,
    loss: Loss,
) -> np.ndarray:
    """Exact lperf per candidate (audit path; NumPy is plenty here)."""
    values = clip_eval(design, coeffs)
    return 1.0 - 2.0 * (loss.eval(fvals[None, :], values) @ probs) / loss.scale
