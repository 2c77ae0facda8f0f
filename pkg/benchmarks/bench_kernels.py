"""Compare the compiled kernels against the NumPy fallback.

Run:  python benchmarks/bench_kernels.py
"""
from __future__ import annotations

import time

import numpy as np

from evolvesim.kernels import (
    HAVE_EXT,
    backend_name,
    batch_empirical_perf,
    batch_empirical_perf_numpy,
    clip_eval,
    clip_eval_numpy,
)
from evolvesim.losses import power_loss


def bench(fn, *args, repeats: int = 20) -> float:
    fn(*args)  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    rng = np.random.default_rng(0)
    print(f"active backend: {backend_name()} (extension available: {HAVE_EXT})")
    loss = power_loss(2)
    for ncand, m, n in ((64, 32, 5), (256, 256, 8), (1024, 1024, 10)):
        design = np.hstack([np.ones((m, 1)), rng.standard_normal((m, n)) / np.sqrt(n)])
        coeffs = rng.uniform(-1, 1, (ncand, n + 1))
        fvals = np.where(rng.random(m) < 0.5, 1.0, -1.0)
        counts = rng.multinomial(10_000, np.full(m, 1.0 / m), size=ncand).astype(np.int64)
        t_np = bench(clip_eval_numpy, design, coeffs)
        t_perf_np = bench(
            batch_empirical_perf_numpy, design, coeffs, fvals, counts, 10_000, loss
        )
        line = f"ncand={ncand:5d} m={m:5d}: clip numpy {t_np*1e6:9.1f}us"
        if HAVE_EXT:
            t_ext = bench(clip_eval, design, coeffs)
            t_perf_ext = bench(
                batch_empirical_perf, design, coeffs, fvals, counts, 10_000, loss
            )
            line += (
                f" | cython {t_ext*1e6:9.1f}us ({t_np/t_ext:4.1f}x)"
                f" | perf numpy {t_perf_np*1e6:9.1f}us"
                f" | cython {t_perf_ext*1e6:9.1f}us ({t_perf_np/t_perf_ext:4.1f}x)"
            )
            a = batch_empirical_perf(design, coeffs, fvals, counts, 10_000, loss)
            b = batch_empirical_perf_numpy(design, coeffs, fvals, counts, 10_000, loss)
            assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
        else:
            line += f" | perf numpy {t_perf_np*1e6:9.1f}us"
        print(line)


if __name__ == "__main__":
    main()
