"""Wall-clock timing of dense vs. fast Birkhoff products and dense LU solves."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .birkhoff import apply_Ba_fast, build_operators
from .grid import grid
from .kkt import assemble, to_dense
from .model import builtin_problem
from .solver import initial_guess

OPERATIONS = ("dense_matvec", "fast_matvec", "dense_lu")


@dataclass(frozen=True)
class BenchRow:
    operation: str
    N: int
    wall_seconds: float
    checksum: float


def median_time(fn, repeats: int = 5, min_time: float = 2e-3) -> tuple[float, object]:
    """Median seconds per call; short calls are batched until ``min_time``."""
    out = fn()
    t0 = time.perf_counter()
    fn()
    once = time.perf_counter() - t0
    inner = max(1, int(min_time / max(once, 1e-9)))
    samples = []
    for _ in range(max(5, repeats)):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        samples.append((time.perf_counter() - t0) / inner)
    return statistics.median(samples), out


def bench(Ns, operations=OPERATIONS, repeats: int = 5, seed: int = 0, lu_cap: int = 5 * 513 + 5) -> list[BenchRow]:
    rng = np.random.default_rng(seed)
    rows = []
    for N in Ns:
        g = grid("cgl", N)
        ops = build_operators(g)
        v = rng.standard_normal(N + 1)
        if "dense_matvec" in operations:
            t, y = median_time(lambda: ops.Ba @ v, repeats)
            rows.append(BenchRow("dense_matvec", N, t, float(np.sum(y))))
        if "fast_matvec" in operations:
            t, y = median_time(lambda: apply_Ba_fast(ops, v), repeats)
            rows.append(BenchRow("fast_matvec", N, t, float(np.sum(y))))
        if "dense_lu" in operations and 5 * (N + 1) + 5 <= lu_cap:
            problem = builtin_problem("tp1")
            A = to_dense(assemble(initial_guess(problem, g), problem, ops))
            b = rng.standard_normal(A.shape[0])

            def solve():
                return scipy.linalg.lu_solve(scipy.linalg.lu_factor(A), b)

            t, y = median_time(solve, repeats)
            rows.append(BenchRow("dense_lu", N, t, float(np.sum(y))))
    return rows
