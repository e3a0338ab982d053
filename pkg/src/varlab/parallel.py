"""Chunked multi-threaded variance for the mergeable representations.

Workers reduce disjoint, contiguous slices to partial states; the combiner
folds the partials strictly by chunk index, so the result depends only on the
plan and never on thread scheduling. A one-chunk plan runs exactly the
sequential code path.
"""

from __future__ import annotations

import os
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .accumulators import (
    DEFAULT_BASE_BLOCK,
    DEFAULT_GROUP_SIZE,
    INNER_CODES,
    PAIRWISE,
    SHIFTED,
    TEXTBOOK,
    TOTAL_VARIANCE,
    TWO_PASS,
    UPDATING_WWH,
    MomentState,
    PairState,
    PrefixMean,
    ShiftPolicy,
    VarianceResult,
    as_values,
    canonical_algorithm,
    compensated_add,
    finish,
    moment_finalize,
    moment_merge,
    pair_merge,
    resolve_shift,
    total_variance_arrays,
)
from .errors import EmptyInput, UnsupportedParallelAlgorithm

MERGEABLE = (TWO_PASS, TEXTBOOK, SHIFTED, PAIRWISE, TOTAL_VARIANCE)
THREADS_ENV = "VARLAB_THREADS"


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ChunkPlan:
    chunk_boundaries: tuple[tuple[int, int], ...]
    workers: int

    @property
    def size(self) -> int:
        return self.chunk_boundaries[-1][1] if self.chunk_boundaries else 0


def plan_chunks(n: int, workers: int) -> ChunkPlan:
    """Contiguous chunks of ceil(n / workers) values; the last may be short."""
    if n < 0 or workers < 1:
        raise ValueError("need n >= 0 and workers >= 1")
    if n == 0:
        return ChunkPlan((), workers)
    step = -(-n // workers)
    return ChunkPlan(tuple((lo, min(lo + step, n)) for lo in range(0, n, step)), workers)


def _fold_sums(parts, compensated):
    s, c = parts[0]
    for ps, pc in parts[1:]:
        if compensated:
            s, c = compensated_add(s, c + pc, ps)
        else:
            s += ps
    return s + c


def parallel_variance(
    data,
    algorithm: str,
    plan: ChunkPlan,
    *,
    shift_policy: ShiftPolicy | None = None,
    compensated: bool = False,
    clamp_negative: bool = False,
    group_size: int | None = DEFAULT_GROUP_SIZE,
    inner: str = UPDATING_WWH,
    base_block: int = DEFAULT_BASE_BLOCK,
    executor: Executor | None = None,
) -> VarianceResult:
    """Variance of ``data`` with per-chunk partial states reduced on worker threads.

    ``total-variance`` groups each chunk the same way the sequential run
    does (``group_size`` values per group, the chunk tail may be short);
    ``group_size=None`` makes every chunk a single group instead.
    """
    algorithm = canonical_algorithm(algorithm)
    if algorithm not in MERGEABLE:
        raise UnsupportedParallelAlgorithm(
            f"{algorithm} incorporates one value at a time and has no merge step"
        )
    if not plan.chunk_boundaries:
        raise EmptyInput("empty chunk plan")
    x = as_values(data)
    if plan.size != x.size:
        raise ValueError(f"plan covers {plan.size} values but data has {x.size}")
    chunks = [x[lo:hi] for lo, hi in plan.chunk_boundaries]

    own = executor is None
    pool = ThreadPoolExecutor(max_workers=plan.workers) if own else executor
    try:
        def run(fn, *args):
            return list(pool.map(lambda c: fn(c, *args), chunks))

        if algorithm == TWO_PASS:
            mean = _fold_sums(run(K.sum_kernel, compensated), compensated) / x.size
            s = _fold_sums(run(K.sq_dev_kernel, mean, compensated), compensated)
            return finish(int(x.size), mean, s)

        if algorithm in (TEXTBOOK, SHIFTED):
            shift = 0.0
            if algorithm == SHIFTED:
                shift = resolve_shift(shift_policy or PrefixMean(), x)
            parts = run(K.moments_kernel, shift, compensated)
            state = None
            for c, (s, sc, q, qc) in zip(chunks, parts):
                part = MomentState(int(c.size), s, q, sc, qc, shift)
                state = part if state is None else moment_merge(state, part, compensated)
            r = moment_finalize(state, clamp_negative)
            if algorithm == SHIFTED:
                return VarianceResult(r.count, r.mean, r.sum_sq_dev, r.sample_variance, r.negative_clamped)
            return r

        if algorithm == PAIRWISE:
            acc = PairState()
            for n, t, s in run(K.pairwise_kernel, base_block):
                acc = pair_merge(acc, PairState(int(n), t, s))
            return finish(acc.count, acc.total / acc.count, acc.s)

        code = INNER_CODES[canonical_algorithm(inner)]
        if group_size is None:
            parts = list(pool.map(lambda c: K.group_stats_kernel(c, c.size, code), chunks))
        else:
            parts = run(K.group_stats_kernel, group_size, code)
        return total_variance_arrays(
            np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]),
            np.concatenate([p[2] for p in parts]),
        )
    finally:
        if own:
            pool.shutdown()
