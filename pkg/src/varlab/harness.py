"""Synthetic datasets and the precision / timing experiment drivers.

Datasets are Uniform[0, 1) draws, optionally shifted by ``10**e``. Each
experiment returns plain record dataclasses; ``write_csv`` turns them into
self-describing CSV files (metadata in ``#`` comment lines, then a header).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import statistics
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .accumulators import (
    ALGORITHMS,
    DEFAULT_GROUP_SIZE,
    TOTAL_VARIANCE,
    TWO_PASS,
    TEXTBOOK,
    UPDATING_WWH,
    UPDATING_YC,
    canonical_algorithm,
    variance,
)
from .errors import NegativeVariance, UnsupportedParallelAlgorithm
from .inference import summarize, t_quantile
from .oracle import correct_digits, exact_variance, render
from .parallel import parallel_variance, plan_chunks

PRNG_ID = "numpy.random.PCG64(seed).random_raw; u = (raw >> 11) * 2**-53"
DISTRIBUTION = "uniform01"
SEQUENTIAL_ONLY = (UPDATING_WWH, UPDATING_YC)

DEFAULT_SHIFTS = tuple(range(1, 16))
DEFAULT_SIZES = tuple(10**k for k in range(1, 8))
DEFAULT_GROUP_SIZES = (2, 10, 100, 1000)
DEFAULT_REPETITIONS = 10


@dataclass(frozen=True)
class DatasetSpec:
    size: int
    shift_exponent: int | None = None
    seed: int = 0
    distribution: str = DISTRIBUTION

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("dataset size must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.distribution != DISTRIBUTION:
            raise ValueError(f"unsupported distribution {self.distribution!r}")


def shift_value(exponent: int) -> float:
    return float(10**exponent)


def generate(spec: DatasetSpec) -> np.ndarray:
    """Deterministic dataset for ``spec``; the same spec always yields the same bytes."""
    raw = np.random.PCG64(spec.seed).random_raw(spec.size)
    x = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53
    if spec.shift_exponent is not None:
        x = x + shift_value(spec.shift_exponent)
    return x


def seeds_for(seed: int, repetitions: int) -> list[int]:
    return [(seed + r) % 2**64 for r in range(repetitions)]


# --------------------------------------------------------------------------
# precision experiments


@dataclass(frozen=True)
class PrecisionRecord:
    algorithm: str
    size: int
    shift_exponent: int | None
    seed: int
    distribution: str
    group_size: int | None
    computed_variance: float
    oracle_variance: str
    digits: float


def _records_for(spec: DatasetSpec, algorithms: Sequence[str], group_size: int, **opts) -> list[PrecisionRecord]:
    x = generate(spec)
    truth = exact_variance(x)
    truth_s = render(truth)
    out = []
    for algo in algorithms:
        gs = group_size if algo == TOTAL_VARIANCE else None
        r = variance(x, algo, group_size=group_size, **opts)
        out.append(
            PrecisionRecord(
                algo, spec.size, spec.shift_exponent, spec.seed, spec.distribution, gs,
                r.sample_variance, truth_s, correct_digits(r.sample_variance, truth).digits,
            )
        )
    return out


def _algorithms(algorithms: Iterable[str] | None) -> list[str]:
    algos = [canonical_algorithm(a) for a in (ALGORITHMS if algorithms is None else algorithms)]
    if not algos:
        raise ValueError("no algorithms given")
    return algos


def shift_sweep(
    size: int = 10_000,
    exponents: Sequence[int | None] = DEFAULT_SHIFTS,
    algorithms: Iterable[str] | None = None,
    seed: int = 0,
    repetitions: int = DEFAULT_REPETITIONS,
    group_size: int = DEFAULT_GROUP_SIZE,
) -> list[PrecisionRecord]:
    """Digits per algorithm as the additive shift grows (one row per seed)."""
    if size < 2:
        raise ValueError("size must be at least 2")
    algos = _algorithms(algorithms)
    out = []
    for e in exponents:
        for s in seeds_for(seed, repetitions):
            out += _records_for(DatasetSpec(size, e, s), algos, group_size)
    return out


def size_sweep(
    sizes: Sequence[int] = DEFAULT_SIZES,
    shift_exponent: int | None = 5,
    algorithms: Iterable[str] | None = None,
    seed: int = 0,
    repetitions: int = DEFAULT_REPETITIONS,
    group_size: int = DEFAULT_GROUP_SIZE,
) -> list[PrecisionRecord]:
    algos = _algorithms(algorithms)
    out = []
    for n in sizes:
        if n < 2:
            raise ValueError("sizes must be at least 2")
        for s in seeds_for(seed, repetitions):
            out += _records_for(DatasetSpec(n, shift_exponent, s), algos, group_size)
    return out


def group_size_sweep(
    size: int = 100_000,
    shift_exponent: int | None = 5,
    group_sizes: Sequence[int] = DEFAULT_GROUP_SIZES,
    seed: int = 0,
    repetitions: int = DEFAULT_REPETITIONS,
    inner: str = UPDATING_WWH,
) -> list[PrecisionRecord]:
    """Total Variance digits per group size (the last group may be short)."""
    for g in group_sizes:
        if not 1 <= g <= size:
            raise ValueError(f"group size {g} outside [1, {size}]")
    out = []
    for s in seeds_for(seed, repetitions):
        spec = DatasetSpec(size, shift_exponent, s)
        x = generate(spec)
        truth = exact_variance(x)
        truth_s = render(truth)
        for g in group_sizes:
            r = variance(x, TOTAL_VARIANCE, group_size=g, inner=inner)
            out.append(
                PrecisionRecord(
                    TOTAL_VARIANCE, size, shift_exponent, s, spec.distribution, g,
                    r.sample_variance, truth_s, correct_digits(r.sample_variance, truth).digits,
                )
            )
    return out


@dataclass(frozen=True)
class DigitSummary:
    algorithm: str
    size: int
    shift_exponent: int | None
    group_size: int | None
    repetitions: int
    mean_digits: float
    min_digits: float
    max_digits: float


def average_digits(records: Iterable[PrecisionRecord]) -> list[DigitSummary]:
    """Arithmetic mean of digit scores over seeds, in first-seen order."""
    cells: dict[tuple, list[float]] = defaultdict(list)
    for r in records:
        cells[(r.algorithm, r.size, r.shift_exponent, r.group_size)].append(r.digits)
    return [
        DigitSummary(*key, len(d), math.fsum(d) / len(d), min(d), max(d))
        for key, d in cells.items()
    ]


def digits_table(records: Iterable[PrecisionRecord], axis: str = "shift_exponent") -> dict[str, dict]:
    """{algorithm: {axis value: mean digits}} for quick comparisons."""
    table: dict[str, dict] = defaultdict(dict)
    for s in average_digits(records):
        table[s.algorithm][getattr(s, axis)] = s.mean_digits
    return dict(table)


# --------------------------------------------------------------------------
# silent failure scan


@dataclass(frozen=True)
class WidthComparison:
    seed: int
    reference_width: float
    candidate_width: float | None
    candidate_variance: float

    @property
    def ratio(self) -> float | None:
        if self.candidate_width is None or self.reference_width == 0:
            return None
        return self.candidate_width / self.reference_width


def interval_widths(
    size: int = 100,
    shift_exponent: int = 12,
    seeds: Sequence[int] = tuple(range(10)),
    candidate: str = TEXTBOOK,
    reference: str = TWO_PASS,
    alpha: float = 0.05,
) -> list[WidthComparison]:
    """Acceptance-interval width (2 t s / sqrt(n)) from two algorithms on the same data.

    A negative candidate variance has no interval; its width is reported as None.
    """
    crit = t_quantile(alpha, size - 1)
    out = []
    for s in seeds:
        x = generate(DatasetSpec(size, shift_exponent, s))
        ref = summarize(variance(x, reference))
        cand_r = variance(x, candidate)
        try:
            cand = 2 * crit * summarize(cand_r).stderr
        except NegativeVariance:
            cand = None
        out.append(WidthComparison(s, 2 * crit * ref.stderr, cand, cand_r.sample_variance))
    return out


# --------------------------------------------------------------------------
# timing


@dataclass(frozen=True)
class TimingRecord:
    algorithm: str
    size: int
    threads: int
    repetitions: int
    mean_wall_seconds: float
    stddev_wall_seconds: float


def timing_sweep(
    sizes: Sequence[int] = (10**6, 10**7),
    algorithms: Iterable[str] | None = None,
    threads: Sequence[int] = (1,),
    repetitions: int = DEFAULT_REPETITIONS,
    seed: int = 0,
    group_size: int = DEFAULT_GROUP_SIZE,
) -> list[TimingRecord]:
    """Wall-clock timings; datasets are generated before any timer starts.

    Sequential-only algorithms are timed once on a single thread even when
    larger thread counts are requested.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    algos = _algorithms(algorithms)
    datasets = {n: generate(DatasetSpec(n, None, seed)) for n in sizes}
    out = []
    for n, x in datasets.items():
        for algo in algos:
            counts = sorted({1 if algo in SEQUENTIAL_ONLY else t for t in threads})
            for t in counts:
                pool = None
                if t == 1:
                    run = partial(variance, x, algo, group_size=group_size)
                else:
                    pool = ThreadPoolExecutor(max_workers=t)
                    run = partial(
                        parallel_variance, x, algo, plan_chunks(n, t), group_size=group_size, executor=pool
                    )
                run()  # warm-up, also triggers compilation
                wall = []
                for _ in range(repetitions):
                    t0 = time.perf_counter()
                    run()
                    wall.append(time.perf_counter() - t0)
                if pool is not None:
                    pool.shutdown()
                sd = statistics.stdev(wall) if len(wall) > 1 else 0.0
                out.append(TimingRecord(algo, n, t, repetitions, statistics.fmean(wall), sd))
    return out


def check_parallel_support(algorithms: Iterable[str], threads: Iterable[int]) -> None:
    if max(threads, default=1) > 1:
        bad = [a for a in algorithms if canonical_algorithm(a) in SEQUENTIAL_ONLY]
        if bad:
            raise UnsupportedParallelAlgorithm(
                f"{', '.join(bad)} folds in one value at a time and cannot be parallelized; "
                "run it with --threads 1"
            )


def timing_ordering(records: Iterable[TimingRecord], size: int) -> dict[str, bool]:
    """Informational checks of the single-thread speed ordering at ``size``."""
    t = {r.algorithm: r.mean_wall_seconds for r in records if r.size == size and r.threads == 1}
    checks = {}
    if TWO_PASS in t:
        for other in (UPDATING_WWH, "pairwise", TOTAL_VARIANCE):
            if other in t:
                checks[f"two-pass faster than {other}"] = t[TWO_PASS] <= t[other]
    if TEXTBOOK in t and len(t) > 1:
        checks["textbook fastest"] = t[TEXTBOOK] <= min(t.values())
    return checks


# --------------------------------------------------------------------------
# CSV


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def metadata_lines(extra: dict | None = None) -> list[str]:
    lines = [
        f"varlab {__version__}",
        f"prng: {PRNG_ID}",
        f"numpy: {np.__version__}",
    ]
    for k, v in (extra or {}).items():
        lines.append(f"{k}: {v if isinstance(v, str) else json.dumps(v)}")
    return lines


def to_csv(records: Sequence, metadata: dict | None = None, record_type=None) -> str:
    record_type = record_type or type(records[0])
    names = [f.name for f in dataclasses.fields(record_type)]
    buf = io.StringIO()
    for line in metadata_lines(metadata):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in records:
        w.writerow([format_cell(getattr(r, n)) for n in names])
    return buf.getvalue()


def write_csv(path, records: Sequence, metadata: dict | None = None, record_type=None) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(to_csv(records, metadata, record_type))


def read_metadata(path) -> dict[str, str]:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = value
    return meta


def read_records(path) -> list[dict[str, str]]:
    with open(path) as fh:
        body = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(body))
