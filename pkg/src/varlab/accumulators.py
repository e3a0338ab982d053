"""Variance representations as mergeable accumulator states.

Two layers live here. The state recurrences (``pair_merge``,
``updating_yc_push``, ``updating_wwh_push``, ``total_variance``, ...) are plain
Python and accept either floats or :class:`fractions.Fraction`, so the exact
oracle can drive the very same code. The batch entry points (``two_pass``,
``textbook_one_pass``, ...) run the compiled kernels over a float64 array and
are bit-identical to feeding the recurrences one value at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from . import _kernels as K
from .errors import EmptyInput, InsufficientData, NonFiniteValue

Number = Union[float, Fraction]

TWO_PASS = "two-pass"
TEXTBOOK = "textbook"
SHIFTED = "shifted"
PAIRWISE = "pairwise"
UPDATING_YC = "updating-yc"
UPDATING_WWH = "updating-wwh"
TOTAL_VARIANCE = "total-variance"

ALGORITHMS = (TWO_PASS, TEXTBOOK, SHIFTED, PAIRWISE, UPDATING_YC, UPDATING_WWH, TOTAL_VARIANCE)
ALIASES = {"updating": UPDATING_WWH, "textbook-one-pass": TEXTBOOK, "shifted-one-pass": SHIFTED}

INNER_CODES = {
    UPDATING_WWH: K.INNER_WWH,
    TWO_PASS: K.INNER_TWO_PASS,
    UPDATING_YC: K.INNER_YC,
    TEXTBOOK: K.INNER_TEXTBOOK,
    PAIRWISE: K.INNER_PAIRWISE,
}

DEFAULT_BASE_BLOCK = 128
DEFAULT_GROUP_SIZE = 10


def canonical_algorithm(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")
    return name


# --------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class VarianceResult:
    count: int
    mean: float
    sum_sq_dev: float
    sample_variance: float
    negative_clamped: bool = False
    # textbook only: S1 = sum of squares, S2 = (sum)^2 / N
    s1: float | None = None
    s2: float | None = None


@dataclass(frozen=True)
class MomentState:
    count: int = 0
    sum: float = 0.0
    sum_sq: float = 0.0
    sum_comp: float = 0.0
    sum_sq_comp: float = 0.0
    shift: float = 0.0


@dataclass(frozen=True)
class PairState:
    count: int = 0
    total: Number = 0.0
    s: Number = 0.0


@dataclass(frozen=True)
class WelfordState:
    count: int = 0
    mean: Number = 0.0
    s: Number = 0.0


@dataclass(frozen=True)
class GroupSummary:
    n: int
    mean: Number
    variance: Number

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("group count must be positive")


@dataclass
class PairwiseStreamState:
    """Binary-counter layout of pairwise blocks.

    ``levels[k]`` holds the merged state of ``2**k * base_block`` values.
    Values of the incomplete block wait in ``tail`` until it fills; they are
    reduced to a leaf state with the Welford recurrence, exactly as the batch
    kernel does.
    """

    base_block: int = DEFAULT_BASE_BLOCK
    levels: list[PairState | None] = field(default_factory=list)
    tail: list[float] = field(default_factory=list)

    @property
    def count(self) -> int:
        full = sum(lv.count for lv in self.levels if lv is not None)
        return full + len(self.tail)


@dataclass(frozen=True)
class FirstElement:
    pass


@dataclass(frozen=True)
class PrefixMean:
    k: int = 1000


@dataclass(frozen=True)
class Explicit:
    value: float


ShiftPolicy = Union[FirstElement, PrefixMean, Explicit]


# --------------------------------------------------------------------------
# helpers


def as_values(data, *, minimum: int = 2) -> np.ndarray:
    """Validate ``data`` and return it as a contiguous float64 array."""
    x = np.ascontiguousarray(data, dtype=np.float64)
    if x.ndim != 1:
        x = x.ravel()
    if x.size == 0:
        raise EmptyInput("no data")
    if not np.isfinite(x).all():
        raise NonFiniteValue("data contains NaN or infinity")
    if x.size < minimum:
        raise InsufficientData(f"need at least {minimum} values, got {x.size}")
    return x


def _check_value(x: Number) -> None:
    if not math.isfinite(x):
        raise NonFiniteValue(f"non-finite value {x!r}")


def _ratio(p: int, q: int, like: Number) -> Number:
    return Fraction(p, q) if isinstance(like, Fraction) else p / q


def finish(count: int, mean: float, s: float, clamp_negative: bool = False, **extra) -> VarianceResult:
    if count == 0:
        raise EmptyInput("no data")
    if count == 1:
        raise InsufficientData("variance needs at least two values")
    if s < 0 and clamp_negative:
        return VarianceResult(count, mean, s, 0.0, True, **extra)
    return VarianceResult(count, mean, s, s / (count - 1), False, **extra)


def compensated_add(total: float, carry: float, x: float) -> tuple[float, float]:
    """One compensated-summation step; the running value is ``total + carry``."""
    t = total + x
    if abs(total) >= abs(x):
        carry += (total - t) + x
    else:
        carry += (x - t) + total
    return t, carry


# --------------------------------------------------------------------------
# moment-based algorithms


def moment_state(data, shift: float = 0.0, compensated: bool = False) -> MomentState:
    x = as_values(data, minimum=1)
    s, sc, q, qc = K.moments_kernel(x, float(shift), compensated)
    return MomentState(int(x.size), s, q, sc, qc, float(shift))


def moment_push(state: MomentState, x: float, compensated: bool = False) -> MomentState:
    _check_value(x)
    d = x - state.shift
    if compensated:
        s, sc = compensated_add(state.sum, state.sum_comp, d)
        q, qc = compensated_add(state.sum_sq, state.sum_sq_comp, d * d)
    else:
        s, sc = state.sum + d, 0.0
        q, qc = state.sum_sq + d * d, 0.0
    return MomentState(state.count + 1, s, q, sc, qc, state.shift)


def moment_merge(a: MomentState, b: MomentState, compensated: bool = False) -> MomentState:
    if a.shift != b.shift:
        raise ValueError("cannot merge moment states with different shifts")
    if b.count == 0:
        return a
    if a.count == 0:
        return b
    if compensated:
        s, sc = compensated_add(a.sum, a.sum_comp + b.sum_comp, b.sum)
        q, qc = compensated_add(a.sum_sq, a.sum_sq_comp + b.sum_sq_comp, b.sum_sq)
    else:
        s, sc = a.sum + b.sum, 0.0
        q, qc = a.sum_sq + b.sum_sq, 0.0
    return MomentState(a.count + b.count, s, q, sc, qc, a.shift)


def moment_finalize(state: MomentState, clamp_negative: bool = False) -> VarianceResult:
    n = state.count
    if n == 0:
        raise EmptyInput("no data")
    total = state.sum + state.sum_comp
    s1 = state.sum_sq + state.sum_sq_comp
    s2 = total * total / n
    mean = state.shift + total / n
    return finish(n, mean, s1 - s2, clamp_negative, s1=s1, s2=s2)


def textbook_one_pass(data, clamp_negative: bool = False, compensated: bool = False) -> VarianceResult:
    """S = sum(x^2) - (sum x)^2 / N in one scan; exposes both terms as s1, s2."""
    return moment_finalize(moment_state(as_values(data), 0.0, compensated), clamp_negative)


def resolve_shift(policy: ShiftPolicy, x: np.ndarray) -> float:
    if isinstance(policy, FirstElement):
        return float(x[0])
    if isinstance(policy, PrefixMean):
        if policy.k < 1:
            raise ValueError("prefix length must be positive")
        head = x[: policy.k]
        s, _ = K.sum_kernel(head, False)
        return s / head.size
    if isinstance(policy, Explicit):
        _check_value(policy.value)
        return float(policy.value)
    raise TypeError(f"unknown shift policy {policy!r}")


def shifted_one_pass(
    data, shift_policy: ShiftPolicy | None = None, compensated: bool = False, clamp_negative: bool = False
) -> VarianceResult:
    x = as_values(data)
    s = resolve_shift(shift_policy or PrefixMean(), x)
    r = moment_finalize(moment_state(x, s, compensated), clamp_negative)
    return VarianceResult(r.count, r.mean, r.sum_sq_dev, r.sample_variance, r.negative_clamped)


# --------------------------------------------------------------------------
# two pass


def two_pass(data, compensated: bool = False) -> VarianceResult:
    x = as_values(data)
    s, c = K.sum_kernel(x, compensated)
    mean = (s + c) / x.size
    q, qc = K.sq_dev_kernel(x, mean, compensated)
    return finish(int(x.size), mean, q + qc)


# --------------------------------------------------------------------------
# updating formulas


def pair_state_from_value(x: Number) -> PairState:
    _check_value(x)
    return PairState(1, x, 0.0 if not isinstance(x, Fraction) else Fraction(0))


def pair_merge(a: PairState, b: PairState) -> PairState:
    """Combine two segment states (Chan, Golub and LeVeque)."""
    m, n = a.count, b.count
    if m == 0:
        return b
    if n == 0:
        return a
    d = _ratio(n, m, a.total) * a.total - b.total
    s = a.s + b.s + _ratio(m, n * (m + n), a.total) * (d * d)
    return PairState(m + n, a.total + b.total, s)


def updating_yc_push(state: PairState, x: Number) -> PairState:
    _check_value(x)
    j = state.count + 1
    t = state.total + x
    if j < 2:
        return PairState(j, t, state.s)
    r = j * x - t
    return PairState(j, t, state.s + r * r / (j * (j - 1)))


def updating_wwh_push(state: WelfordState, x: Number) -> WelfordState:
    _check_value(x)
    j = state.count + 1
    d = x - state.mean
    return WelfordState(j, state.mean + d / j, state.s + (j - 1) * d * (d / j))


def updating_yc(data) -> VarianceResult:
    n, t, s = K.yc_kernel(as_values(data))
    return finish(int(n), t / n, s)


def updating_wwh(data) -> VarianceResult:
    n, m, s = K.wwh_kernel(as_values(data))
    return finish(int(n), m, s)


# --------------------------------------------------------------------------
# pairwise updating


def _leaf(values: Sequence[float]) -> PairState:
    t = 0.0
    w = WelfordState()
    for v in values:
        t += v
        w = updating_wwh_push(w, v)
    return PairState(w.count, t, w.s)


def pairwise_stream_push(state: PairwiseStreamState, x: float) -> PairwiseStreamState:
    """Append ``x``; a full tail becomes a level-0 block and carries upward.

    Mutates and returns ``state``.
    """
    _check_value(x)
    state.tail.append(float(x))
    if len(state.tail) < state.base_block:
        return state
    carry = _leaf(state.tail)
    state.tail = []
    levels = state.levels
    k = 0
    while k < len(levels) and levels[k] is not None:
        carry = pair_merge(levels[k], carry)
        levels[k] = None
        k += 1
    if k == len(levels):
        levels.append(carry)
    else:
        levels[k] = carry
    return state


def pairwise_drain(state: PairwiseStreamState) -> PairState:
    acc = _leaf(state.tail)
    for lv in state.levels:
        if lv is not None:
            acc = pair_merge(lv, acc)
    return acc


def pairwise_finalize(state: PairwiseStreamState) -> VarianceResult:
    p = pairwise_drain(state)
    if p.count == 0:
        raise EmptyInput("no data")
    return finish(p.count, p.total / p.count, p.s)


def pairwise_pair_state(data, base_block: int = DEFAULT_BASE_BLOCK) -> PairState:
    if base_block < 1:
        raise ValueError("base_block must be positive")
    n, t, s = K.pairwise_kernel(as_values(data, minimum=1), base_block)
    return PairState(int(n), t, s)


def pairwise(data, base_block: int = DEFAULT_BASE_BLOCK) -> VarianceResult:
    p = pairwise_pair_state(as_values(data), base_block)
    return finish(p.count, p.total / p.count, p.s)


# --------------------------------------------------------------------------
# total variance


def group_summarize(data, inner: str = UPDATING_WWH) -> GroupSummary:
    x = as_values(data, minimum=1)
    ns, ms, vs = K.group_stats_kernel(x, x.size, INNER_CODES[canonical_algorithm(inner)])
    return GroupSummary(int(ns[0]), float(ms[0]), float(vs[0]))


def group_summaries(data, group_size: int = DEFAULT_GROUP_SIZE, inner: str = UPDATING_WWH):
    """Per-group (n, mean, variance) arrays over consecutive groups of ``group_size``."""
    if group_size < 1:
        raise ValueError("group_size must be positive")
    x = as_values(data, minimum=1)
    return K.group_stats_kernel(x, group_size, INNER_CODES[canonical_algorithm(inner)])


def total_variance(groups: Sequence[GroupSummary]) -> VarianceResult:
    """Combine group summaries: S = sum n_i (m_i - xbar)^2 + sum (n_i - 1) v_i."""
    if not groups:
        raise EmptyInput("no groups")
    zero = type(groups[0].mean)(0)
    total = 0
    weighted = zero
    for g in groups:
        total += g.n
        weighted += g.n * g.mean
    mean = weighted / total
    between = zero
    within = zero
    for g in groups:
        d = g.mean - mean
        between += g.n * (d * d)
        within += (g.n - 1) * g.variance
    return finish(total, mean, between + within)


def total_variance_arrays(ns, ms, vs) -> VarianceResult:
    if len(ns) == 0:
        raise EmptyInput("no groups")
    n, mean, s = K.total_variance_kernel(
        np.ascontiguousarray(ns, dtype=np.int64),
        np.ascontiguousarray(ms, dtype=np.float64),
        np.ascontiguousarray(vs, dtype=np.float64),
    )
    return finish(int(n), mean, s)


def grouped_total_variance(
    data, group_size: int = DEFAULT_GROUP_SIZE, inner: str = UPDATING_WWH
) -> VarianceResult:
    x = as_values(data)
    return total_variance_arrays(*group_summaries(x, group_size, inner))


# --------------------------------------------------------------------------
# dispatch


def variance(
    data,
    algorithm: str = TWO_PASS,
    *,
    clamp_negative: bool = False,
    compensated: bool = False,
    shift_policy: ShiftPolicy | None = None,
    group_size: int = DEFAULT_GROUP_SIZE,
    inner: str = UPDATING_WWH,
    base_block: int = DEFAULT_BASE_BLOCK,
) -> VarianceResult:
    """Run one of :data:`ALGORITHMS` over ``data``."""
    algorithm = canonical_algorithm(algorithm)
    if compensated and algorithm not in (TWO_PASS, TEXTBOOK, SHIFTED):
        raise ValueError(f"compensated summation is not available for {algorithm}")
    if algorithm == TWO_PASS:
        return two_pass(data, compensated)
    if algorithm == TEXTBOOK:
        return textbook_one_pass(data, clamp_negative, compensated)
    if algorithm == SHIFTED:
        return shifted_one_pass(data, shift_policy, compensated, clamp_negative)
    if algorithm == PAIRWISE:
        return pairwise(data, base_block)
    if algorithm == UPDATING_YC:
        return updating_yc(data)
    if algorithm == UPDATING_WWH:
        return updating_wwh(data)
    return grouped_total_variance(data, group_size, inner)
