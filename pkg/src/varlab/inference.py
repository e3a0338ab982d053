"""Statistics downstream of the variance: spread measures, intervals, t-tests.

Nothing here clamps a negative variance. A negative value is raised as
:class:`NegativeVariance` so the cancellation upstream stays visible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError, InsufficientData, NegativeVariance, ZeroMean

_CF_EPS = 1e-16
_CF_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    max_iter = 1000 + int(20 * math.sqrt(max(a, b)))
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if not 0.0 <= x <= 1.0:
        raise DomainError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_tailed_p(t: float, df: float) -> float:
    """P(|T| > t) for Student's t with ``df`` degrees of freedom."""
    t = abs(t)
    if math.isinf(df):
        return math.erfc(t / math.sqrt(2.0))
    return betainc_regularized(df / 2.0, 0.5, df / (df + t * t))


def _t_pdf(t: float, df: float) -> float:
    if math.isinf(df):
        return math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)
    log_c = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(log_c - (df + 1) / 2 * math.log1p(t * t / df))


def t_quantile(alpha: float, df: float) -> float:
    """Two-tailed critical value t with P(|T_df| > t) = alpha.

    Bisection on the tail probability, then guarded Newton polishing.
    ``df`` may be ``math.inf`` for the normal limit.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if not df >= 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {df}")
    if alpha == 1.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while t_two_tailed_p(hi, df) > alpha:
        lo, hi = hi, hi * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if t_two_tailed_p(mid, df) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    t = 0.5 * (lo + hi)
    for _ in range(3):
        slope = -2.0 * _t_pdf(t, df)
        if slope == 0.0:
            break
        step = t - (t_two_tailed_p(t, df) - alpha) / slope
        if not lo <= step <= hi:
            break
        t = step
    return t


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    variance: float
    stddev: float
    stderr: float


def summarize(result, mean: float | None = None, n: int | None = None) -> SummaryStats:
    """Stddev and standard error from a VarianceResult (or a bare variance)."""
    if hasattr(result, "sample_variance"):
        var = result.sample_variance
        mean = result.mean if mean is None else mean
        n = result.count if n is None else n
    else:
        var = float(result)
    if n is None or mean is None:
        raise TypeError("mean and n are required with a bare variance")
    if n < 2:
        raise InsufficientData("need at least two observations")
    if var < 0 or math.isnan(var):
        raise NegativeVariance(f"variance {var!r} is negative; upstream cancellation")
    sd = math.sqrt(var)
    return SummaryStats(n, mean, var, sd, sd / math.sqrt(n))


def linear_transform_variance(a: float, b: float, variance: float) -> float:
    """Variance of a * X + b given Var(X)."""
    if variance < 0:
        raise NegativeVariance(f"variance {variance!r} is negative")
    return a * a * variance


def coefficient_of_variation(stats: SummaryStats) -> float:
    if stats.mean == 0:
        raise ZeroMean("coefficient of variation undefined for zero mean")
    return stats.stddev / stats.mean


def confidence_half_width(stats: SummaryStats, alpha: float = 0.05) -> float:
    return t_quantile(alpha, stats.n - 1) * stats.stderr


class FailureMode(enum.Enum):
    NONE = "none"
    LOUD_ZERO_STDDEV = "loud-zero-stddev"


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    critical_value: float
    reject: bool
    acceptance_interval: tuple[float, float]
    failure_mode: FailureMode = FailureMode.NONE
    half_width: float = 0.0

    @property
    def width(self) -> float:
        return 2 * self.half_width


def one_sample_ttest(stats: SummaryStats, mu0: float, alpha: float = 0.05) -> TTestResult:
    """Two-tailed one-sample t-test of H0: mu = mu0.

    A zero standard error with mean != mu0 is the loud failure: the statistic
    is unbounded and the test reports an error state instead of a decision.
    """
    crit = t_quantile(alpha, stats.n - 1)
    half = crit * stats.stderr
    interval = (stats.mean - half, stats.mean + half)
    diff = stats.mean - mu0
    if stats.stderr == 0:
        if diff != 0:
            return TTestResult(
                math.copysign(math.inf, diff), crit, False, interval, FailureMode.LOUD_ZERO_STDDEV, half
            )
        return TTestResult(0.0, crit, False, interval, FailureMode.NONE, half)
    t = diff / stats.stderr
    return TTestResult(t, crit, abs(t) > crit, interval, FailureMode.NONE, half)
