"""Exact reference variance, the correct-digits score and the mantissa inspector."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from decimal import Context, Decimal
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .accumulators import GroupSummary, as_values, textbook_one_pass
from .errors import EmptyInput, InsufficientData

MAX_DIGITS = 17.0

_CHUNK = 1 << 20
_LIMB = 18
_MASK = (1 << _LIMB) - 1


def _exact_sums(x: np.ndarray) -> tuple[int, int, int]:
    """Return integers (a, b, e) with sum(x) == a * 2**e and sum(x**2) == b * 2**(2e).

    Every finite double is M * 2**k with |M| < 2**53, so both sums are exact
    integer sums once all values are brought to the smallest exponent present.
    Squares are summed through 18-bit limbs so the int64 partials never
    overflow; the cross-limb recombination happens in Python integers.
    """
    mant, exp = np.frexp(x)
    m = (mant * 2.0**53).astype(np.int64)
    k = exp.astype(np.int64) - 53
    nz = m != 0
    if not nz.any():
        return 0, 0, 0
    m, k = m[nz], k[nz]
    base = int(k.min())
    a = 0
    b = 0
    for ek in np.unique(k):
        sel = m[k == ek]
        shift = int(ek) - base
        ga = 0
        gb = 0
        for lo in range(0, sel.size, _CHUNK):
            part = sel[lo:lo + _CHUNK]
            # signed sum via two nonnegative-safe halves
            ga += (int((part >> 26).sum()) << 26) + int((part & ((1 << 26) - 1)).sum())
            u = np.abs(part)
            p = u >> (2 * _LIMB)
            q = (u >> _LIMB) & _MASK
            r = u & _MASK
            gb += (
                (int((p * p).sum()) << (4 * _LIMB))
                + (int((2 * p * q).sum()) << (3 * _LIMB))
                + (int((q * q + 2 * p * r).sum()) << (2 * _LIMB))
                + (int((2 * q * r).sum()) << _LIMB)
                + int((r * r).sum())
            )
        a += ga << shift
        b += gb << (2 * shift)
    return a, b, base


def _scale(value: Fraction, exponent: int) -> Fraction:
    return value * (1 << exponent) if exponent >= 0 else value / (1 << -exponent)


def exact_sum_sq_dev(data) -> Fraction:
    """Exact S = sum((x - mean)^2) over the stored doubles."""
    x = as_values(data)
    n = int(x.size)
    a, b, e = _exact_sums(x)
    return _scale(Fraction(n * b - a * a, n), 2 * e)


def exact_variance(data) -> Fraction:
    """Exact sample variance S / (N - 1) of the stored binary values."""
    x = as_values(data)
    return exact_sum_sq_dev(x) / (x.size - 1)


def exact_variance_two_pass(values: Iterable[float]) -> Fraction:
    """Slow, independent route: two-pass formula in plain Fractions."""
    xs = [Fraction(v) for v in values]
    if not xs:
        raise EmptyInput("no data")
    if len(xs) < 2:
        raise InsufficientData("variance needs at least two values")
    mean = sum(xs, Fraction(0)) / len(xs)
    return sum(((v - mean) ** 2 for v in xs), Fraction(0)) / (len(xs) - 1)


def exact_group_summary(values: Sequence[float]) -> GroupSummary:
    xs = [Fraction(v) for v in values]
    if not xs:
        raise EmptyInput("empty group")
    n = len(xs)
    mean = sum(xs, Fraction(0)) / n
    if n == 1:
        return GroupSummary(1, mean, Fraction(0))
    return GroupSummary(n, mean, sum(((v - mean) ** 2 for v in xs), Fraction(0)) / (n - 1))


def render(value: Fraction, digits: int = 30) -> str:
    """Decimal rendering with ``digits`` significant digits."""
    ctx = Context(prec=digits)
    d = ctx.divide(Decimal(value.numerator), Decimal(value.denominator))
    return format(d, f".{digits - 1}E")


@dataclass(frozen=True)
class DigitScore:
    digits: float
    relative_error: float


def correct_digits(computed: float, truth: Fraction) -> DigitScore:
    """Number of correct decimal digits of ``computed`` against the exact ``truth``."""
    if not math.isfinite(computed):
        return DigitScore(0.0, math.inf)
    truth = Fraction(truth)
    if truth == 0:
        if computed == 0:
            return DigitScore(MAX_DIGITS, 0.0)
        return DigitScore(0.0, math.inf)
    rel = float(abs(Fraction(computed) - truth) / abs(truth))
    if rel == 0:
        return DigitScore(MAX_DIGITS, 0.0)
    return DigitScore(min(MAX_DIGITS, max(0.0, -math.log10(rel))), rel)


@dataclass(frozen=True)
class MantissaRow:
    shift_exponent: int | None
    s1_mantissa_hex: str
    s2_mantissa_hex: str
    s: float
    variance: float


def mantissa_hex(value: float) -> str:
    """The 52-bit fraction field of a double as 0x-prefixed, 13-digit lowercase hex."""
    bits = struct.unpack(">Q", struct.pack(">d", value))[0]
    return f"0x{bits & ((1 << 52) - 1):013x}"


def mantissa_table(data, shift_exponents: Sequence[int]) -> list[MantissaRow]:
    """Textbook one-pass terms of ``data`` unshifted and shifted by each 10**e."""
    x = as_values(data)
    rows = []
    for e in [None, *shift_exponents]:
        shifted = x if e is None else x + float(10**e)
        r = textbook_one_pass(shifted)
        rows.append(MantissaRow(e, mantissa_hex(r.s1), mantissa_hex(r.s2), r.sum_sq_dev, r.sample_variance))
    return rows
