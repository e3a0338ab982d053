"""Compiled inner loops.

Recurrence loops run strictly left to right with no reassociation (numba's
default, fast-math off), so results are bit-identical to the pure-Python
recurrences in ``accumulators``. Plain sums use a fixed cascade instead:
leaves of ``SUM_LEAF`` values summed in order, then combined through a binary
counter. The order depends only on the length, never on the platform.
Kernels release the GIL so the parallel module can run them on worker threads.
"""

import numpy as np
from numba import njit

_jit = njit(cache=True, nogil=True)

MAX_LEVELS = 64
SUM_LEAF = 128

INNER_WWH = 0
INNER_TWO_PASS = 1
INNER_YC = 2
INNER_TEXTBOOK = 3
INNER_PAIRWISE = 4


@_jit
def comp_add(s, c, x):
    # Kahan-Babuska step; the compensated value is s + c.
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c


@_jit
def cascade_sum(x, center, square):
    """Sum of x (or of (x - center)^2) with O(log n) error growth."""
    levels = np.zeros(MAX_LEVELS)
    filled = np.zeros(MAX_LEVELS, dtype=np.bool_)
    n = x.shape[0]
    acc = 0.0
    for lo in range(0, n, SUM_LEAF):
        leaf = 0.0
        for i in range(lo, min(lo + SUM_LEAF, n)):
            if square:
                d = x[i] - center
                leaf += d * d
            else:
                leaf += x[i]
        if lo + SUM_LEAF >= n:
            acc = leaf
            break
        k = 0
        while filled[k]:
            leaf = levels[k] + leaf
            filled[k] = False
            k += 1
        levels[k] = leaf
        filled[k] = True
    for k in range(MAX_LEVELS):
        if filled[k]:
            acc = levels[k] + acc
    return acc


@_jit
def sum_kernel(x, compensated):
    s = 0.0
    c = 0.0
    if compensated:
        for i in range(x.shape[0]):
            s, c = comp_add(s, c, x[i])
    else:
        s = cascade_sum(x, 0.0, False)
    return s, c


@_jit
def sq_dev_kernel(x, center, compensated):
    s = 0.0
    c = 0.0
    if compensated:
        for i in range(x.shape[0]):
            d = x[i] - center
            s, c = comp_add(s, c, d * d)
    else:
        s = cascade_sum(x, center, True)
    return s, c


@_jit
def moments_kernel(x, shift, compensated):
    s = 0.0
    sc = 0.0
    q = 0.0
    qc = 0.0
    if compensated:
        for i in range(x.shape[0]):
            d = x[i] - shift
            s, sc = comp_add(s, sc, d)
            q, qc = comp_add(q, qc, d * d)
    else:
        for i in range(x.shape[0]):
            d = x[i] - shift
            s += d
            q += d * d
    return s, sc, q, qc


@_jit
def yc_kernel(x):
    t = 0.0
    s = 0.0
    for i in range(x.shape[0]):
        j = i + 1
        t += x[i]
        if j >= 2:
            r = j * x[i] - t
            s += r * r / (j * (j - 1))
    return x.shape[0], t, s


@_jit
def wwh_kernel(x):
    m = 0.0
    s = 0.0
    for i in range(x.shape[0]):
        j = i + 1
        d = x[i] - m
        m += d / j
        s += (j - 1) * d * (d / j)
    return x.shape[0], m, s


@_jit
def leaf_kernel(x):
    # Welford for S, plain running total for T.
    t = 0.0
    m = 0.0
    s = 0.0
    for i in range(x.shape[0]):
        j = i + 1
        t += x[i]
        d = x[i] - m
        m += d / j
        s += (j - 1) * d * (d / j)
    return x.shape[0], t, s


@_jit
def pair_merge_kernel(m, ta, sa, n, tb, sb):
    if m == 0:
        return n, tb, sb
    if n == 0:
        return m, ta, sa
    d = (n / m) * ta - tb
    s = sa + sb + (m / (n * (m + n))) * (d * d)
    return m + n, ta + tb, s


@_jit
def pairwise_kernel(x, base_block):
    lc = np.zeros(MAX_LEVELS, dtype=np.int64)
    lt = np.zeros(MAX_LEVELS, dtype=np.float64)
    ls = np.zeros(MAX_LEVELS, dtype=np.float64)
    occupied = np.zeros(MAX_LEVELS, dtype=np.bool_)
    n = x.shape[0]
    full = n - n % base_block
    for start in range(0, full, base_block):
        cc, ct, cs = leaf_kernel(x[start:start + base_block])
        k = 0
        while occupied[k]:
            cc, ct, cs = pair_merge_kernel(lc[k], lt[k], ls[k], cc, ct, cs)
            occupied[k] = False
            k += 1
        lc[k] = cc
        lt[k] = ct
        ls[k] = cs
        occupied[k] = True
    ac, at, as_ = leaf_kernel(x[full:])
    for k in range(MAX_LEVELS):
        if occupied[k]:
            ac, at, as_ = pair_merge_kernel(lc[k], lt[k], ls[k], ac, at, as_)
    return ac, at, as_


@_jit
def _group_stats(x, inner):
    n = x.shape[0]
    if inner == INNER_WWH:
        _, mean, s = wwh_kernel(x)
    elif inner == INNER_TWO_PASS:
        tot, _ = sum_kernel(x, False)
        mean = tot / n
        s, _ = sq_dev_kernel(x, mean, False)
    elif inner == INNER_YC:
        _, tot, s = yc_kernel(x)
        mean = tot / n
    elif inner == INNER_TEXTBOOK:
        tot, _, q, _ = moments_kernel(x, 0.0, False)
        mean = tot / n
        s = q - tot * tot / n
    else:
        _, tot, s = pairwise_kernel(x, 128)
        mean = tot / n
    if n == 1:
        return mean, 0.0
    return mean, s / (n - 1)


@_jit
def group_stats_kernel(x, group_size, inner):
    n = x.shape[0]
    k = (n + group_size - 1) // group_size
    ns = np.empty(k, dtype=np.int64)
    ms = np.empty(k, dtype=np.float64)
    vs = np.empty(k, dtype=np.float64)
    for g in range(k):
        lo = g * group_size
        hi = min(lo + group_size, n)
        ns[g] = hi - lo
        ms[g], vs[g] = _group_stats(x[lo:hi], inner)
    return ns, ms, vs


@_jit
def total_variance_kernel(ns, ms, vs):
    total = 0
    weighted = 0.0
    for i in range(ns.shape[0]):
        total += ns[i]
        weighted += ns[i] * ms[i]
    mean = weighted / total
    between = 0.0
    within = 0.0
    for i in range(ns.shape[0]):
        d = ms[i] - mean
        between += ns[i] * (d * d)
        within += (ns[i] - 1) * vs[i]
    return total, mean, between + within
