import math

import numpy as np
import pytest

from varlab.accumulators import ALGORITHMS, total_variance, updating_wwh
from varlab.errors import UnsupportedParallelAlgorithm
from varlab.harness import (
    PRNG_ID,
    DatasetSpec,
    PrecisionRecord,
    TimingRecord,
    average_digits,
    check_parallel_support,
    digits_table,
    generate,
    group_size_sweep,
    interval_widths,
    read_metadata,
    read_records,
    seeds_for,
    shift_sweep,
    size_sweep,
    timing_ordering,
    timing_sweep,
    to_csv,
    write_csv,
)
from varlab.oracle import correct_digits, exact_group_summary, exact_variance, render


def test_generate_deterministic():
    a = generate(DatasetSpec(3, None, 42))
    b = generate(DatasetSpec(3, None, 42))
    assert a.tobytes() == b.tobytes()
    assert generate(DatasetSpec(3, None, 43)).tobytes() != a.tobytes()


def test_generate_prefix_stable():
    # a longer dataset with the same seed extends the shorter one
    assert np.array_equal(generate(DatasetSpec(50, 3, 9))[:20], generate(DatasetSpec(20, 3, 9)))


def test_generate_unit_interval_variance():
    x = generate(DatasetSpec(10_000, None, 0))
    assert x.min() >= 0 and x.max() < 1
    # Var(s^2) for U(0,1) is (mu4 - sigma^4 (n-3)/(n-1)) / n with mu4 = 1/80
    n = x.size
    se = math.sqrt((1 / 80 - (1 / 144) * (n - 3) / (n - 1)) / n)
    assert abs(x.var(ddof=1) - 1 / 12) < 3 * se


def test_generate_shifted_range():
    x = generate(DatasetSpec(5000, 8, 5))
    assert x.min() >= 1e8 and x.max() < 1e8 + 1


def test_generate_grid():
    # values are k * 2^-53 exactly
    x = generate(DatasetSpec(100, None, 1))
    assert np.all(x * 2.0**53 == np.floor(x * 2.0**53))


@pytest.mark.parametrize("kw", [dict(size=0), dict(size=5, seed=-1), dict(size=5, seed=2**64), dict(size=5, distribution="normal")])
def test_spec_rejects(kw):
    with pytest.raises(ValueError):
        DatasetSpec(**kw)


def test_seeds_for():
    assert seeds_for(5, 3) == [5, 6, 7]
    assert seeds_for(2**64 - 1, 2) == [2**64 - 1, 0]


def test_shift_sweep_examples():
    recs = shift_sweep(size=10_000, exponents=[None, 3, 4, 8], repetitions=3)
    tab = digits_table(recs)
    assert tab["two-pass"][3] >= 10 and tab["two-pass"][4] >= 10
    assert tab["textbook"][8] == 0
    for algo in ALGORITHMS:
        assert tab[algo][None] >= 10
    assert len(recs) == 4 * 3 * len(ALGORITHMS)
    assert {r.group_size for r in recs if r.algorithm == "total-variance"} == {10}
    assert {r.group_size for r in recs if r.algorithm != "total-variance"} == {None}


def test_records_recompute():
    recs = shift_sweep(size=500, exponents=[6], repetitions=2, algorithms=["textbook", "pairwise"])
    for r in recs:
        x = generate(DatasetSpec(r.size, r.shift_exponent, r.seed))
        truth = exact_variance(x)
        assert render(truth) == r.oracle_variance
        assert correct_digits(r.computed_variance, truth).digits == r.digits


def test_size_sweep_examples():
    tab = digits_table(size_sweep(sizes=[10, 1000, 100_000], repetitions=3), "size")
    for n in (10, 1000, 100_000):
        assert tab["two-pass"][n] > tab["textbook"][n]
        assert tab["textbook"][n] == min(t[n] for t in tab.values())
    assert all(t[10] >= 4 for t in tab.values())


def test_sweep_rejects():
    with pytest.raises(ValueError):
        shift_sweep(size=1)
    with pytest.raises(ValueError):
        size_sweep(sizes=[1])
    with pytest.raises(ValueError):
        shift_sweep(size=10, algorithms=[])
    with pytest.raises(ValueError):
        group_size_sweep(size=100, group_sizes=[101])


def test_group_sweep_single_group():
    recs = group_size_sweep(size=3000, group_sizes=[3000], repetitions=2)
    for r in recs:
        x = generate(DatasetSpec(3000, 5, r.seed))
        assert r.computed_variance == updating_wwh(x).sample_variance


def test_group_sweep_unit_groups_exact():
    x = generate(DatasetSpec(400, 5, 3))
    groups = [exact_group_summary([v]) for v in x.tolist()]
    assert total_variance(groups).sum_sq_dev == exact_variance(x) * (x.size - 1)
    r = group_size_sweep(size=400, group_sizes=[1], repetitions=1, seed=3)[0]
    assert r.digits >= 12


def test_group_sweep_shape():
    recs = group_size_sweep(size=1000, group_sizes=[2, 10, 100, 1000], repetitions=2)
    assert [r.group_size for r in recs] == [2, 10, 100, 1000] * 2
    assert all(r.algorithm == "total-variance" for r in recs)


def test_average_digits():
    recs = [
        PrecisionRecord("a", 10, 1, s, "uniform01", None, 0.1, "x", d) for s, d in [(0, 4.0), (1, 6.0)]
    ]
    (s,) = average_digits(recs)
    assert (s.mean_digits, s.min_digits, s.max_digits, s.repetitions) == (5.0, 4.0, 6.0, 2)


def test_interval_widths_shape():
    rows = interval_widths(seeds=range(4))
    assert [r.seed for r in rows] == [0, 1, 2, 3]
    for r in rows:
        assert r.reference_width > 0
        if r.candidate_variance < 0:
            assert r.candidate_width is None and r.ratio is None


def test_interval_widths_benign():
    rows = interval_widths(size=100, shift_exponent=2, seeds=range(3))
    assert all(0.5 < r.ratio < 2 for r in rows)


def test_timing_single_rep():
    recs = timing_sweep(sizes=[1000], algorithms=["two-pass", "updating-wwh"], repetitions=1)
    assert all(r.stddev_wall_seconds == 0 and r.repetitions == 1 for r in recs)


def test_timing_sequential_only_single_thread():
    recs = timing_sweep(sizes=[2000], algorithms=["pairwise", "updating-wwh"], threads=[1, 3], repetitions=2)
    cells = {(r.algorithm, r.threads) for r in recs}
    assert cells == {("pairwise", 1), ("pairwise", 3), ("updating-wwh", 1)}


def test_check_parallel_support():
    check_parallel_support(["updating-wwh"], [1])
    check_parallel_support(["two-pass"], [1, 8])
    with pytest.raises(UnsupportedParallelAlgorithm):
        check_parallel_support(["updating"], [1, 4])


def test_timing_ordering():
    recs = [
        TimingRecord("two-pass", 10, 1, 1, 2.0, 0.0),
        TimingRecord("textbook", 10, 1, 1, 1.0, 0.0),
        TimingRecord("updating-wwh", 10, 1, 1, 3.0, 0.0),
        TimingRecord("pairwise", 10, 1, 1, 1.5, 0.0),
    ]
    checks = timing_ordering(recs, 10)
    assert checks == {
        "two-pass faster than updating-wwh": True,
        "two-pass faster than pairwise": False,
        "textbook fastest": True,
    }


def test_csv_format(tmp_path):
    recs = shift_sweep(size=100, exponents=[None, 2], repetitions=1, algorithms=["two-pass", "total-variance"])
    path = tmp_path / "s.csv"
    write_csv(path, recs, {"argv": ["sweep"]})
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# varlab")
    meta = read_metadata(path)
    assert meta["prng"] == PRNG_ID and meta["argv"] == '["sweep"]'
    header = next(l for l in lines if not l.startswith("#"))
    assert header.split(",") == [
        "algorithm", "size", "shift_exponent", "seed", "distribution", "group_size",
        "computed_variance", "oracle_variance", "digits",
    ]
    rows = read_records(path)
    assert len(rows) == 4
    for row, r in zip(rows, recs):
        assert float(row["computed_variance"]) == r.computed_variance
        assert float(row["digits"]) == r.digits
    assert rows[0]["shift_exponent"] == "" and rows[0]["group_size"] == ""
    assert rows[1]["group_size"] == "10"
    assert to_csv(recs, {"argv": ["sweep"]}) == text
