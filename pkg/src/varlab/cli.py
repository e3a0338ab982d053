"""``varlab`` command line: datasets, single runs, sweeps, benchmarks, probes.

Every CSV written here carries its own replay line (``# argv: [...]``); the
``replay`` subcommand regenerates a file from it.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import __version__
from . import harness
from .accumulators import (
    ALGORITHMS,
    DEFAULT_BASE_BLOCK,
    DEFAULT_GROUP_SIZE,
    INNER_CODES,
    UPDATING_WWH,
    Explicit,
    FirstElement,
    PrefixMean,
    canonical_algorithm,
    variance,
)
from .errors import InsufficientData, UnsupportedParallelAlgorithm, VarianceError
from .inference import FailureMode, one_sample_ttest, summarize, t_quantile
from .oracle import correct_digits, exact_variance, mantissa_table, render
from .parallel import THREADS_ENV, default_threads, parallel_variance, plan_chunks

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

OUTPUT_FLAGS = ("--out", "-o", "--summary")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument types


def _count(text: str) -> int:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value != int(value):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def positive_int(text: str) -> int:
    value = _count(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def int_list(text: str) -> list[int | None]:
    """Comma list of integers; ``a..b`` ranges and ``none`` allowed; 1e6 style ok."""
    out: list[int | None] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if item.lower() == "none":
            out.append(None)
        elif ".." in item:
            lo, hi = item.split("..")
            out.extend(range(_count(lo), _count(hi) + 1))
        else:
            out.append(_count(item))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def positive_list(text: str) -> list[int]:
    values = int_list(text)
    if any(v is None or v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive integers: {text!r}")
    return values


def algo_list(text: str) -> list[str]:
    names = [a.strip() for a in text.split(",") if a.strip()]
    if not names:
        raise argparse.ArgumentTypeError("empty algorithm list")
    if names == ["all"]:
        return list(ALGORITHMS)
    try:
        return [canonical_algorithm(a) for a in names]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def algo_name(text: str) -> str:
    try:
        return canonical_algorithm(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def shift_policy(text: str):
    kind, _, arg = text.partition(":")
    if kind == "first":
        return FirstElement()
    if kind == "prefix":
        return PrefixMean(positive_int(arg) if arg else 1000)
    if kind == "explicit" and arg:
        return Explicit(float(arg))
    raise argparse.ArgumentTypeError("expected first | prefix[:K] | explicit:VALUE")


# --------------------------------------------------------------------------
# helpers


def _add_dataset_flags(p, size=10_000, shift=None):
    p.add_argument("--input", "-i", help="dataset file, one value per line ('#' comments skipped)")
    p.add_argument("--size", type=positive_int, default=size)
    p.add_argument("--seed", type=_count, default=0)
    p.add_argument("--shift-exp", type=_count, default=shift, help="add 10**E to every value")


def load_values(path: str) -> np.ndarray:
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                values.append(float(line))
    return np.array(values, dtype=np.float64)


def dataset_from(args) -> np.ndarray:
    if args.input:
        return load_values(args.input)
    return harness.generate(harness.DatasetSpec(args.size, args.shift_exp, args.seed))


def _replay_argv(argv: Sequence[str]) -> list[str]:
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok in OUTPUT_FLAGS:
            skip = True
            continue
        if any(tok.startswith(f + "=") for f in OUTPUT_FLAGS):
            continue
        out.append(tok)
    return out


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(x) -> str:
    return harness.format_cell(x)


# --------------------------------------------------------------------------
# subcommands


def cmd_gen(args, argv) -> int:
    spec = harness.DatasetSpec(args.size, args.shift_exp, args.seed)
    x = harness.generate(spec)
    lines = [f"# {m}" for m in harness.metadata_lines({"argv": _replay_argv(argv)})]
    lines += [format(v, ".17g") for v in x]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_variance(args, argv) -> int:
    x = dataset_from(args)
    opts = dict(
        clamp_negative=args.clamp,
        compensated=args.compensated,
        shift_policy=args.shift_policy,
        inner=args.inner,
        base_block=args.base_block,
    )
    if args.threads > 1:
        if len(x) < 2:
            raise InsufficientData("variance needs at least two values")
        r = parallel_variance(
            x, args.algo, plan_chunks(len(x), args.threads),
            group_size=args.group_size if args.algo == "total-variance" else None, **opts,
        )
    else:
        r = variance(x, args.algo, group_size=args.group_size, **opts)
    print(f"algorithm: {args.algo}")
    print(f"count: {r.count}")
    print(f"mean: {_fmt(r.mean)}")
    print(f"variance: {_fmt(r.sample_variance)}")
    if r.sample_variance < 0:
        print("stddev: undefined")
        print(
            "warning: negative variance; the two terms of the formula cancelled catastrophically",
            file=sys.stderr,
        )
    else:
        print(f"stddev: {_fmt(math.sqrt(r.sample_variance))}")
    print(f"negative_clamped: {_fmt(r.negative_clamped)}")
    if r.s1 is not None:
        print(f"s1: {_fmt(r.s1)}")
        print(f"s2: {_fmt(r.s2)}")
    if args.oracle:
        truth = exact_variance(x)
        score = correct_digits(r.sample_variance, truth)
        print(f"oracle_variance: {render(truth)}")
        print(f"relative_error: {_fmt(score.relative_error)}")
        print(f"digits: {score.digits:.3f}")
    return EXIT_OK


def cmd_sweep(args, argv) -> int:
    common = dict(seed=args.seed, repetitions=args.reps)
    if args.mode == "shift":
        records = harness.shift_sweep(
            args.size, args.shifts, args.algos, group_size=args.group_size, **common
        )
        axis = "shift_exponent"
    elif args.mode == "size":
        records = harness.size_sweep(
            args.sizes, args.shift_exp, args.algos, group_size=args.group_size, **common
        )
        axis = "size"
    else:
        records = harness.group_size_sweep(
            args.size, args.shift_exp, args.group_sizes, inner=args.inner, **common
        )
        axis = "group_size"
    meta = {"argv": _replay_argv(argv)}
    _emit(harness.to_csv(records, meta), args.out)
    summary = harness.average_digits(records)
    if args.summary:
        harness.write_csv(args.summary, summary, meta)
    if args.out:
        print(f"{'algorithm':<16}{axis:>16}{'mean digits':>14}")
        for s in summary:
            print(f"{s.algorithm:<16}{_fmt(getattr(s, axis)):>16}{s.mean_digits:>14.3f}")
    return EXIT_OK


def cmd_bench(args, argv) -> int:
    if args.algos_given:
        harness.check_parallel_support(args.algos, args.threads)
    records = harness.timing_sweep(args.sizes, args.algos, args.threads, args.reps, args.seed, args.group_size)
    meta = {"argv": _replay_argv(argv), "nondeterministic_columns": ["mean_wall_seconds", "stddev_wall_seconds"]}
    _emit(harness.to_csv(records, meta), args.out)
    report = sys.stdout if args.out else sys.stderr
    for n in args.sizes:
        for claim, ok in harness.timing_ordering(records, n).items():
            print(f"[{'PASS' if ok else 'INFO'}] n={n}: {claim}", file=report)
    return EXIT_OK


def cmd_mantissa(args, argv) -> int:
    x = harness.generate(harness.DatasetSpec(args.size, None, args.seed)) if not args.input else load_values(args.input)
    rows = mantissa_table(x, args.shifts)
    header = ["shift_exponent", "s1_mantissa", "s2_mantissa", "s", "variance"]
    cells = [
        ["None" if r.shift_exponent is None else str(r.shift_exponent), r.s1_mantissa_hex, r.s2_mantissa_hex,
         _fmt(r.s), _fmt(r.variance)]
        for r in rows
    ]
    if args.out:
        lines = [f"# {m}" for m in harness.metadata_lines({"argv": _replay_argv(argv)})]
        lines += [",".join(header)] + [",".join(c) for c in cells]
        _emit("\n".join(lines) + "\n", args.out)
    print(f"{header[0]:>14} {header[1]:>16} {header[2]:>16} {header[3]:>24} {header[4]:>24}")
    for c in cells:
        print(f"{c[0]:>14} {c[1]:>16} {c[2]:>16} {c[3]:>24} {c[4]:>24}")
    return EXIT_OK


def cmd_ttest(args, argv) -> int:
    x = dataset_from(args)
    r = variance(x, args.algo, clamp_negative=args.clamp)
    stats = summarize(r)
    mu0 = stats.mean if args.mu0 is None else args.mu0
    res = one_sample_ttest(stats, mu0, args.alpha)
    print(f"algorithm: {args.algo}")
    print(f"n: {stats.n}")
    print(f"mean: {_fmt(stats.mean)}")
    print(f"mu0: {_fmt(mu0)}")
    print(f"stddev: {_fmt(stats.stddev)}")
    print(f"stderr: {_fmt(stats.stderr)}")
    print(f"critical_value: {_fmt(res.critical_value)}")
    print(f"t_statistic: {_fmt(res.t_statistic)}")
    print(f"acceptance_interval: [{_fmt(res.acceptance_interval[0])}, {_fmt(res.acceptance_interval[1])}]")
    print(f"acceptance_width: {_fmt(res.width)}")
    if r.negative_clamped:
        print("note: negative variance was clamped to zero")
    if res.failure_mode is FailureMode.LOUD_ZERO_STDDEV:
        print("LOUD FAILURE: standard deviation is zero, the t statistic is undefined")
    else:
        print(f"reject: {_fmt(res.reject)}")
    return EXIT_OK


def cmd_probe_sql(args, argv) -> int:
    t = t_quantile(args.alpha, args.n - 1)
    print(f"-- half-width probes, alpha={args.alpha}, n={args.n}, critical value t={t:.17g}")
    for e in args.shifts:
        print(f"-- shift exponent {e}")
        print(
            f"SELECT {t:.17g} * stddev({args.column} + {10**e}) / sqrt(count({args.column})) "
            f"AS half_width FROM {args.table};"
        )
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    meta = harness.read_metadata(args.file)
    if "argv" not in meta:
        raise UsageError(f"{args.file} has no replay metadata")
    return main([*json.loads(meta["argv"]), "--out", args.out])


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="varlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"varlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic dataset")
    g.add_argument("--size", type=positive_int, default=10_000)
    g.add_argument("--seed", type=_count, default=0)
    g.add_argument("--shift-exp", type=_count, default=None)
    g.add_argument("--out", "-o")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("variance", help="run one algorithm on one dataset")
    _add_dataset_flags(v)
    v.add_argument("--algo", type=algo_name, default="two-pass")
    v.add_argument("--clamp", action=argparse.BooleanOptionalAction, default=False,
                   help="set a negative textbook variance to zero (default: report it)")
    v.add_argument("--compensated", action="store_true")
    v.add_argument("--group-size", type=positive_int, default=DEFAULT_GROUP_SIZE)
    v.add_argument("--inner", choices=sorted(INNER_CODES), default=UPDATING_WWH)
    v.add_argument("--shift-policy", type=shift_policy, default=None)
    v.add_argument("--base-block", type=positive_int, default=DEFAULT_BASE_BLOCK)
    v.add_argument("--threads", type=positive_int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or the CPU count)")
    v.add_argument("--oracle", action="store_true", help="score against the exact variance")
    v.set_defaults(func=cmd_variance)

    s = sub.add_parser("sweep", help="precision sweeps over shift, size or group size")
    s.add_argument("--mode", choices=("shift", "size", "group"), required=True)
    s.add_argument("--size", type=positive_int, default=None)
    s.add_argument("--sizes", type=positive_list, default=list(harness.DEFAULT_SIZES))
    s.add_argument("--shifts", type=int_list, default=list(harness.DEFAULT_SHIFTS))
    s.add_argument("--shift-exp", type=_count, default=5)
    s.add_argument("--group-sizes", type=positive_list, default=list(harness.DEFAULT_GROUP_SIZES))
    s.add_argument("--group-size", type=positive_int, default=DEFAULT_GROUP_SIZE)
    s.add_argument("--inner", choices=sorted(INNER_CODES), default=UPDATING_WWH)
    s.add_argument("--algos", type=algo_list, default=list(ALGORITHMS))
    s.add_argument("--seed", type=_count, default=0)
    s.add_argument("--reps", type=positive_int, default=harness.DEFAULT_REPETITIONS)
    s.add_argument("--out", "-o")
    s.add_argument("--summary", help="also write per-cell mean digits here")
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bench", help="wall-clock timing sweep")
    b.add_argument("--sizes", type=positive_list, default=[10**6, 10**7])
    b.add_argument("--algos", type=algo_list, default=None)
    b.add_argument("--threads", type=positive_list, default=None,
                   help=f"thread counts (default: 1 and ${THREADS_ENV} or the CPU count)")
    b.add_argument("--reps", type=positive_int, default=harness.DEFAULT_REPETITIONS)
    b.add_argument("--seed", type=_count, default=0)
    b.add_argument("--group-size", type=positive_int, default=DEFAULT_GROUP_SIZE)
    b.add_argument("--out", "-o")
    b.set_defaults(func=cmd_bench)

    m = sub.add_parser("mantissa", help="fraction bits of the two textbook terms per shift")
    m.add_argument("--input", "-i")
    m.add_argument("--size", type=positive_int, default=10_000)
    m.add_argument("--seed", type=_count, default=0)
    m.add_argument("--shifts", type=int_list, default=list(range(1, 9)))
    m.add_argument("--out", "-o")
    m.set_defaults(func=cmd_mantissa)

    t = sub.add_parser("ttest", help="one-sample two-tailed t-test on a dataset")
    _add_dataset_flags(t, size=100, shift=12)
    t.add_argument("--algo", type=algo_name, default="two-pass")
    t.add_argument("--mu0", type=float, default=None, help="hypothesized mean (default: sample mean)")
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--clamp", action=argparse.BooleanOptionalAction, default=False)
    t.set_defaults(func=cmd_ttest)

    q = sub.add_parser("probe-sql", help="print shift-probe queries for a database")
    q.add_argument("--table", default="samples")
    q.add_argument("--column", default="x")
    q.add_argument("--alpha", type=float, default=0.05)
    q.add_argument("--n", type=positive_int, default=100, help="row count of the probed table")
    q.add_argument("--shifts", type=int_list, default=list(range(1, 16)))
    q.set_defaults(func=cmd_probe_sql)

    r = sub.add_parser("replay", help="regenerate a CSV from its embedded metadata")
    r.add_argument("file")
    r.add_argument("--out", "-o", required=True)
    r.set_defaults(func=cmd_replay)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "sweep":
        if args.size is None:
            args.size = 100_000 if args.mode == "group" else 10_000
    if args.command == "bench":
        args.algos_given = args.algos is not None
        args.algos = args.algos or list(ALGORITHMS)
        if args.threads is None:
            args.threads = sorted({1, default_threads()})
    if args.command == "variance" and args.threads is None:
        args.threads = 1 if args.algo in harness.SEQUENTIAL_ONLY else default_threads()
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"varlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnsupportedParallelAlgorithm as exc:
        print(f"varlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VarianceError as exc:
        print(f"varlab: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"varlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"varlab: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
