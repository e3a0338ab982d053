"""Wall-clock timings at 10^6 and 10^7 values, single and multi-threaded."""

import argparse
import sys
from pathlib import Path

from varlab.harness import timing_ordering, timing_sweep, write_csv
from varlab.parallel import default_threads

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--out", type=Path, default=Path("results") / "bench.csv")
p.add_argument("--reps", type=int, default=10)
p.add_argument("--threads", type=int, default=default_threads())
args = p.parse_args()

sizes = (10**6, 10**7)
recs = timing_sweep(sizes, threads=sorted({1, args.threads}), repetitions=args.reps)
args.out.parent.mkdir(parents=True, exist_ok=True)
write_csv(args.out, recs, {"argv": sys.argv, "nondeterministic_columns": ["mean_wall_seconds", "stddev_wall_seconds"]})
for r in recs:
    print(f"{r.algorithm:<16} n={r.size:<9} threads={r.threads:<3} {r.mean_wall_seconds * 1e3:9.2f} ms")
for claim, held in timing_ordering(recs, sizes[-1]).items():
    print(f"[{'PASS' if held else 'INFO'}] {claim}")
