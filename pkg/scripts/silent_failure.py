"""Acceptance-interval widths from Textbook vs Two Pass at n = 100, shift 10^12.

A negative textbook variance has no interval at all; a zero one collapses it.
"""

import argparse

from varlab.harness import interval_widths

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--seeds", type=int, default=10)
args = p.parse_args()

rows = interval_widths(100, 12, range(args.seeds))
print(f"{'seed':>5} {'two-pass width':>16} {'textbook width':>16} {'ratio':>10}")
for r in rows:
    cand = "negative" if r.candidate_width is None else f"{r.candidate_width:.6g}"
    ratio = "-" if r.ratio is None else f"{r.ratio:.3g}"
    print(f"{r.seed:>5} {r.reference_width:>16.6g} {cand:>16} {ratio:>10}")
hits = sum(r.ratio is not None and r.ratio > 1e3 for r in rows)
print(f"width ratio above 1e3 in {hits}/{len(rows)} seeds")
