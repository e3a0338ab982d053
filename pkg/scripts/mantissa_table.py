"""Fraction bits of sum(x^2) and (sum x)^2 / n as the shift grows.

When the two hex strings agree the textbook difference keeps no signal.
"""

import argparse

from varlab.harness import DatasetSpec, generate
from varlab.oracle import correct_digits, exact_variance, mantissa_table

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--size", type=int, default=10_000)
p.add_argument("--seed", type=int, default=0)
args = p.parse_args()

x = generate(DatasetSpec(args.size, None, args.seed))
print(f"{'shift':>6} {'s1 fraction':>16} {'s2 fraction':>16} {'variance':>24} {'digits':>7}")
for row in mantissa_table(x, range(1, 9)):
    shifted = x if row.shift_exponent is None else x + float(10**row.shift_exponent)
    d = correct_digits(row.variance, exact_variance(shifted)).digits
    label = "None" if row.shift_exponent is None else row.shift_exponent
    print(f"{label:>6} {row.s1_mantissa_hex:>16} {row.s2_mantissa_hex:>16} {row.variance:>24.17g} {d:7.2f}")
