"""Digits per algorithm as the additive shift grows, n = 10^4 by default."""

from _common import parser, save

from varlab.harness import DEFAULT_SHIFTS, shift_sweep

p = parser(__doc__, "shift_sweep.csv")
p.add_argument("--size", type=int, default=10_000)
args = p.parse_args()
save(shift_sweep(args.size, DEFAULT_SHIFTS, seed=args.seed, repetitions=args.reps), args.out, "shift_exponent")
