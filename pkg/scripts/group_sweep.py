"""Total Variance digits for several group sizes (n = 10^5, shift 10^5)."""

from _common import parser, save

from varlab.harness import DEFAULT_GROUP_SIZES, group_size_sweep

p = parser(__doc__, "group_sweep.csv")
p.add_argument("--inner", default="updating-wwh")
args = p.parse_args()
recs = group_size_sweep(100_000, 5, DEFAULT_GROUP_SIZES, seed=args.seed, repetitions=args.reps, inner=args.inner)
save(recs, args.out, "group_size")
