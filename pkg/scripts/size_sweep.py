"""Digits per algorithm as the data size grows at shift 10^5.

``--full`` extends the sizes to 10^8 (slow, needs several GB of memory).
"""

from _common import parser, save

from varlab.harness import DEFAULT_SIZES, size_sweep

p = parser(__doc__, "size_sweep.csv")
p.add_argument("--full", action="store_true")
args = p.parse_args()
sizes = DEFAULT_SIZES + ((10**8,) if args.full else ())
save(size_sweep(sizes, 5, seed=args.seed, repetitions=args.reps), args.out, "size")
