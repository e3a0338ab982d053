import argparse
import sys
from pathlib import Path

from varlab.harness import average_digits, write_csv


def parser(description, default_name):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", type=Path, default=Path("results") / default_name)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    return p


def save(records, out, axis):
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, records, {"argv": sys.argv})
    print(f"wrote {len(records)} rows to {out}")
    table = {}
    for s in average_digits(records):
        table.setdefault(s.algorithm, {})[getattr(s, axis)] = s.mean_digits
    keys = list(next(iter(table.values())))
    print(f"{'':<16}" + "".join(f"{str(k):>9}" for k in keys))
    for algo, row in table.items():
        print(f"{algo:<16}" + "".join(f"{row[k]:9.2f}" for k in keys))
