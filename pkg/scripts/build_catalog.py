"""Write the irreducible-support catalog for every desk-scale (q, d) as JSON lines."""

import argparse
import time
from pathlib import Path

from qudit_balance.catalog import dump_catalog, enumerate_irreducible, length_bound
from qudit_balance.theorems import DESK_CONFIGS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("catalog"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for q, d in DESK_CONFIGS:
        t0 = time.perf_counter()
        entries = enumerate_irreducible(q, d, length_bound(q, d))
        path = args.out / f"irreducible_q{q}_d{d}.jsonl"
        path.write_text(dump_catalog(entries))
        lengths = sorted(e.L for e in entries)
        print(f"q={q} d={d}: {len(entries)} classes, lengths {lengths} -> {path} ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
