"""Run every theorem check on the desk-scale configurations and save the reports."""

import argparse
import json
import time
from pathlib import Path

import numpy as np

from qudit_balance.theorems import (
    DESK_CONFIGS,
    catalog_sample,
    verify_theorem1,
    verify_theorem2,
    verify_theorem3,
    verify_theorem4,
    verify_theorem5,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--per-entry", type=int, default=8, help="random states per catalog support")
    ap.add_argument("--out", type=Path, default=Path("theorem_reports.json"))
    args = ap.parse_args()

    def rng():
        return np.random.default_rng(args.seed)

    sample = catalog_sample(rng(), DESK_CONFIGS, args.per_entry)
    jobs = {
        "1": lambda: verify_theorem1(rng()),
        "2": lambda: verify_theorem2(rng(), per_entry=args.per_entry),
        "3": lambda: [verify_theorem3(q, d) for q, d in DESK_CONFIGS],
        "4": lambda: verify_theorem4(None, sample=sample),
        "5": lambda: verify_theorem5(rng(), sample=sample),
    }
    reports = {}
    for name, job in jobs.items():
        t0 = time.perf_counter()
        out = job()
        parts = out if isinstance(out, list) else [out]
        reports[name] = [r.to_dict() for r in parts]
        status = "pass" if all(r.passed for r in parts) else "FAIL"
        cases = sum(r.cases for r in parts)
        print(f"theorem {name}: {status} ({cases} cases, {time.perf_counter() - t0:.1f}s)")
    args.out.write_text(json.dumps(reports, indent=2))
    print(f"reports -> {args.out}")


if __name__ == "__main__":
    main()
