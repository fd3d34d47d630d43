#!/usr/bin/env python3
"""Run the acceptance criteria and write a JSON report.

Usage: python3 scripts/run_acceptance.py [--only 1,2,7] [--samples 1000000] [--report out.json]
"""

import argparse
import json
import sys

from haarlimits import __version__
from haarlimits.verify import DEFAULT_SAMPLES, INFO, run_criteria


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", type=lambda s: [int(x) for x in s.split(",")], default=None)
    ap.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--report", default="acceptance_report.json")
    args = ap.parse_args()

    results = run_criteria(args.only, seed=args.seed, samples=args.samples, threads=args.threads, echo=print)
    for r in results:
        for name, ok, detail in r.checks:
            if name.startswith(INFO) or not ok:
                print(f"    [{r.number}] {'ok  ' if ok else 'FAIL'} {name}  {detail}")
    payload = {
        "version": __version__,
        "seed": args.seed,
        "samples": args.samples,
        "pass": all(r.passed for r in results),
        "criteria": [r.to_json() for r in results],
    }
    with open(args.report, "w") as fh:
        json.dump(payload, fh, indent=2)
    print(f"report written to {args.report}")
    return 0 if payload["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
