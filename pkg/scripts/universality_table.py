#!/usr/bin/env python3
"""Print the large-N HCIZ free-energy coefficients of O(N) and U(N) side by side."""

import argparse

from haarlimits.series import check_claim2_and_claim3


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--order", type=int, default=4)
    ap.add_argument("--variant", choices=["symmetric", "generic", "both"], default="both")
    args = ap.parse_args()
    rep = check_claim2_and_claim3(args.order)
    print(f"{'n':>2} {'variant':<10} {'monomial':<44} {'F_O':>9} {'F_U':>9}")
    for r in rep.rows:
        if args.variant in ("both", r.note):
            print(f"{r.order:>2} {r.note:<10} {r.monomial:<44} {str(r.orthogonal):>9} {str(r.unitary):>9}  {'ok' if r.passed else 'FAIL'}")
    for name, ok, detail in rep.checks:
        print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")


if __name__ == "__main__":
    main()
