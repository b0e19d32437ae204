"""Adversary sweep for QB: exhaustive for small m, random assignments above.

    python3 scripts/run_dba_sweep.py --ms 3 4 5 --trials 1000
    python3 scripts/run_dba_sweep.py --ms 4 --uniform-relays
"""

import argparse
import json

from qbsync.experiments import qb_exhaustive, qb_random


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ms", type=int, nargs="+", default=[3, 4, 5, 6, 7])
    p.add_argument("--trials", type=int, default=1000, help="random trials for m > 4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=["dealer", "quantum"], default="dealer")
    p.add_argument("--uniform-relays", action="store_true", help="drop relay strategies that treat recipients differently")
    args = p.parse_args()

    selective = not args.uniform_relays
    rows = []
    for m in args.ms:
        if m <= 4:
            r = qb_exhaustive(m, seed=args.seed, backend=args.backend, selective_relays=selective)
            mode = "exhaustive"
        else:
            r = qb_random(m, args.trials, seed=args.seed, backend=args.backend, selective_relays=selective)
            mode = "random"
        rows.append({"m": m, "mode": mode, "trials": r.trials, "agreement_violations": r.agreement_violations,
                     "validity_violations": r.validity_violations, "max_faulty": r.max_faulty,
                     "cases": r.cases, "examples": r.examples})
        print(f"m={m} {mode:<10} trials={r.trials:<5} agreement={r.agreement_violations:<4} validity={r.validity_violations}")
    print(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
