"""Repeated clock synchronization with optional lying processes.

    python3 scripts/run_clock_sync.py --m 4 --trials 200 --liars 1
"""

import argparse

from qbsync.clocksync import SyncConfig, run_sync
from qbsync.harness import LieClockDifferences, profiles_for
from qbsync.rng import OFFSETS, STRATEGY, derive_rng


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("--spread", type=int, default=40, help="offsets drawn from [0, spread)")
    p.add_argument("--liars", type=int, default=0)
    p.add_argument("--backend", choices=["dealer", "quantum"], default="dealer")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    cfg = SyncConfig(bit_width=args.bits, backend=args.backend)
    done = c1 = c2 = 0
    for t in range(args.trials):
        offsets = derive_rng(args.seed, t, OFFSETS).integers(0, args.spread, size=args.m).tolist()
        g = derive_rng(args.seed, t, STRATEGY)
        liars = g.choice(range(1, args.m + 1), size=args.liars, replace=False).tolist()
        faults = {int(x): LieClockDifferences({y: int(g.integers(-9, 10)) for y in range(1, args.m + 1) if y != x}) for x in liars}
        res = run_sync(offsets, profiles_for(args.m, faults), cfg, seed=args.seed, trial=t)
        if res.report.aborted:
            continue
        done += 1
        c1 += res.report.c1
        c2 += res.report.c2
    print(f"m={args.m} liars={args.liars} trials={args.trials} completed={done} C1={c1} C2={c2}")


if __name__ == "__main__":
    main()
