"""Success probability per delivered list position versus detector efficiency.

    python3 scripts/run_efficiency_study.py --ms 3 4 8 --etas 0.6 0.8 0.95
"""

import argparse

from qbsync.costs import CostModel, Scheme, list_type_count, monte_carlo_efficiency, p_success
from qbsync.rng import EFFICIENCY, derive_rng


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ms", type=int, nargs="+", default=[3, 4, 5, 6, 8])
    p.add_argument("--etas", type=float, nargs="+", default=[0.6, 0.8, 0.95])
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    print(f"{'scheme':<16}{'m':>3}{'eta':>7}{'closed':>9}{'mc':>9}{'z':>7}")
    for si, scheme in enumerate(Scheme):
        for m in args.ms:
            if scheme is Scheme.ENTANGLED_STATE and m < 3:
                continue
            for eta in args.etas:
                g = derive_rng(args.seed, si, EFFICIENCY, m, int(round(eta * 1e6)))
                est = monte_carlo_efficiency(scheme, m, eta, args.trials, g)
                print(f"{scheme.value:<16}{m:>3}{eta:>7.2f}{p_success(CostModel(scheme, m, eta)):>9.4f}{est.rate:>9.4f}{est.z:>+7.2f}")
    print()
    for m in args.ms:
        relay, perms = list_type_count(m)
        print(f"m={m}: {relay} relay-bit list patterns vs {perms} permutation lists")


if __name__ == "__main__":
    main()
