"""Mutation rate under uniform tautomer collapse versus template length.

    python scripts/mutation_sweep.py --lengths 50 200 1000 --seed 1
"""

import argparse

import numpy as np

from dnaswap.harness import RunConfig, replicate


def main(argv=None):
    p = argparse.ArgumentParser()
    p.add_argument("--lengths", type=int, nargs="+", default=[50, 200, 1000])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", choices=["fixed", "shuffled"], default="shuffled")
    args = p.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"{'length':>7} {'relaxation':>17} {'rejections/pos':>15} {'mutation rate':>14}")
    for n in args.lengths:
        seq = "".join(rng.choice(list("ATGC"), n))
        for relaxation in ("none", "uniform-collapse"):
            report, _ = replicate(RunConfig(sequence=seq, seed=args.seed, order=args.order, relaxation=relaxation))
            agg = report["results"]["aggregate"]
            print(f"{n:>7} {relaxation:>17} {agg['mean_rejections_per_position']:>15.3f} {agg['mutations'] / n:>14.4f}")


if __name__ == "__main__":
    main()
