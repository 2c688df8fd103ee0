#!/usr/bin/env python3
"""How often the secret-holder predicate fires at one grid point, and how the
band fraction of the 81x81 sweep varies with the base seed.

    python scripts/secret_seed_study.py --seeds 1000 --grid-seeds 10
"""
import argparse

import numpy as np

from shapaudit import dgp
from shapaudit import experiments as ex


def band_fraction(base_seed: int, jobs: int) -> float:
    cfg = ex.SweepConfig("secret", tuple(ex.parse_grid("t1=-2:2:81,t2=-2:2:81")), base_seed)
    rows = ex.run_sweep(cfg, jobs)
    flagged = [(k // 81, k % 81) for k, r in enumerate(rows) if r["pathology"]]
    return sum(0 < abs(j - 40) - abs(i - 40) < 8 for i, j in flagged) / max(1, len(flagged))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--t1", type=float, default=2.0)
    p.add_argument("--t2", type=float, default=2.2)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seeds", type=int, default=1000)
    p.add_argument("--grid-seeds", type=int, default=0)
    p.add_argument("--jobs", type=int, default=ex.default_jobs())
    args = p.parse_args()

    hits = np.array([ex.run_secret(args.t1, args.t2, args.n, dgp.mix64(ex.DEFAULT_SEED, s))[0]["pathology"]
                     for s in range(args.seeds)])
    rate = hits.mean()
    se = np.sqrt(rate * (1 - rate) / args.seeds)
    print(f"predicate rate at ({args.t1}, {args.t2}), n={args.n}: {rate:.3f} +- {se:.3f} over {args.seeds} seeds")
    windows = hits[: args.seeds // 20 * 20].reshape(-1, 20).sum(axis=1)
    print(f"    hits per block of 20 seeds: mean {windows.mean():.1f}, max {windows.max()}, "
          f"share >= 18: {(windows >= 18).mean():.3f}")

    fracs = [band_fraction(s, args.jobs) for s in range(42, 42 + args.grid_seeds)]
    if fracs:
        print(f"band fraction over base seeds 42..{41 + args.grid_seeds}: "
              f"mean {np.mean(fracs):.3f}, min {min(fracs):.3f}, max {max(fracs):.3f}, "
              f">= 0.80 in {sum(f >= 0.8 for f in fracs)}/{len(fracs)}")


if __name__ == "__main__":
    main()
