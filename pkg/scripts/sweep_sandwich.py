#!/usr/bin/env python3
"""Sweep random subspaces of l_p^m and report inscribed-ellipsoid ratios.

For each sampled subspace the sandwich ratio lambda is compared against
the sqrt(k) guarantee; exceeding it indicates a certification bug.
"""

import argparse
import math

import numpy as np

from greedy_widths.geometry import john_ellipsoid
from greedy_widths.spaces import NormedSpace
from greedy_widths.subspaces import Subspace


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=8)
    ap.add_argument("--k-max", type=int, default=4)
    ap.add_argument("--per-cell", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--ps", nargs="+", default=["1", "1.5", "2", "4", "inf"])
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    print(f"{'p':>5} {'k':>2} {'lambda':>10} {'sqrt(k)':>8}")
    for p_text in args.ps:
        p = math.inf if p_text == "inf" else float(p_text)
        space = NormedSpace.lp(args.m, p)
        for k in range(1, args.k_max + 1):
            for _ in range(args.per_cell):
                W = rng.normal(size=(args.m, k))
                sw = john_ellipsoid(Subspace(W, space), samples=400,
                                    seed=int(rng.integers(1 << 30)))
                ratio = sw.lam / math.sqrt(k)
                worst = max(worst, ratio)
                print(f"{p_text:>5} {k:2d} {sw.lam:10.6f} {math.sqrt(k):8.4f}")
    print(f"worst lambda / sqrt(k): {worst:.6f}")


if __name__ == "__main__":
    main()
