"""Distribution of the significance level implied by the oracle Wiener filter's misfit.

    python scripts/significance_levels.py --trials 500
"""

import argparse

import numpy as np

from qofilter.simulation import CASES, make_case, monte_carlo


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--bins", type=int, default=10)
    args = ap.parse_args()

    for name in CASES:
        r = monte_carlo(make_case(name), trials=args.trials, seed=args.seed, quasi=False)
        a = r.wiener_alpha
        print(f"{name}: median {np.median(a):.3f}, P(alpha > 0.5) = {np.mean(a > 0.5):.3f}, P(alpha > 0.7) = {np.mean(a > 0.7):.3f}")
        hist = r.alpha_histogram(args.bins)
        top = max(hist["counts"])
        for lo, hi, c in zip(hist["edges"][:-1], hist["edges"][1:], hist["counts"]):
            print(f"  [{lo:.2f}, {hi:.2f})  {c:5d}  {'#' * round(40 * c / top)}")


if __name__ == "__main__":
    main()
