"""Compare the solver's objective with an exhaustive grid search at n = 3.

    python scripts/small_n_oracle.py --instances 20

A positive gap means the grid found a feasible point with a lower objective
than the solver's answer, i.e. the solver did not reach the global minimum.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import brute_force_n3  # noqa: E402

from qofilter.model import RefinedImage, RefinedModel  # noqa: E402
from qofilter.quasiopt import solve  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--grid", type=int, default=81)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    done = 0
    while done < args.instances:
        lam = np.sort(rng.uniform(0.5, 30, 3))[::-1]
        phi = np.sqrt(lam) * rng.normal(0, 2, 3) + rng.normal(size=3)
        rm = RefinedModel(np.eye(3), np.sqrt(lam), np.eye(3), lam)
        sol = solve(rm, RefinedImage(phi))
        if sol.degenerate:
            continue
        f_bf, q = brute_force_n3(lam, phi, sol.threshold, args.grid)
        done += 1
        print(
            f"phi={np.array2string(phi, precision=2):28s} solver F={sol.objective:9.5f} "
            f"p={np.array2string(sol.p_min, precision=3):26s} grid F={f_bf:9.5f} "
            f"p={np.array2string(q, precision=3):26s} gap={sol.objective - f_bf:+.2e}"
        )


if __name__ == "__main__":
    main()
