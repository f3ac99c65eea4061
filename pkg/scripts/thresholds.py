"""Transport threshold t_g against entanglement and grid resolution.

    python3 scripts/thresholds.py --gamma 0 1 2 5 --steps 0.05 0.025 0.0125
"""

import argparse
import time

from hotelling_cournot.analysis import find_tg


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, nargs="+", default=[0.0, 1.0, 2.0, 5.0])
    ap.add_argument("--steps", type=float, nargs="+", default=[0.05, 0.025, 0.0125])
    ap.add_argument("--tol", type=float, default=1e-3)
    args = ap.parse_args()

    print("gamma,grid_step,t_g,lo,hi,seconds")
    for gamma in args.gamma:
        for step in args.steps:
            t0 = time.perf_counter()
            res = find_tg(gamma, step, args.tol)
            print(f"{gamma:g},{step:g},{res.value:.6f},{res.bracket[0]:.6f},"
                  f"{res.bracket[1]:.6f},{time.perf_counter() - t0:.1f}")


if __name__ == "__main__":
    main()
