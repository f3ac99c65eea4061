"""Critical transport allowance, classical and quantum, over location pairs.

For each pair the continued equilibrium is followed into negative t until
it stops being valid; the CSV records where and why.

    python3 scripts/allowance_scan.py --gamma 5 --out allowance.csv
"""

import argparse
import csv

from hotelling_cournot.analysis import DEFAULT_R1, DEFAULT_R2, compare_allowance
from hotelling_cournot.errors import ModelError


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=5.0)
    ap.add_argument("--tol", type=float, default=1e-3)
    ap.add_argument("--t-min", type=float, default=-4.0,
                    help="most negative transport rate searched")
    ap.add_argument("--out", default="allowance.csv")
    args = ap.parse_args()

    cols = ["r1", "r2", "t_c_classical", "reason_classical",
            "t_c_quantum", "reason_quantum", "ordered", "witness_t"]
    n_ordered = n_total = 0
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for r1 in DEFAULT_R1:
            for r2 in DEFAULT_R2:
                if not r1 < r2:
                    continue
                try:
                    c = compare_allowance(r1, r2, args.gamma, args.tol, bracket=(args.t_min, 0.0))
                except ModelError as exc:
                    writer.writerow([r1, r2, "", exc.code, "", "", "", ""])
                    continue
                n_total += 1
                n_ordered += c.ordered
                writer.writerow([
                    r1, r2, f"{c.classical.value:.9g}", c.classical.reason,
                    f"{c.quantum.value:.9g}", c.quantum.reason, c.ordered,
                    "" if c.witness_t is None else f"{c.witness_t:.9g}",
                ])
    print(f"wrote {args.out}; quantum threshold below classical in {n_ordered}/{n_total} pairs")


if __name__ == "__main__":
    main()
