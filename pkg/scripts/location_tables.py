"""Equilibrium tables over the default location grid, one CSV per gamma.

    python3 scripts/location_tables.py --t 0.2 --gamma 0 5 --outdir tables/
"""

import argparse
from pathlib import Path

from hotelling_cournot.analysis import Axis, SweepSpec, run_sweep
from hotelling_cournot.cli import _sweep_rows, render


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t", type=float, default=0.2)
    ap.add_argument("--gamma", type=float, nargs="+", default=[0.0, 5.0])
    ap.add_argument("--step", type=float, default=0.05)
    ap.add_argument("--outdir", type=Path, default=Path("tables"))
    args = ap.parse_args()

    args.outdir.mkdir(parents=True, exist_ok=True)
    for gamma in args.gamma:
        spec = SweepSpec(
            Axis("r1", args.step, 0.5, args.step),
            Axis("r2", 0.5, 1.0 - args.step, args.step),
            {"t": args.t, "gamma": gamma},
        )
        result = run_sweep(spec)
        rows, _, diagnostics = _sweep_rows(result, benefit=False)
        path = args.outdir / f"locations_t{args.t:g}_g{gamma:g}.csv"
        path.write_text(render("csv", spec.to_dict(), rows, diagnostics))
        failed = sum(1 for c in result if not c.ok)
        print(f"{path}: {len(rows)} cells, {failed} failed")


if __name__ == "__main__":
    main()
