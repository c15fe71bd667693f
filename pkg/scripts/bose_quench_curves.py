"""Bose quench J/U: 0 -> J inside the Mott phase on the cubic lattice.

Writes depletion and nearest-neighbour hp, pp time series for several J/U,
together with their quasi-equilibrium values, to a CSV per J.

    python scripts/bose_quench_curves.py --out results/bose_quench
"""

import argparse
from pathlib import Path

import numpy as np

from hubbard_quench import bose
from hubbard_quench.bose import BoseParams
from hubbard_quench.io import SeriesSet, write_csv
from hubbard_quench.lattice import thermodynamic_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--J", type=float, nargs="+", default=[0.05, 0.1, 0.14])
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--points", type=int, default=48)
    ap.add_argument("--t-end", type=float, default=80.0)
    ap.add_argument("--out", type=Path, default=Path("results/bose_quench"))
    args = ap.parse_args()

    grid = thermodynamic_grid(args.dim, args.points)
    t = np.linspace(0, args.t_end, int(round(args.t_end / 0.1)) + 1)
    zero, nn = (0,) * args.dim, (1,) + (0,) * (args.dim - 1)
    print(f"{'J/U':>6} {'depletion_eq':>13} {'hp_eq':>10} {'T_eff/U':>8}")
    for J in args.J:
        p = BoseParams(J)
        s = SeriesSet("t", t)
        s.add("depletion", bose.quench_correlator(p, grid, "hh", zero, t).real)
        s.add("hp_nn", bose.quench_correlator(p, grid, "hp", nn, t))
        s.add("pp_nn", bose.quench_correlator(p, grid, "hh", nn, t).real)
        write_csv(args.out / f"J{J:g}.csv", s)
        _, T_eff = bose.effective_temperature(p, grid)
        print(f"{J:6.3f} {bose.equilibrium_correlator(p, grid, 'onsite'):13.6f} "
              f"{bose.equilibrium_correlator(p, grid, 'hp', nn):10.6f} {T_eff:8.4f}")


if __name__ == "__main__":
    main()
