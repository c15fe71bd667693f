"""Fermi-Hubbard quench from the Neel state.

Writes the double occupancy and the nearest-neighbour mixed correlator after a
sudden quench on the square or cubic lattice, and compares the chain result
with exact diagonalization of a 6-site ring.

    python scripts/fermi_quench.py --J 0.1 0.3 0.5
"""

import argparse
from pathlib import Path

import numpy as np

from hubbard_quench import ed, fermi
from hubbard_quench.fermi import FermiParams
from hubbard_quench.io import SeriesSet, write_csv
from hubbard_quench.lattice import build_lattice, momentum_grid, thermodynamic_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--J", type=float, nargs="+", default=[0.1, 0.3, 0.5])
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--points", type=int, default=48)
    ap.add_argument("--t-end", type=float, default=60.0)
    ap.add_argument("--out", type=Path, default=Path("results/fermi_quench"))
    args = ap.parse_args()

    grid = thermodynamic_grid(args.dim, args.points)
    chain = build_lattice(1, [6])
    chain_grid = momentum_grid(chain, "finite")
    t = np.linspace(0, args.t_end, int(round(args.t_end / 0.1)) + 1)
    nn = (1,) + (0,) * (args.dim - 1)
    print(f"{'J/U':>6} {'docc_eq':>9} {'docc_ground':>12} {'chain_1/Z':>10} {'chain_ED':>9}")
    for J in args.J:
        p = FermiParams(J)
        s = SeriesSet("t", t)
        s.add("double_occupancy", fermi.fermi_double_occupancy(p, grid, t))
        s.add("mixed_10_nn", fermi.fermi_quench_correlator(p, grid, "mixed_10", nn, t))
        write_csv(args.out / f"J{J:g}.csv", s)
        H, basis = ed.build_fermi_hamiltonian(chain, J)
        dec = ed.diagonalize(H)
        docc_ed = ed.diagonal_ensemble_average(dec, basis.neel_state(chain), ed.double_occupancy(basis, 0))
        eq = fermi.fermi_equilibrium_correlator(p, grid, "symmetric_11", (0,) * args.dim)
        chain_eq = fermi.fermi_equilibrium_correlator(p, chain_grid, "symmetric_11", (0,))
        print(f"{J:6.3f} {eq:9.5f} {fermi.fermi_depletion(p, grid):12.5f} {chain_eq:10.5f} {docc_ed:9.5f}")


if __name__ == "__main__":
    main()
