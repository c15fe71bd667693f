"""Exact diagonalization against the 1/Z expansion after a Mott quench.

For each small lattice: the ED time series of p(0), p(2) on one site, its
diagonal-ensemble value, the 1/Z quasi-equilibrium prediction evaluated on the
same finite momentum grid, and the effective temperature from the canonical
thermal scan.

    python scripts/ed_vs_expansion.py --lattice 6 --lattice 2 3
"""

import argparse
from pathlib import Path

import numpy as np

from hubbard_quench import bose, ed
from hubbard_quench.bose import BoseParams
from hubbard_quench.io import SeriesSet, write_csv
from hubbard_quench.lattice import build_lattice, momentum_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lattice", type=int, nargs="+", action="append")
    ap.add_argument("--J", type=float, default=0.1)
    ap.add_argument("--t-end", type=float, default=50.0)
    ap.add_argument("--out", type=Path, default=Path("results/ed_vs_expansion"))
    args = ap.parse_args()
    lattices = args.lattice or [[6], [2, 3]]

    t = np.linspace(0, args.t_end, int(round(args.t_end / 0.1)) + 1)
    print(f"{'lattice':>8} {'dim':>6} {'p0_diag':>9} {'p2_diag':>9} {'p2_1/Z':>9} {'ratio':>6} {'T_eff':>7}")
    for L in lattices:
        lat = build_lattice(len(L), L)
        H, basis = ed.build_bose_hamiltonian(lat, args.J)
        dec = ed.diagonalize(H)
        psi = basis.mott_state()
        P0, P2 = ed.occupation_probability(basis, 0, 0), ed.occupation_probability(basis, 0, 2)
        p0 = ed.diagonal_ensemble_average(dec, psi, P0)
        p2 = ed.diagonal_ensemble_average(dec, psi, P2)
        grid = momentum_grid(lat, "finite")
        p = BoseParams(args.J)
        eq = bose.equilibrium_correlator(p, grid, "onsite")
        T_eff = ed.effective_temperature(dec, P2, p2)
        tag = "x".join(map(str, L))
        s = SeriesSet("t", t)
        s.add("p0_ed", ed.expectation_series(dec, psi, P0, t))
        s.add("p2_ed", ed.expectation_series(dec, psi, P2, t))
        s.add("p2_expansion", bose.quench_correlator(p, grid, "hh", (0,) * len(L), t).real)
        write_csv(args.out / f"{tag}.csv", s)
        print(f"{tag:>8} {basis.dim:6d} {p0:9.5f} {p2:9.5f} {eq:9.5f} {eq / p2:6.3f} {T_eff:7.4f}")


if __name__ == "__main__":
    main()
