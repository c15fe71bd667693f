"""Nearest-neighbour coherence after a Mott quench in two dimensions.

Compares the diagonal-ensemble value of the symmetrised <b+_0 b_d> with the
largest canonical thermal value over temperature, for every 2D lattice whose
Hilbert space fits under the dimension cap.

    python scripts/nonthermal_2d.py --J 0.1
"""

import argparse

import numpy as np

from hubbard_quench import ed
from hubbard_quench.lattice import build_lattice


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--J", type=float, default=0.1)
    ap.add_argument("--lattice", type=int, nargs=2, action="append")
    args = ap.parse_args()
    lattices = args.lattice or [[2, 2], [2, 3], [2, 4]]

    temps = np.geomspace(1e-3, 1e3, 600)
    print(f"{'lattice':>8} {'d':>7} {'diagonal':>9} {'thermal_max':>12} {'at_T':>8} {'nonthermal':>10}")
    for L in lattices:
        lat = build_lattice(2, L)
        H, basis = ed.build_bose_hamiltonian(lat, args.J)
        dec = ed.diagonalize(H)
        psi = basis.mott_state()
        for d in ((0, 1), (1, 0)):
            O = ed.bose_hopping(basis, 0, lat.site_index(d))
            O = ((O + O.T) / 2).tocsr()
            diag = ed.diagonal_ensemble_average(dec, psi, O)
            curve = ed.thermal_curve(dec, O, temps)
            i = int(np.argmax(curve))
            print(f"{'x'.join(map(str, L)):>8} {str(d):>7} {diag:9.5f} {curve[i]:12.5f} "
                  f"{temps[i]:8.4f} {str(diag > curve[i]):>10}")


if __name__ == "__main__":
    main()
