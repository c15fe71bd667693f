"""Spreading of connected number correlations after a Mott quench.

Prints the maximum group velocity and, for each distance r along an axis, the
first time |<n_0 n_r>_c| exceeds a fraction of its late-time mean.

    python scripts/light_cone.py --J 0.1 --dim 2
"""

import argparse

import numpy as np

from hubbard_quench import bose
from hubbard_quench import bose_second as bs
from hubbard_quench.bose import BoseParams
from hubbard_quench.lattice import thermodynamic_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--J", type=float, default=0.1)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--points", type=int, default=128)
    ap.add_argument("--t-end", type=float, default=200.0)
    ap.add_argument("--threshold", type=float, default=0.1)
    ap.add_argument("--rmax", type=int, default=12)
    args = ap.parse_args()

    p = BoseParams(args.J)
    report = bs.max_group_velocity(p, args.dim, "axis")
    print(f"v_max = {report.v_max:.5f} U at k = {np.round(report.k_argmax, 4)}")
    grid = thermodynamic_grid(args.dim, args.points)
    t = np.linspace(0, args.t_end, 4001)
    state = bose.quench_state_modes(p, grid, t)
    rs, arrival = np.arange(1, args.rmax + 1), []
    print(f"{'r':>3} {'arrival':>9} {'r / v_max':>10}")
    for r in rs:
        c = np.abs(bs.number_correlator(state, (int(r),) + (0,) * (args.dim - 1)))
        late = c[t > args.t_end / 2].mean()
        arrival.append(t[np.argmax(c > args.threshold * late)])
        print(f"{r:3d} {arrival[-1]:9.2f} {r / report.v_max:10.2f}")
    far = rs >= rs[len(rs) // 2]
    slope = np.polyfit(rs[far], np.array(arrival)[far], 1)[0]
    print(f"front speed from the outer half: {1 / slope:.5f} U")


if __name__ == "__main__":
    main()
