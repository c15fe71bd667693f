"""Hypercubic lattices, momentum grids and the hopping structure factor.

Every analytic formula in this package only needs the structure factor
``T_k = (1/D) sum_i cos(k_i)`` of a periodic hypercubic lattice with
nearest-neighbour hopping, normalised so that ``T_{k=0} = 1``.  Real-space
quantities are recovered from momentum sums ``sum_k w_k g(k) exp(i k.d)``
with grid weights ``w_k`` that add up to one.

An axis of length 2 is a special case: both periodic bonds connect the same
pair of sites and both are kept, so the adjacency entry is 2 and every row of
the adjacency matrix still sums to ``Z = 2D``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Sequence

import numpy as np

Separation = tuple[int, ...]
GridMode = Literal["finite", "thermodynamic"]

DEFAULT_POINTS_PER_AXIS = 64


@dataclass(frozen=True)
class HypercubicLattice:
    """Periodic hypercubic lattice with row-major site indexing."""

    extents: tuple[int, ...]
    periodic: bool = True

    @property
    def dimension(self) -> int:
        return len(self.extents)

    @property
    def coordination(self) -> int:
        return 2 * self.dimension

    @property
    def num_sites(self) -> int:
        return int(np.prod(self.extents))

    def coords(self) -> np.ndarray:
        """Integer coordinates of all sites, shape ``(N, D)``, row-major order."""
        grids = np.meshgrid(*[np.arange(n) for n in self.extents], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def site_index(self, coord: Sequence[int]) -> int:
        wrapped = [int(c) % n for c, n in zip(coord, self.extents)]
        return int(np.ravel_multi_index(wrapped, self.extents))

    def adjacency(self) -> np.ndarray:
        """Adjacency matrix ``T_{mu nu}`` (bond multiplicities, rows sum to Z)."""
        n = self.num_sites
        T = np.zeros((n, n), dtype=int)
        for mu, x in enumerate(self.coords()):
            for axis in range(self.dimension):
                for step in (1, -1):
                    y = x.copy()
                    y[axis] += step
                    T[mu, self.site_index(y)] += 1
        return T

    def sublattice(self) -> np.ndarray:
        """0 for sublattice A (even coordinate sum), 1 for B."""
        return self.coords().sum(axis=1) % 2

    def is_bipartite(self) -> bool:
        return all(n % 2 == 0 for n in self.extents)

    def reduce(self, d: Sequence[int]) -> Separation:
        """Minimum-image representative of a separation vector."""
        out = []
        for di, n in zip(d, self.extents):
            r = int(di) % n
            if r > n // 2:
                r -= n
            out.append(r)
        return tuple(out)

    def bond_count(self, d: Sequence[int]) -> int:
        """Adjacency entry ``T_{mu nu}`` for ``x_mu - x_nu = d``."""
        return int(self.adjacency()[self.site_index(d), 0])


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Momentum points ``k`` (shape ``(n, D)``) with weights summing to one."""

    k: np.ndarray
    weights: np.ndarray
    mode: GridMode
    points_per_axis: tuple[int, ...] = field(default=())

    def __post_init__(self):
        self.k.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.k.shape[1]

    def __len__(self) -> int:
        return len(self.weights)

    def structure_factor(self) -> np.ndarray:
        return structure_factor(self.k)

    def phase(self, d: Sequence[int]) -> np.ndarray:
        """``exp(i k.d)`` for every grid point."""
        return np.exp(1j * (self.k @ np.asarray(d, dtype=float)))

    def fourier(self, values: np.ndarray, d: Sequence[int]) -> complex | np.ndarray:
        """``sum_k w_k values[..., k] exp(i k.d)`` over the last axis."""
        return np.asarray(values) @ (self.weights * self.phase(d))

    def describe(self) -> dict:
        return {"mode": self.mode, "points_per_axis": list(self.points_per_axis)}

    @cached_property
    def _T_classes(self) -> tuple[np.ndarray, np.ndarray]:
        # T_k of symmetry-related momenta agree only up to rounding
        T = np.round(self.structure_factor(), 13)
        values, inverse = np.unique(T, return_inverse=True)
        return values, inverse

    def T_classes(self, d: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Distinct ``T_k`` values and their summed weights ``sum w_k exp(i k.d)``.

        Any momentum sum whose integrand depends on ``k`` only through
        ``T_k`` and ``exp(i k.d)`` collapses onto these classes exactly.
        """
        values, inverse = self._T_classes
        w = self.weights if d is None else self.weights * self.phase(d)
        W = np.zeros(len(values), dtype=complex)
        np.add.at(W, inverse, w)
        return values, W

    def expand(self, class_values: np.ndarray) -> np.ndarray:
        """Map per-class values (last axis) back onto every grid point."""
        return np.asarray(class_values)[..., self._T_classes[1]]


def build_lattice(D: int, L: Sequence[int]) -> HypercubicLattice:
    if D < 1:
        raise ValueError(f"dimension must be >= 1, got {D}")
    L = tuple(int(n) for n in L)
    if len(L) != D:
        raise ValueError(f"expected {D} extents, got {len(L)}")
    if any(n < 2 for n in L):
        raise ValueError(f"every extent must be >= 2, got {list(L)}")
    return HypercubicLattice(L)


def structure_factor(k) -> np.ndarray | float:
    """``T_k = mean_i cos(k_i)``; ``k`` has the momentum components on its last axis."""
    k = np.asarray(k, dtype=float)
    T = np.cos(k).mean(axis=-1)
    return float(T) if T.ndim == 0 else T


def _wrap(k: np.ndarray) -> np.ndarray:
    return (k + np.pi) % (2 * np.pi) - np.pi


def momentum_grid(
    lattice: HypercubicLattice,
    mode: GridMode = "finite",
    points_per_axis: int | None = None,
) -> MomentumGrid:
    """Brillouin-zone grid for momentum sums.

    ``finite`` enumerates the N allowed momenta ``2 pi n_i / L_i`` of the
    lattice, each with weight 1/N.  ``thermodynamic`` is a uniform midpoint
    rule on ``[-pi, pi)^D`` approximating the infinite-lattice integral.
    """
    D = lattice.dimension
    if mode == "finite":
        axes = [_wrap(2 * np.pi * np.arange(n) / n) for n in lattice.extents]
        per_axis = lattice.extents
    elif mode == "thermodynamic":
        if points_per_axis is None:
            raise ValueError("thermodynamic grid needs points_per_axis")
        if points_per_axis < 2:
            raise ValueError(f"points_per_axis must be >= 2, got {points_per_axis}")
        m = int(points_per_axis)
        axes = [-np.pi + (np.arange(m) + 0.5) * 2 * np.pi / m] * D
        per_axis = (m,) * D
    else:
        raise ValueError(f"unknown grid mode {mode!r}")
    mesh = np.meshgrid(*axes, indexing="ij")
    k = np.stack([g.ravel() for g in mesh], axis=1)
    weights = np.full(len(k), 1.0 / len(k))
    return MomentumGrid(k, weights, mode, tuple(per_axis))


def thermodynamic_grid(D: int, points_per_axis: int = DEFAULT_POINTS_PER_AXIS) -> MomentumGrid:
    """Midpoint grid for the infinite D-dimensional hypercubic lattice."""
    return momentum_grid(HypercubicLattice((2,) * D), "thermodynamic", points_per_axis)


def separations_of_interest(
    lattice: HypercubicLattice, max_graph_distance: int
) -> list[Separation]:
    """Canonical separations (non-negative components) up to a Manhattan distance.

    Components are capped at ``L_i // 2`` so every entry is a distinct
    minimum-image vector.  Sorted by Euclidean length, ties broken with the
    first axis varying fastest.
    """
    if max_graph_distance < 0:
        raise ValueError("max_graph_distance must be >= 0")
    ranges = [range(min(max_graph_distance, n // 2) + 1) for n in lattice.extents]
    out = [d for d in itertools.product(*ranges) if sum(d) <= max_graph_distance]
    return sorted(out, key=lambda d: (sum(x * x for x in d), tuple(reversed(d))))


def is_nearest_neighbor(d: Sequence[int]) -> bool:
    return sum(abs(x) for x in d) == 1
