"""Fermi-Hubbard charge modes around the Neel state, first order in 1/Z.

Half filling on a bipartite lattice.  In the spin-down sector the four
charge correlators ``f0A0A, f0A1B, f1B0A, f1B1B`` (occupations of the
opposite spin on sublattices A/B) obey, per momentum,

    i d/dt f0A0A = J T_k (f1B0A - f0A1B)
    i d/dt f0A1B = J T_k (f1B1B - f0A0A) + (U - a) f0A1B - J T_k
    i d/dt f1B0A = J T_k (f0A0A - f1B1B) - (U - a) f1B0A + J T_k
    i d/dt f1B1B = J T_k (f0A1B - f1B0A)

with ``omega_k^2 = 4 J^2 T_k^2 + (U - a)^2`` and conserved bilinear
``(f1B1B - 1) f1B1B + f0A1B f1B0A``.  ``a`` is the staggered field that
makes the Neel state the unique J = 0 ground state.

The soft (spin-changing) sectors have no first-order source at half
filling; they are carried by :func:`integrate_charge_modes` only to verify
that they stay at zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .bose import InvariantDriftWarning, _oscillators
from .lattice import MomentumGrid
from .protocol import QuenchProtocol, rk4

Kind = Literal["symmetric_11", "mixed_10"]


class SublatticeError(ValueError):
    """Correlator kind does not connect the sublattices joined by the separation."""


@dataclass(frozen=True)
class FermiParams:
    J: float
    U: float = 1.0
    a: float = 0.0

    def __post_init__(self):
        if not self.U > 0:
            raise ValueError(f"U must be positive, got {self.U}")
        if not self.J >= 0:
            raise ValueError(f"J must be non-negative, got {self.J}")
        if not self.a >= 0:
            raise ValueError(f"staggered field a must be non-negative, got {self.a}")


def charge_omega(params: FermiParams, Tk):
    Tk = np.asarray(Tk, dtype=float)
    return np.sqrt(4 * params.J**2 * Tk**2 + (params.U - params.a) ** 2)


def spin_sector_eigenmodes(params: FermiParams, Tk):
    """Soft/hard branch frequencies ``(omega_plus, omega_minus)``."""
    root = charge_omega(params, Tk)
    base = params.U + params.a
    return (base + root) / 2, (base - root) / 2


def heisenberg_coupling(params: FermiParams, Z: int) -> float:
    """Exchange coupling ``2 J^2 / (Z^2 U)`` of the effective spin model."""
    if Z < 1:
        raise ValueError("Z must be >= 1")
    return 2 * params.J**2 / (Z**2 * params.U)


def check_sublattice(kind: Kind, d: Sequence[int]) -> None:
    """``symmetric_11`` joins equal sublattices (even ``sum d``), ``mixed_10`` opposite ones."""
    odd = sum(d) % 2 == 1
    if kind == "symmetric_11" and odd:
        raise SublatticeError(f"symmetric_11 needs an even separation, got {tuple(d)}")
    if kind == "mixed_10" and not odd:
        raise SublatticeError(f"mixed_10 needs an odd separation (A to B), got {tuple(d)}")
    if kind not in ("symmetric_11", "mixed_10"):
        raise ValueError(f"unknown correlator kind {kind!r}")


def ground_modes(params: FermiParams, Tk):
    """Ground-state ``(f1B1B, f1B0A)``; ``f0A0A = -f1B1B`` and ``f0A1B = f1B0A``."""
    Tk = np.asarray(Tk, dtype=float)
    w = charge_omega(params, Tk)
    return 0.5 * (1 - (params.U - params.a) / w), params.J * Tk / w


def fermi_ground_correlator(
    params: FermiParams, grid: MomentumGrid, kind: Kind, d: Sequence[int]
) -> complex:
    """Ground-state ``f1B1B`` (``symmetric_11``) or ``f1B0A`` (``mixed_10``) at separation d."""
    check_sublattice(kind, d)
    T, W = grid.T_classes(d)
    f11, f10 = ground_modes(params, T)
    return complex(W @ (f11 if kind == "symmetric_11" else f10))


def fermi_depletion(params: FermiParams, grid: MomentumGrid) -> float:
    """Ground-state double occupancy ``<n_up n_down>`` (equal to the empty-site probability)."""
    T, W = grid.T_classes()
    f11, _ = ground_modes(params, T)
    return float((W @ f11).real)


def quench_modes(params: FermiParams, Tk, t):
    """``(f1B1B, f1B0A)`` after a sudden quench from the Neel state, shape ``(len(t), len(Tk))``.

    ``f0A0A = -f1B1B`` and ``f0A1B = conj(f1B0A)``.
    """
    J = params.J
    Ueff = params.U - params.a
    Tk = np.atleast_1d(np.asarray(Tk, dtype=float))
    w2 = charge_omega(params, Tk) ** 2
    omc, sin_over = _oscillators(w2, np.atleast_1d(t))
    f11 = 2 * J * J * Tk**2 * omc
    f10 = J * Tk * Ueff * omc - 1j * J * Tk * sin_over
    return f11 + 0j, f10


def fermi_quench_correlator(
    params: FermiParams, grid: MomentumGrid, kind: Kind, d: Sequence[int], t
):
    check_sublattice(kind, d)
    scalar = np.ndim(t) == 0
    T, W = grid.T_classes(d)
    f11, f10 = quench_modes(params, T, t)
    out = (f11 if kind == "symmetric_11" else f10) @ W
    return complex(out[0]) if scalar else out


def fermi_equilibrium_correlator(
    params: FermiParams, grid: MomentumGrid, kind: Kind, d: Sequence[int]
) -> float:
    """Time average of :func:`fermi_quench_correlator` (oscillating terms dropped)."""
    check_sublattice(kind, d)
    T, W = grid.T_classes(d)
    w2 = charge_omega(params, T) ** 2
    J = params.J
    if kind == "symmetric_11":
        vals = 2 * J * J * T**2 / w2
    else:
        vals = J * T * (params.U - params.a) / w2
    return float((W @ vals).real)


def fermi_double_occupancy(params: FermiParams, grid: MomentumGrid, t):
    """Probability of a doubly occupied (equivalently, empty) site after the quench."""
    zero = (0,) * grid.dimension
    out = fermi_quench_correlator(params, grid, "symmetric_11", zero, t)
    return out.real


def charge_rhs(J: float, Ueff: float, Tk: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Time derivative of ``y = (f0A0A, f0A1B, f1B0A, f1B1B, soft...)``.

    Rows 4-7 are one pair of soft-sector correlators (``f0A0B``, ``f1B0B``)
    and the decoupled ``f1A0B``, ``f0B1A``; none of them has a source term.
    """
    a, b, c, d = y[:4]
    s = J * Tk
    out = np.empty_like(y)
    out[0] = -1j * s * (c - b)
    out[1] = -1j * (s * (d - a) + Ueff * b - s)
    out[2] = -1j * (s * (a - d) - Ueff * c + s)
    out[3] = -1j * s * (b - c)
    if len(y) > 4:
        e, f, g, h = y[4:8]
        out[4] = -1j * s * f
        out[5] = -1j * (s * e - Ueff * f)
        out[6] = 1j * Ueff * g
        out[7] = -1j * Ueff * h
    return out


def fermi_invariant(y: np.ndarray) -> np.ndarray:
    """``(f1B1B - 1) f1B1B + f0A1B f1B0A`` along the last axes of ``y``."""
    b, c, d = y[..., 1, :], y[..., 2, :], y[..., 3, :]
    return (d - 1) * d + b * c


@dataclass(frozen=True, eq=False)
class FermiTrajectory:
    """Charge amplitudes ``f[t, a, class]`` with ``a`` indexing (f0A0A, f0A1B, f1B0A, f1B1B).

    ``soft_max`` is the largest soft-sector amplitude seen at each step.
    """

    times: np.ndarray
    f: np.ndarray
    grid: MomentumGrid
    invariant_drift: np.ndarray
    soft_max: np.ndarray

    def modes(self) -> np.ndarray:
        return self.grid.expand(self.f)

    def correlator(self, name: Literal["0A0A", "0A1B", "1B0A", "1B1B"], d: Sequence[int]):
        idx = {"0A0A": 0, "0A1B": 1, "1B0A": 2, "1B1B": 3}[name]
        _, W = self.grid.T_classes(d)
        return self.f[:, idx, :] @ W

    def double_occupancy(self) -> np.ndarray:
        return self.correlator("1B1B", (0,) * self.grid.dimension).real


def integrate_charge_modes(
    protocol: QuenchProtocol,
    params: FermiParams,
    grid: MomentumGrid,
    t_end: float,
    dt: float = 1e-3,
    record_every: int = 1,
    drift_tolerance: float = 1e-6,
    staggered_field=None,
) -> FermiTrajectory:
    """RK4 integration from the Neel state under ``J(t) = protocol(t)``.

    ``params.J`` is ignored in favour of the protocol; ``staggered_field`` is
    an optional callable ``a(t)`` overriding the constant ``params.a``.
    """
    T, _ = grid.T_classes()
    y0 = np.zeros((8, len(T)), dtype=complex)
    field = staggered_field or (lambda t: params.a)

    def rhs(t, y):
        return charge_rhs(protocol(t), params.U - field(t), T, y)

    times, f = rk4(rhs, y0, t_end, dt, record_every)
    C = fermi_invariant(f[:, :4, :])
    drift = np.max(np.abs(C - C[0]), axis=1)
    if drift.max() > drift_tolerance:
        warnings.warn(
            f"conserved bilinear drifted by {drift.max():.3g} (tolerance {drift_tolerance:g})",
            InvariantDriftWarning,
            stacklevel=2,
        )
    soft = np.abs(f[:, 4:, :]).max(axis=(1, 2))
    return FermiTrajectory(times, f[:, :4, :], grid, drift, soft)
