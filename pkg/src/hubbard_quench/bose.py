"""Bose-Hubbard Mott state to first order in 1/Z.

The dynamical variables are the doublon/holon correlators ``f11 = <h+ h>``,
``f12 = <h+ p>``, ``f21 = <p+ h>`` and ``f22 = <p+ p>`` in momentum space,
with ``h = |0><1|`` and ``p = |1><2|`` on each site.  At unit filling and
first order in 1/Z they obey, for every momentum independently,

    i d/dt f12 = (U - 3 J T_k) f12 - sqrt(2) J T_k (f11 + f22 + 1)
    i d/dt f21 = -(U - 3 J T_k) f21 + sqrt(2) J T_k (f11 + f22 + 1)
    i d/dt f11 = i d/dt f22 = sqrt(2) J T_k (f12 - f21)

with the conserved bilinear ``f11 (f11 + 1) - f12 f21`` and the
eigenfrequency ``omega_k^2 = U^2 - 6 J U T_k + J^2 T_k^2``.  Real-space
correlators are ``sum_k w_k f_k exp(i k.d)`` over a momentum grid.

Energies are in units of U unless ``U`` is passed explicitly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .lattice import HypercubicLattice, MomentumGrid
from .protocol import QuenchProtocol, rk4

SQRT2 = math.sqrt(2.0)

# stable-regime paths refuse J within this many U of the gap closure
CRITICAL_MARGIN = 1e-9


class UnstableRegimeError(ValueError):
    """A stable-regime quantity was requested at or beyond the Mott instability."""


class SuperfluidRegimeWarning(UserWarning):
    """Imaginary mode frequencies: exponential growth, 1/Z validity limited."""


class InvariantDriftWarning(UserWarning):
    """A conserved bilinear drifted beyond tolerance during integration."""


@dataclass(frozen=True)
class BoseParams:
    J: float
    U: float = 1.0

    def __post_init__(self):
        if not self.U > 0:
            raise ValueError(f"U must be positive, got {self.U}")
        if not self.J >= 0:
            raise ValueError(f"J must be non-negative, got {self.J}")


def omega_squared(params: BoseParams, Tk) -> np.ndarray | float:
    """``U^2 - 6 J U T_k + J^2 T_k^2``, in factored form so it vanishes exactly at J_c."""
    J, U = params.J, params.U
    JT = J * np.asarray(Tk, dtype=float)
    return (JT - critical_hopping(U)) * (JT - (3.0 + math.sqrt(8.0)) * U)


def omega(params: BoseParams, Tk):
    """Mode frequency ``|omega_k|`` and a flag marking imaginary (unstable) modes."""
    w2 = omega_squared(params, Tk)
    return np.sqrt(np.abs(w2)), w2 < 0


def critical_hopping(U: float = 1.0) -> float:
    """Hopping at which the Mott gap ``omega_{k=0}`` closes: ``(3 - sqrt 8) U``."""
    return (3.0 - math.sqrt(8.0)) * U


@dataclass(frozen=True)
class StabilityReport:
    unstable: np.ndarray
    gap_closed: bool
    k0_is_local_max: bool
    k0_positive_again: bool

    @property
    def all_stable(self) -> bool:
        return not self.unstable.any()


def classify_stability(params: BoseParams, grid: MomentumGrid) -> StabilityReport:
    J, U = params.J, params.U
    w2_k0 = float(omega_squared(params, 1.0))
    # d(omega^2)/dT at T = 1; positive means k = 0 is a maximum of omega^2
    slope_k0 = -6 * J * U + 2 * J * J
    return StabilityReport(
        unstable=np.asarray(omega_squared(params, grid.structure_factor()) < 0),
        gap_closed=w2_k0 <= 0,
        k0_is_local_max=slope_k0 > 0,
        k0_positive_again=J > U * (3 + math.sqrt(8.0)),
    )


def require_stable(params: BoseParams) -> None:
    if params.J >= critical_hopping(params.U) - CRITICAL_MARGIN * params.U:
        raise UnstableRegimeError(
            f"J/U = {params.J / params.U:.6g} is not below the critical value "
            f"{critical_hopping(1.0):.10f}; the Mott ground state and "
            "quasi-equilibrium sums are undefined there"
        )


def ground_modes(params: BoseParams, Tk):
    """Adiabatically connected ground state ``(f11, f12)``; ``f21 = f12``, ``f22 = f11``."""
    J, U = params.J, params.U
    Tk = np.asarray(Tk, dtype=float)
    w2 = omega_squared(params, Tk)
    if np.any(w2 <= 0):
        raise UnstableRegimeError(f"omega_k^2 <= 0 at J/U = {J / U:.6g}")
    w = np.sqrt(w2)
    # U - 3JT - w rewritten without cancellation: (U - 3JT)^2 - w^2 = 8 J^2 T^2
    f11 = 4 * J * J * Tk**2 / ((U - 3 * J * Tk + w) * w)
    f12 = SQRT2 * J * Tk / w
    return f11, f12


def ground_correlator(
    params: BoseParams,
    grid: MomentumGrid,
    kind: Literal["hh", "hp"],
    d: Sequence[int],
) -> complex:
    """Ground-state ``<h+_mu h_nu>`` (= ``<p+ p>``) or ``<h+_mu p_nu>`` (= ``<p+ h>``)."""
    if not any(d):
        raise ValueError("on-site values come from ground_depletion, not d = 0")
    require_stable(params)
    T, W = grid.T_classes(d)
    f11, f12 = ground_modes(params, T)
    if kind == "hh":
        return complex(W @ f11)
    if kind == "hp":
        return complex(W @ f12)
    raise ValueError(f"unknown ground correlator kind {kind!r}")


def ground_depletion(params: BoseParams, grid: MomentumGrid) -> float:
    """On-site ``<p+ p> = <h h+>``: probability of a doubly occupied (or empty) site."""
    require_stable(params)
    T, W = grid.T_classes()
    f11, _ = ground_modes(params, T)
    return float((W @ f11).real)


def ground_energy_per_site(params: BoseParams, grid: MomentumGrid) -> float:
    require_stable(params)
    T, W = grid.T_classes()
    w, _ = omega(params, T)
    J, U = params.J, params.U
    # (w - U) / 2 = (w^2 - U^2) / (2 (w + U))
    return float((W @ ((J * J * T * T - 6 * J * U * T) / (2 * (w + U)))).real)


def _oscillators(w2: np.ndarray, t: np.ndarray):
    """``(1 - cos(omega t)) / omega^2`` and ``sin(omega t) / omega`` for any sign of omega^2.

    Imaginary frequencies continue analytically to cosh/sinh.  Broadcasts
    ``t[:, None]`` against ``w2[None, :]``.
    """
    t = np.asarray(t, dtype=float)[:, None]
    w2 = np.asarray(w2, dtype=float)[None, :]
    small = np.abs(w2) < 1e-14
    pos = w2 > 0
    w = np.sqrt(np.where(small, 1.0, np.abs(w2)))
    wt = w * t
    cos_like = np.where(pos, np.cos(wt), np.cosh(np.where(pos, 0.0, wt)))
    sin_like = np.where(pos, np.sin(wt), np.sinh(np.where(pos, 0.0, wt)))
    safe_w2 = np.where(small, 1.0, w2)
    one_minus_cos = np.where(small, t * t / 2, (1 - cos_like) / safe_w2)
    sin_over = np.where(small, t, sin_like / w)
    return one_minus_cos, sin_over


def quench_modes(params: BoseParams, Tk, t):
    """Mode amplitudes ``(f11, f12, f21)`` at times ``t`` after a sudden quench from J = 0.

    Output arrays have shape ``(len(t), len(Tk))``; ``f22 = f11`` and ``f21 = conj(f12)``.
    """
    J, U = params.J, params.U
    Tk = np.atleast_1d(np.asarray(Tk, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    w2 = omega_squared(params, Tk)
    if np.any(w2 < 0):
        warnings.warn(
            "imaginary mode frequencies: superfluid-regime growth, 1/Z validity limited",
            SuperfluidRegimeWarning,
            stacklevel=2,
        )
    omc, sin_over = _oscillators(w2, t)
    s = SQRT2 * J * Tk
    f11 = 4 * J * J * Tk**2 * omc
    f12 = 1j * s * sin_over + s * (U - 3 * J * Tk) * omc
    return f11 + 0j, f12, np.conj(f12)


def quench_correlator(
    params: BoseParams,
    grid: MomentumGrid,
    kind: Literal["hh", "hp", "ph", "bb"],
    d: Sequence[int],
    t,
):
    """Real-space correlator at time(s) ``t`` after a sudden quench ``J: 0 -> params.J``.

    ``hh`` is ``<h+_mu h_nu> = <p+_mu p_nu>`` (``d = 0`` gives the on-site
    depletion), ``hp`` is ``<h+_mu p_nu>``, ``ph`` is ``<p+_mu h_nu>`` and ``bb``
    is ``<b+_mu b_nu>``; ``d = x_mu - x_nu``.
    """
    scalar = np.ndim(t) == 0
    T, W = grid.T_classes(d)
    f11, f12, f21 = quench_modes(params, T, t)
    if kind == "hh":
        out = f11 @ W
    elif kind == "hp":
        out = f12 @ W
    elif kind == "ph":
        out = f21 @ W
    elif kind == "bb":
        out = (3 * f11 + SQRT2 * (f12 + f21)) @ W
    else:
        raise ValueError(f"unknown quench correlator kind {kind!r}")
    return complex(out[0]) if scalar else out


def equilibrium_modes(params: BoseParams, Tk):
    """Time-averaged ``(f11, f12)`` after the quench (oscillating terms dropped)."""
    J, U = params.J, params.U
    Tk = np.asarray(Tk, dtype=float)
    w2 = omega_squared(params, Tk)
    f11 = 4 * J * J * Tk**2 / w2
    f12 = SQRT2 * J * Tk * (U - 3 * J * Tk) / w2
    return f11, f12


def equilibrium_correlator(
    params: BoseParams,
    grid: MomentumGrid,
    kind: Literal["hh", "hp", "bb", "onsite"],
    d: Sequence[int] | None = None,
) -> float:
    """Quasi-equilibrium value reached after a sudden quench from J = 0."""
    require_stable(params)
    if kind == "onsite":
        d = None
    elif d is None:
        raise ValueError(f"{kind} needs a separation")
    T, W = grid.T_classes(d)
    f11, f12 = equilibrium_modes(params, T)
    if kind in ("hh", "onsite"):
        val = W @ f11
    elif kind == "hp":
        val = W @ f12
    elif kind == "bb":
        val = W @ (3 * f11 + 2 * SQRT2 * f12)
    else:
        raise ValueError(f"unknown equilibrium correlator kind {kind!r}")
    return float(val.real)


def effective_temperature(params: BoseParams, grid: MomentumGrid) -> tuple[float, float]:
    """``(beta, T)`` of the grand-canonical one-site state (mu = U/2) with the same depletion."""
    p2 = equilibrium_correlator(params, grid, "onsite")
    if p2 <= 0:
        raise ValueError("zero depletion (J = 0): effective temperature is zero")
    if p2 >= 0.5:
        raise ValueError(f"depletion {p2:.4g} >= 1/2 leaves the perturbative window")
    beta = -2.0 / params.U * math.log(2 * p2)
    return beta, 1.0 / beta


def thermal_onsite(beta: float, U: float = 1.0) -> tuple[float, float, float]:
    """Occupation probabilities ``(p0, p1, p2)`` of the one-site thermal state at mu = U/2."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    x = math.exp(-beta * U / 2)
    return x / 2, 1 - x, x / 2


def thermal_pair_first_order(
    params: BoseParams, lattice: HypercubicLattice, d: Sequence[int]
) -> float:
    """Thermal ``<h+_mu p_nu>`` to first order in J/U: ``sqrt(2) J T_{mu nu} / (Z U)``.

    ``<h+ h>`` and ``<p+ p>`` vanish at this order.
    """
    if not any(d):
        return 0.0
    bonds = lattice.bond_count(d)
    return SQRT2 * params.J * bonds / (lattice.coordination * params.U)


def bose_rhs(J: float, U: float, Tk: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Time derivative of ``y = (f11, f12, f21, f22)`` (shape ``(4, n)``)."""
    f11, f12, f21, f22 = y
    s = SQRT2 * J * Tk
    a = U - 3 * J * Tk
    src = s * (f11 + f22 + 1)
    d11 = -1j * s * (f12 - f21)
    return np.stack([
        d11,
        -1j * (a * f12 - src),
        -1j * (-a * f21 + src),
        d11,
    ])


def bose_invariant(y: np.ndarray) -> np.ndarray:
    """``f11 (f11 + 1) - f12 f21`` along the last axes of ``y``."""
    f11, f12, f21 = y[..., 0, :], y[..., 1, :], y[..., 2, :]
    return f11 * (f11 + 1) - f12 * f21


@dataclass(frozen=True, eq=False)
class BoseTrajectory:
    """Mode amplitudes ``f[t, a, k]`` with ``a`` indexing (f11, f12, f21, f22).

    ``k`` runs over distinct ``T_k`` classes of ``grid`` when the initial state
    depends on ``k`` only through ``T_k``, otherwise over all grid points.
    """

    times: np.ndarray
    f: np.ndarray
    grid: MomentumGrid
    compressed: bool
    invariant_drift: np.ndarray

    def modes(self) -> np.ndarray:
        """Amplitudes on every grid point, shape ``(n_t, 4, n_grid)``."""
        return self.grid.expand(self.f) if self.compressed else self.f

    def _sum(self, values: np.ndarray, d) -> np.ndarray:
        if self.compressed:
            _, W = self.grid.T_classes(d)
            return values @ W
        return self.grid.fourier(values, d)

    def correlator(self, kind: Literal["hh", "hp", "ph", "pp", "bb"], d: Sequence[int]):
        f11, f12, f21, f22 = (self.f[:, i, :] for i in range(4))
        values = {
            "hh": f11,
            "pp": f22,
            "hp": f12,
            "ph": f21,
            "bb": f11 + SQRT2 * (f12 + f21) + 2 * f22,
        }[kind]
        return self._sum(values, d)

    def depletion(self) -> np.ndarray:
        return self.correlator("hh", (0,) * self.grid.dimension).real


def integrate_modes(
    protocol: QuenchProtocol,
    U: float,
    grid: MomentumGrid,
    t_end: float,
    dt: float = 1e-3,
    initial: np.ndarray | None = None,
    record_every: int = 1,
    drift_tolerance: float = 1e-6,
) -> BoseTrajectory:
    """RK4 integration of the first-order mode equations under ``J(t) = protocol(t)``.

    ``initial`` defaults to the J = 0 Mott state (all amplitudes zero); a
    caller-supplied state has shape ``(4, len(grid))``.
    """
    if initial is None:
        T, _ = grid.T_classes()
        y0 = np.zeros((4, len(T)), dtype=complex)
        compressed = True
    else:
        T = grid.structure_factor()
        y0 = np.asarray(initial, dtype=complex).reshape(4, len(grid))
        compressed = False

    def rhs(t, y):
        return bose_rhs(protocol(t), U, T, y)

    times, f = rk4(rhs, y0, t_end, dt, record_every)
    C = bose_invariant(f)
    drift = np.max(np.abs(C - C[0]), axis=1)
    if drift.max() > drift_tolerance:
        warnings.warn(
            f"conserved bilinear drifted by {drift.max():.3g} (tolerance {drift_tolerance:g})",
            InvariantDriftWarning,
            stacklevel=2,
        )
    return BoseTrajectory(times, f, grid, compressed, drift)


@dataclass(frozen=True, eq=False)
class BoseModeState:
    """Mode amplitudes on a grid, last axis over momenta (or T_k classes if ``compressed``)."""

    f11: np.ndarray
    f12: np.ndarray
    f21: np.ndarray
    f22: np.ndarray
    grid: MomentumGrid
    compressed: bool = False
    t: float | np.ndarray | None = None

    def fourier(self, values: np.ndarray, d: Sequence[int]):
        if self.compressed:
            _, W = self.grid.T_classes(d)
            return values @ W
        return self.grid.fourier(values, d)


def ground_state_modes(params: BoseParams, grid: MomentumGrid) -> BoseModeState:
    require_stable(params)
    T, _ = grid.T_classes()
    f11, f12 = ground_modes(params, T)
    return BoseModeState(f11 + 0j, f12 + 0j, f12 + 0j, f11 + 0j, grid, compressed=True)


def quench_state_modes(params: BoseParams, grid: MomentumGrid, t) -> BoseModeState:
    """Mode amplitudes at times ``t`` after the sudden quench (leading axis over ``t``)."""
    T, _ = grid.T_classes()
    f11, f12, f21 = quench_modes(params, T, t)
    if np.ndim(t) == 0:
        f11, f12, f21 = f11[0], f12[0], f21[0]
    return BoseModeState(f11, f12, f21, f11, grid, compressed=True, t=t)
