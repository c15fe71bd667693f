"""Second-order (1/Z^2) Bose-Hubbard observables.

Density-density and parity correlations vanish at first order; at second
order they are double momentum sums of products of first-order mode
amplitudes.  Since ``exp(i(p+q).d)`` factorises, each double sum is a
product of two single sums

    A(d) = sum_k w_k f11_k e^{ik.d},  B12(d) = sum_k w_k f12_k e^{ik.d},
    B21(d) = sum_k w_k f21_k e^{ik.d}

so that ``number = 2 (A^2 - B12 B21)`` and ``parity = 8 (A^2 + B12 B21)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy import optimize

from .bose import BoseModeState, BoseParams, UnstableRegimeError, omega_squared, require_stable
from .lattice import MomentumGrid, structure_factor


def renormalized_omega(params: BoseParams, f0: float, Tk, as_printed: bool = False):
    """Mode frequency with the hopping reduced to ``J (1 - 3 f0)`` by the on-site depletion f0.

    ``as_printed=True`` drops the factor U from the linear term, which only
    matters when U != 1.
    """
    if not 0 <= f0 < 1 / 3:
        raise ValueError(f"depletion f0 must lie in [0, 1/3), got {f0}")
    J, U = params.J, params.U
    Tk = np.asarray(Tk, dtype=float)
    r = 1 - 3 * f0
    linear = 6 * J * Tk * r * (1.0 if as_printed else U)
    return np.sqrt(U * U - linear + (J * Tk * r) ** 2)


def _single_sums(state: BoseModeState, d: Sequence[int]):
    if not any(d):
        raise ValueError("density and parity correlators are defined for d != 0")
    return state.fourier(state.f11, d), state.fourier(state.f12, d), state.fourier(state.f21, d)


def _real(x, what: str):
    x = np.asarray(x)
    if np.max(np.abs(x.imag), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(x.real), initial=0.0)):
        raise ArithmeticError(f"{what} has an imaginary part {np.max(np.abs(x.imag)):.3g}")
    return float(x.real) if x.ndim == 0 else x.real


def number_correlator(state: BoseModeState, d: Sequence[int]):
    """``<n_mu n_nu> - <n_mu><n_nu>`` for ``x_mu - x_nu = d``."""
    A, B12, B21 = _single_sums(state, d)
    return _real(2 * (A * A - B12 * B21), "number correlator")


def parity_correlator(state: BoseModeState, d: Sequence[int]):
    """Connected correlator of the site parities ``(-1)^{n_mu}`` and ``(-1)^{n_nu}``."""
    A, B12, B21 = _single_sums(state, d)
    return _real(8 * (A * A + B12 * B21), "parity correlator")


def double_sum(state: BoseModeState, d: Sequence[int], sign: int) -> complex:
    """Literal ``sum_p sum_q w_p w_q e^{i(p+q).d} (f11_p f11_q + sign f12_p f21_q)``.

    O(N^2) reference for the factorised forms; only for a single time slice
    on an uncompressed grid.
    """
    grid = state.grid
    if state.compressed:
        f11, f12, f21 = (grid.expand(x) for x in (state.f11, state.f12, state.f21))
    else:
        f11, f12, f21 = state.f11, state.f12, state.f21
    wph = grid.weights * grid.phase(d)
    total = 0j
    for p in range(len(grid)):
        total += wph[p] * np.sum(wph * (f11[p] * f11 + sign * f12[p] * f21))
    return total


@dataclass(frozen=True)
class LightConeReport:
    direction: str
    v_max: float
    k_argmax: tuple[float, ...]


def group_velocity(params: BoseParams, k) -> np.ndarray:
    """``grad_k omega_k`` for momenta on the last axis of ``k``."""
    J, U = params.J, params.U
    k = np.asarray(k, dtype=float)
    D = k.shape[-1]
    T = structure_factor(k)
    w = np.sqrt(omega_squared(params, T))
    dT = -np.sin(k) / D
    return J * dT * ((J * T - 3 * U) / w)[..., None]


def max_group_velocity(
    params: BoseParams,
    dimension: int,
    direction: Literal["axis", "diagonal"] = "axis",
    grid_resolution: int = 32,
) -> LightConeReport:
    """Largest ``|v_k . u|`` over the Brillouin zone for ``u`` along an axis or the main diagonal."""
    require_stable(params)
    D = dimension
    if direction == "axis":
        u = np.eye(D)[0]
    elif direction == "diagonal":
        u = np.ones(D) / math.sqrt(D)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if params.J == 0:
        return LightConeReport(direction, 0.0, (0.0,) * D)

    axis = -np.pi + 2 * np.pi * np.arange(grid_resolution) / grid_resolution
    mesh = np.stack([g.ravel() for g in np.meshgrid(*[axis] * D, indexing="ij")], axis=1)
    speed = np.abs(group_velocity(params, mesh) @ u)
    k0 = mesh[np.argmax(speed)]

    def neg_speed(k):
        return -abs(float(group_velocity(params, k) @ u))

    res = optimize.minimize(
        neg_speed, k0, method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000},
    )
    best = res.x if -res.fun >= speed.max() else k0
    v = -neg_speed(best)
    if not np.isfinite(v):
        raise UnstableRegimeError("group velocity undefined")
    return LightConeReport(direction, v, tuple(float(x) for x in best))
