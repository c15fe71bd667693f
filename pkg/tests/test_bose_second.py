import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import thermo
from hubbard_quench import bose
from hubbard_quench import bose_second as bs
from hubbard_quench.bose import BoseParams


def full_grid_state(params, grid, t=None):
    """Mode amplitudes on every grid point (no T_k compression)."""
    T = grid.structure_factor()
    if t is None:
        f11, f12 = bose.ground_modes(params, T)
        f11, f12, f21 = f11 + 0j, f12 + 0j, f12 + 0j
    else:
        f11, f12, f21 = (x[0] for x in bose.quench_modes(params, T, t))
    return bose.BoseModeState(f11, f12, f21, f11, grid, compressed=False)


# -- renormalized dispersion ----------------------------------------------------


def test_renormalized_omega_examples():
    p = BoseParams(0.14)
    assert bs.renormalized_omega(p, 0.0, 0.7) == pytest.approx(bose.omega(p, 0.7)[0], abs=1e-15)
    assert bs.renormalized_omega(p, 0.05, 1.0) == pytest.approx(0.547869510011, abs=1e-12)
    with pytest.raises(ValueError):
        bs.renormalized_omega(p, 1 / 3, 1.0)
    with pytest.raises(ValueError):
        bs.renormalized_omega(p, -0.01, 1.0)


@given(st.floats(0.0, 0.16), st.floats(0.0, 0.33), st.floats(-1, 1), st.floats(0.5, 2.0))
def test_renormalized_omega_is_reduced_hopping(J, f0, T, U):
    p = BoseParams(J * U, U)
    ren = bs.renormalized_omega(p, f0, T)
    ref = bose.omega(BoseParams(J * U * (1 - 3 * f0), U), T)[0]
    assert ren == pytest.approx(ref, rel=1e-12, abs=1e-14)


@given(st.floats(0.01, 0.16), st.floats(0.01, 0.3), st.floats(0.01, 1.0))
def test_renormalization_flattens_band(J, f0, T):
    # a smaller effective hopping pulls omega_k back toward U and reduces its slope
    p = BoseParams(J)
    assert bs.renormalized_omega(p, f0, T) > bose.omega(p, T)[0]
    dT = 1e-6
    v_ren = abs(bs.renormalized_omega(p, f0, T + dT) - bs.renormalized_omega(p, f0, T))
    v = abs(bose.omega(p, T + dT)[0] - bose.omega(p, T)[0])
    assert v_ren < v


def test_as_printed_variant_differs_only_when_U_is_not_one():
    T = 0.8
    p1 = BoseParams(0.1, 1.0)
    assert bs.renormalized_omega(p1, 0.05, T) == bs.renormalized_omega(p1, 0.05, T, as_printed=True)
    p2 = BoseParams(0.2, 2.0)
    assert bs.renormalized_omega(p2, 0.05, T) != bs.renormalized_omega(p2, 0.05, T, as_printed=True)


# -- number and parity correlations --------------------------------------------------


def test_vanish_at_zero_hopping_and_time():
    g = thermo(2, 8)
    ground0 = bose.ground_state_modes(BoseParams(0.0), g)
    quench0 = bose.quench_state_modes(BoseParams(0.14), g, 0.0)
    for state in (ground0, quench0):
        assert bs.number_correlator(state, (1, 0)) == 0
        assert bs.parity_correlator(state, (1, 0)) == 0
    with pytest.raises(ValueError):
        bs.number_correlator(ground0, (0, 0))
    with pytest.raises(ValueError):
        bs.parity_correlator(ground0, (0, 0))


def test_ground_number_anticorrelation():
    J, g = 0.01, thermo(3, 16)
    state = bose.ground_state_modes(BoseParams(J), g)
    n = bs.number_correlator(state, (1, 0, 0))
    B = state.fourier(state.f12, (1, 0, 0)).real
    assert n < 0
    assert n == pytest.approx(-2 * B * B, rel=0.05)


@pytest.mark.parametrize("D", [1, 2, 3])
@pytest.mark.parametrize("t", [None, 3.7])
def test_factorization_matches_double_sum(D, t):
    g = thermo(D, 8)
    state = full_grid_state(BoseParams(0.12), g, t)
    for d in [(1,) + (0,) * (D - 1), (2,) + (1,) * (D - 1)]:
        assert abs(bs.number_correlator(state, d) - 2 * bs.double_sum(state, d, -1)) < 1e-10
        assert abs(bs.parity_correlator(state, d) - 8 * bs.double_sum(state, d, +1)) < 1e-10


@settings(max_examples=15)
@given(st.integers(1, 2), st.integers(2, 16), st.floats(0.0, 0.16), st.floats(0.0, 20.0),
       st.integers(1, 3))
def test_factorization_property(D, n, J, t, r):
    g = thermo(D, n)
    state = full_grid_state(BoseParams(J), g, t)
    d = (r,) + (0,) * (D - 1)
    assert abs(bs.number_correlator(state, d) - 2 * bs.double_sum(state, d, -1)) < 1e-10
    assert abs(bs.parity_correlator(state, d) - 8 * bs.double_sum(state, d, +1)) < 1e-10


def test_parity_number_relation():
    g = thermo(2, 16)
    state = bose.ground_state_modes(BoseParams(0.05), g)
    d = (1, 0)
    B12 = state.fourier(state.f12, d)
    B21 = state.fourier(state.f21, d)
    lhs = bs.parity_correlator(state, d)
    rhs = 4 * bs.number_correlator(state, d) + 16 * (B12 * B21).real
    assert lhs == pytest.approx(rhs, abs=1e-15)


def test_compressed_and_full_grid_agree():
    p, g = BoseParams(0.1), thermo(2, 12)
    full = full_grid_state(p, g, 2.5)
    comp = bose.quench_state_modes(p, g, 2.5)
    for d in [(1, 0), (1, 1), (3, 2)]:
        assert bs.number_correlator(full, d) == pytest.approx(bs.number_correlator(comp, d), abs=1e-14)


# -- light cone ---------------------------------------------------------------------


@pytest.mark.parametrize("D", [1, 2, 3])
def test_max_group_velocity_small_J(D):
    J = 0.01
    axis = bs.max_group_velocity(BoseParams(J), D, "axis")
    diag = bs.max_group_velocity(BoseParams(J), D, "diagonal")
    assert axis.v_max == pytest.approx(3 * J / D, rel=0.02)
    assert diag.v_max == pytest.approx(3 * J / math.sqrt(D), rel=0.02)
    assert axis.v_max >= 0 and len(axis.k_argmax) == D


def test_max_group_velocity_edge_cases():
    assert bs.max_group_velocity(BoseParams(0.0), 2).v_max == 0
    with pytest.raises(bose.UnstableRegimeError):
        bs.max_group_velocity(BoseParams(0.2), 2)
    with pytest.raises(ValueError):
        bs.max_group_velocity(BoseParams(0.1), 2, "sideways")


def test_group_velocity_matches_finite_difference():
    p = BoseParams(0.1)
    k = np.array([0.3, -1.1, 2.0])
    h = 1e-6
    num = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        wp = bose.omega(p, np.cos(k + e).mean())[0]
        wm = bose.omega(p, np.cos(k - e).mean())[0]
        num.append((wp - wm) / (2 * h))
    assert np.allclose(bs.group_velocity(p, k), num, atol=1e-9)


def test_light_cone_causality():
    """Arrival of number correlations at distance r is no faster than v_max.

    Arrival is the first time |<n n>_c(r, t)| exceeds 10% of its late-time
    mean.  The saddle-point front applies at large distances, so the linear
    fit uses r = 7..12.
    """
    p = BoseParams(0.1)
    v = bs.max_group_velocity(p, 2, "axis").v_max
    g = thermo(2, 128)
    t = np.linspace(0, 200, 4001)
    state = bose.quench_state_modes(p, g, t)
    rs = np.arange(7, 13)
    arrival = []
    for r in rs:
        c = np.abs(bs.number_correlator(state, (int(r), 0)))
        late = c[t > 100].mean()
        arrival.append(t[np.argmax(c > 0.1 * late)])
    slope = np.polyfit(rs, arrival, 1)[0]
    assert np.all(np.diff(arrival) > 0)
    assert slope >= 1 / v
