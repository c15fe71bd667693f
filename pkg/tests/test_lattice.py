import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hubbard_quench.lattice import (
    build_lattice,
    is_nearest_neighbor,
    momentum_grid,
    separations_of_interest,
    structure_factor,
    thermodynamic_grid,
)

extents = st.lists(st.integers(2, 5), min_size=1, max_size=3)


@pytest.mark.parametrize("D,L,N,Z", [(1, [11], 11, 2), (2, [3, 3], 9, 4), (3, [4, 4, 4], 64, 6)])
def test_build_lattice_counts(D, L, N, Z):
    lat = build_lattice(D, L)
    assert lat.num_sites == N
    assert lat.coordination == Z


@pytest.mark.parametrize("D,L", [(0, []), (1, [1]), (2, [3]), (2, [3, 1])])
def test_build_lattice_rejects(D, L):
    with pytest.raises(ValueError):
        build_lattice(D, L)


def test_row_major_indexing():
    lat = build_lattice(2, [2, 3])
    assert lat.coords().tolist() == [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]]
    assert lat.site_index((1, 2)) == 5
    assert lat.site_index((-1, 3)) == 3


@given(extents)
def test_adjacency_invariants(L):
    lat = build_lattice(len(L), L)
    T = lat.adjacency()
    assert np.array_equal(T, T.T)
    assert np.all(np.diag(T) == 0)
    assert np.all(T.sum(axis=1) == lat.coordination)


def test_length_two_axis_doubles_bond():
    lat = build_lattice(2, [2, 3])
    assert lat.bond_count((1, 0)) == 2
    assert lat.bond_count((0, 1)) == 1


@pytest.mark.parametrize(
    "k,expected",
    [((0.0,), 1.0), ((0.0, 0.0, 0.0), 1.0), ((np.pi, np.pi), -1.0), ((np.pi / 2,) * 3, 0.0)],
)
def test_structure_factor_examples(k, expected):
    assert structure_factor(k) == pytest.approx(expected, abs=1e-15)


def test_finite_grid_1d_four_sites():
    g = momentum_grid(build_lattice(1, [4]), "finite")
    expected = np.array([0, np.pi / 2, np.pi, -np.pi / 2])
    # pi and -pi are the same lattice momentum; the grid stores it in [-pi, pi)
    diff = (g.k[:, 0] - expected + np.pi) % (2 * np.pi) - np.pi
    assert np.allclose(diff, 0, atol=1e-15)
    assert np.all((g.k >= -np.pi) & (g.k < np.pi))
    assert np.allclose(g.weights, 0.25)


def test_thermodynamic_grid_size():
    g = thermodynamic_grid(3, 64)
    assert len(g) == 64**3
    assert np.allclose(g.weights, 64.0**-3)
    assert abs(g.weights.sum() - 1) < 1e-12


def test_grid_rejects_bad_resolution():
    with pytest.raises(ValueError):
        momentum_grid(build_lattice(1, [4]), "thermodynamic", 1)
    with pytest.raises(ValueError):
        momentum_grid(build_lattice(1, [4]), "thermodynamic")


@given(extents, st.integers(2, 9))
def test_grid_weights_and_symmetry(L, n):
    lat = build_lattice(len(L), L)
    for g in (momentum_grid(lat, "finite"), momentum_grid(lat, "thermodynamic", n)):
        assert abs(g.weights.sum() - 1) < 1e-12
        T = g.structure_factor()
        assert np.all(np.abs(T) <= 1 + 1e-15)
        assert np.allclose(structure_factor(-g.k), T, atol=1e-15)
    assert len(momentum_grid(lat, "finite")) == lat.num_sites


@given(extents)
def test_inverse_transform_gives_adjacency(L):
    lat = build_lattice(len(L), L)
    g = momentum_grid(lat, "finite")
    T = lat.adjacency()
    for d in itertools.product(*[range(n) for n in L]):
        val = lat.coordination * g.fourier(g.structure_factor(), d)
        assert abs(val - T[lat.site_index(d), 0]) < 1e-10


def test_T_classes_reproduce_full_sum():
    g = thermodynamic_grid(2, 12)
    f = np.cos(3 * g.structure_factor())
    T, W = g.T_classes((2, 1))
    assert abs(np.cos(3 * T) @ W - g.fourier(f, (2, 1))) < 1e-14
    assert np.allclose(g.expand(np.cos(3 * T)), f, atol=1e-12)


def test_separations_examples():
    assert separations_of_interest(build_lattice(2, [6, 6]), 1) == [(0, 0), (1, 0), (0, 1)]
    assert (1, 1) in separations_of_interest(build_lattice(2, [6, 6]), 2)
    assert separations_of_interest(build_lattice(1, [8]), 2) == [(0,), (1,), (2,)]
    with pytest.raises(ValueError):
        separations_of_interest(build_lattice(1, [8]), -1)


@given(extents, st.integers(0, 4))
def test_separations_sorted_and_unique(L, m):
    lat = build_lattice(len(L), L)
    seps = separations_of_interest(lat, m)
    assert len(set(seps)) == len(seps)
    lengths = [sum(x * x for x in d) for d in seps]
    assert lengths == sorted(lengths)
    assert all(lat.reduce(d) == tuple(lat.reduce(d)) for d in seps)
    assert len({lat.reduce(d) for d in seps}) == len(seps)


def test_nearest_neighbor_predicate():
    assert is_nearest_neighbor((0, 1, 0))
    assert not is_nearest_neighbor((1, 1))
    assert not is_nearest_neighbor((0,))
