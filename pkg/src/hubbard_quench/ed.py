"""Exact diagonalization of small Bose- and Fermi-Hubbard lattices.

Full dense diagonalization in a fixed particle-number sector, used as the
reference for the 1/Z results: exact quench dynamics, infinite-time
(diagonal-ensemble) averages and canonical thermal averages.

Both Hamiltonians carry the explicit 1/Z normalisation of the hopping,
``-(J/Z) sum_{mu nu} T_{mu nu} a+_mu a_nu``, with ``T`` the adjacency matrix
of the lattice (entries 2 on axes of length 2).

Fermionic convention
--------------------
Modes are ordered spin-up block first, then spin-down; within each block by
site index (row-major).  A basis state is stored as an integer with bit
``site`` for spin up and bit ``M + site`` for spin down.  Operators act with
the Jordan-Wigner sign ``(-1)^(number of occupied modes below the target)``.
Basis states are ordered by (up mask, down mask), each in ascending integer
order of masks with the prescribed popcount.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
from scipy import optimize

from .lattice import HypercubicLattice

DEFAULT_DIMENSION_CAP = 20000


class DimensionCapError(ValueError):
    """The requested Hilbert space exceeds the configured dimension cap."""


def _check_cap(dim: int, cap: int) -> None:
    if dim > cap:
        raise DimensionCapError(
            f"Hilbert-space dimension {dim} exceeds the cap {cap}; "
            "use a smaller lattice or raise dimension_cap"
        )


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoseBasis:
    """All occupation vectors of N bosons on M sites, no occupancy cut-off."""

    M: int
    N: int
    states: np.ndarray = field(repr=False)
    index: dict = field(repr=False)

    @classmethod
    def build(cls, M: int, N: int, cap: int = DEFAULT_DIMENSION_CAP) -> "BoseBasis":
        _check_cap(math.comb(N + M - 1, N), cap)
        states = []
        # bars-and-stars, lexicographically descending from (N, 0, ..., 0)
        for bars in itertools.combinations(range(N + M - 1), M - 1):
            edges = (-1,) + bars + (N + M - 1,)
            states.append([edges[i + 1] - edges[i] - 1 for i in range(M)])
        states = np.array(states, dtype=np.int64)[::-1]
        index = {tuple(s): i for i, s in enumerate(states)}
        return cls(M, N, states, index)

    @property
    def dim(self) -> int:
        return len(self.states)

    def state_vector(self, occupations: Sequence[int]) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index[tuple(occupations)]] = 1.0
        return psi

    def mott_state(self) -> np.ndarray:
        if self.N != self.M:
            raise ValueError("the Mott product state needs unit filling")
        return self.state_vector([1] * self.M)


def _masks(M: int, n: int) -> list[int]:
    return sorted(sum(1 << i for i in c) for c in itertools.combinations(range(M), n))


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True, eq=False)
class FermiBasis:
    M: int
    N_up: int
    N_down: int
    states: np.ndarray = field(repr=False)
    index: dict = field(repr=False)

    @classmethod
    def build(
        cls, M: int, N_up: int, N_down: int, cap: int = DEFAULT_DIMENSION_CAP
    ) -> "FermiBasis":
        _check_cap(math.comb(M, N_up) * math.comb(M, N_down), cap)
        states = [up | (dn << M) for up in _masks(M, N_up) for dn in _masks(M, N_down)]
        states = np.array(states, dtype=np.int64)
        index = {int(s): i for i, s in enumerate(states)}
        return cls(M, N_up, N_down, states, index)

    @property
    def dim(self) -> int:
        return len(self.states)

    def mode(self, site: int, spin: int) -> int:
        """Mode index (bit position) of ``(site, spin)``, spin 0 = up, 1 = down."""
        if not 0 <= site < self.M:
            raise IndexError(f"site {site} out of range")
        return site + spin * self.M

    def occupation(self, site: int, spin: int) -> np.ndarray:
        return (self.states >> self.mode(site, spin)) & 1

    def neel_state(self, lattice: HypercubicLattice) -> np.ndarray:
        """Spin down on sublattice A, spin up on sublattice B."""
        sub = lattice.sublattice()
        up = sum(1 << i for i in range(self.M) if sub[i] == 1)
        dn = sum(1 << i for i in range(self.M) if sub[i] == 0)
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index[up | (dn << self.M)]] = 1.0
        return psi


def apply_fermion_ops(state: int, ops: Sequence[tuple[int, bool]]) -> tuple[int, int]:
    """Apply ``c_m`` / ``c+_m`` (given as ``(mode, dagger)``, rightmost first) to a bit string.

    Returns ``(sign, new_state)``; sign 0 means the state was annihilated.
    """
    sign = 1
    for m, dagger in reversed(ops):
        occupied = (state >> m) & 1
        if occupied == dagger:
            return 0, state
        if _popcount(state & ((1 << m) - 1)) % 2:
            sign = -sign
        state ^= 1 << m
    return sign, state


def _fermion_operator(basis: FermiBasis, terms) -> sparse.csr_matrix:
    """Sparse matrix of ``sum coeff * product(ops)`` for terms ``(coeff, ops)``."""
    rows, cols, vals = [], [], []
    for j, s in enumerate(basis.states):
        s = int(s)
        for coeff, ops in terms:
            sign, new = apply_fermion_ops(s, ops)
            if sign and new in basis.index:
                rows.append(basis.index[new])
                cols.append(j)
                vals.append(coeff * sign)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim), dtype=complex)


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------


def bose_hopping(basis: BoseBasis, mu: int, nu: int) -> sparse.csr_matrix:
    """``b+_mu b_nu`` (``mu == nu`` gives ``n_mu``)."""
    for s in (mu, nu):
        if not 0 <= s < basis.M:
            raise IndexError(f"site {s} out of range")
    if mu == nu:
        return sparse.diags(basis.states[:, mu].astype(float)).tocsr()
    rows, cols, vals = [], [], []
    for j, occ in enumerate(basis.states):
        if occ[nu] == 0:
            continue
        new = occ.copy()
        amp = math.sqrt(new[nu]) * math.sqrt(new[mu] + 1)
        new[nu] -= 1
        new[mu] += 1
        rows.append(basis.index[tuple(new)])
        cols.append(j)
        vals.append(amp)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))


def build_bose_hamiltonian(
    lattice: HypercubicLattice, J: float, U: float = 1.0, N: int | None = None,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> tuple[np.ndarray, BoseBasis]:
    """Dense real-symmetric Bose-Hubbard matrix at filling ``N`` (default: one per site)."""
    M = lattice.num_sites
    basis = BoseBasis.build(M, M if N is None else N, cap)
    T = lattice.adjacency()
    Z = lattice.coordination
    n = basis.states
    hop = sparse.csr_matrix((basis.dim, basis.dim))
    for mu, nu in zip(*np.nonzero(T)):
        hop = hop + T[mu, nu] * bose_hopping(basis, int(mu), int(nu))
    H = (-(J / Z) * hop).toarray()
    H[np.diag_indices(basis.dim)] += 0.5 * U * (n * (n - 1)).sum(axis=1)
    return H, basis


def build_fermi_hamiltonian(
    lattice: HypercubicLattice, J: float, U: float = 1.0, a: float = 0.0,
    N_up: int | None = None, N_down: int | None = None,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> tuple[np.ndarray, FermiBasis]:
    """Dense Fermi-Hubbard matrix with optional staggered field ``a``.

    The field lowers spin down on sublattice A and spin up on sublattice B by
    ``a``, making the Neel state the unique J = 0 ground state.
    """
    M = lattice.num_sites
    if (N_up is None or N_down is None) and M % 2:
        raise ValueError("half filling needs an even number of sites")
    basis = FermiBasis.build(M, M // 2 if N_up is None else N_up,
                             M // 2 if N_down is None else N_down, cap)
    T = lattice.adjacency()
    Z = lattice.coordination
    sub = lattice.sublattice()
    diag = np.zeros(basis.dim)
    for site in range(M):
        n_up, n_dn = basis.occupation(site, 0), basis.occupation(site, 1)
        diag += U * n_up * n_dn
        diag -= a * (n_dn if sub[site] == 0 else n_up)
    terms = []
    for mu, nu in zip(*np.nonzero(T)):
        for spin in (0, 1):
            ops = [(basis.mode(int(mu), spin), True), (basis.mode(int(nu), spin), False)]
            terms.append((-(J / Z) * T[mu, nu], ops))
    H = _fermion_operator(basis, terms).toarray().real + np.diag(diag)
    return H, basis


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


def occupation_probability(basis: BoseBasis, site: int, m: int) -> sparse.csr_matrix:
    """Projector onto ``n_site = m``."""
    if not 0 <= site < basis.M:
        raise IndexError(f"site {site} out of range")
    return sparse.diags((basis.states[:, site] == m).astype(float)).tocsr()


def density_density(basis: BoseBasis, mu: int, nu: int) -> sparse.csr_matrix:
    return sparse.diags((basis.states[:, mu] * basis.states[:, nu]).astype(float)).tocsr()


def parity_product(basis: BoseBasis, mu: int, nu: int) -> sparse.csr_matrix:
    """``(-1)^{n_mu} (-1)^{n_nu}`` (``mu == nu`` gives the identity)."""
    n = basis.states[:, mu] + basis.states[:, nu]
    return sparse.diags(np.where(n % 2, -1.0, 1.0)).tocsr()


def parity(basis: BoseBasis, mu: int) -> sparse.csr_matrix:
    return sparse.diags(np.where(basis.states[:, mu] % 2, -1.0, 1.0)).tocsr()


def double_occupancy(basis: FermiBasis, site: int) -> sparse.csr_matrix:
    """``n_up n_down`` on one site."""
    return sparse.diags((basis.occupation(site, 0) * basis.occupation(site, 1)).astype(float)).tocsr()


def empty_site(basis: FermiBasis, site: int) -> sparse.csr_matrix:
    occ = basis.occupation(site, 0) + basis.occupation(site, 1)
    return sparse.diags((occ == 0).astype(float)).tocsr()


def fermi_hopping(basis: FermiBasis, mu: int, nu: int, spin: int) -> sparse.csr_matrix:
    """``c+_{mu s} c_{nu s}`` with the basis sign convention."""
    ops = [(basis.mode(mu, spin), True), (basis.mode(nu, spin), False)]
    return _fermion_operator(basis, [(1.0, ops)])


def _spin_terms(basis: FermiBasis, site: int, component: str):
    up, dn = basis.mode(site, 0), basis.mode(site, 1)
    plus = [(up, True), (dn, False)]   # S+ = c+_up c_down
    minus = [(dn, True), (up, False)]  # S- = c+_down c_up
    if component == "z":
        return [(0.5, [(up, True), (up, False)]), (-0.5, [(dn, True), (dn, False)])]
    if component == "x":
        return [(0.5, plus), (0.5, minus)]
    if component == "y":
        return [(-0.5j, plus), (0.5j, minus)]
    raise ValueError(f"unknown spin component {component!r}")


def spin_operator(basis: FermiBasis, site: int, component: str) -> sparse.csr_matrix:
    return _fermion_operator(basis, _spin_terms(basis, site, component))


def spin_correlation(
    basis: FermiBasis, mu: int, nu: int, i: str = "z", j: str = "z"
) -> sparse.csr_matrix:
    """``S^i_mu S^j_nu``.

    The operator strings are multiplied before projecting onto the basis, so
    transverse products that pass through other spin sectors are kept.
    """
    terms = [
        (ca * cb, list(oa) + list(ob))
        for ca, oa in _spin_terms(basis, mu, i)
        for cb, ob in _spin_terms(basis, nu, j)
    ]
    return _fermion_operator(basis, terms)


# ---------------------------------------------------------------------------
# spectral tools
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns)."""

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.energies)

    def coefficients(self, psi0: np.ndarray) -> np.ndarray:
        return self.vectors.conj().T @ psi0

    def degenerate_blocks(self, tol: float = 1e-9) -> list[slice]:
        """Index ranges of (numerically) degenerate eigenvalues."""
        scale = max(1.0, float(np.max(np.abs(self.energies), initial=0.0)))
        breaks = np.nonzero(np.diff(self.energies) > tol * scale)[0] + 1
        edges = [0, *breaks.tolist(), self.dim]
        return [slice(a, b) for a, b in zip(edges[:-1], edges[1:])]


def diagonalize(H: np.ndarray, cap: int = DEFAULT_DIMENSION_CAP) -> SpectralDecomposition:
    H = np.asarray(H)
    _check_cap(H.shape[0], cap)
    if not np.allclose(H, H.conj().T, atol=1e-12):
        raise ValueError("Hamiltonian is not Hermitian")
    try:
        E, V = scipy.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"diagonalization did not converge: {exc}") from exc
    return SpectralDecomposition(E, V)


def evolve(dec: SpectralDecomposition, psi0: np.ndarray, t) -> np.ndarray:
    """``psi(t) = exp(-i H t) psi0``; for an array of times the result is ``(len(t), dim)``."""
    c = dec.coefficients(psi0)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    phases = np.exp(-1j * np.outer(ts, dec.energies))
    out = (phases * c) @ dec.vectors.T
    return out[0] if np.ndim(t) == 0 else out


def expectation(O, psi: np.ndarray):
    """``<psi|O|psi>`` for one state or a stack of states (rows)."""
    single = np.ndim(psi) == 1
    psi = np.atleast_2d(psi)
    vals = np.einsum("ij,ij->i", psi.conj(), (O @ psi.T).T)
    return vals[0] if single else vals


def expectation_series(dec: SpectralDecomposition, psi0: np.ndarray, O, times) -> np.ndarray:
    """Real part of ``<psi(t)|O|psi(t)>`` at each time, evaluated in chunks."""
    times = np.asarray(times, dtype=float)
    out = np.empty(len(times))
    chunk = max(1, 2_000_000 // max(dec.dim, 1))
    for start in range(0, len(times), chunk):
        psi_t = evolve(dec, psi0, times[start:start + chunk])
        Opsi = (O @ psi_t.T).T
        out[start:start + chunk] = np.einsum("ij,ij->i", psi_t.conj(), Opsi).real
    return out


def _eigenbasis_diagonal(dec: SpectralDecomposition, O) -> tuple[np.ndarray, np.ndarray]:
    OV = O @ dec.vectors
    return OV, np.einsum("ij,ij->j", dec.vectors.conj(), OV).real


def diagonal_ensemble_average(
    dec: SpectralDecomposition, psi0: np.ndarray, O, tol: float = 1e-9
) -> float:
    """Infinite-time average of ``<O>(t)``.

    Within each degenerate eigenspace the full projected block of ``O`` is
    used, so the result does not depend on the eigenvector basis chosen
    there.
    """
    c = dec.coefficients(psi0)
    OV = O @ dec.vectors
    total = 0.0
    for block in dec.degenerate_blocks(tol):
        cb = c[block]
        if block.stop - block.start == 1:
            total += abs(cb[0]) ** 2 * np.vdot(dec.vectors[:, block.start], OV[:, block.start]).real
        else:
            sub = dec.vectors[:, block].conj().T @ OV[:, block]
            total += np.vdot(cb, sub @ cb).real
    return float(total)


def thermal_average(dec: SpectralDecomposition, beta: float, O) -> float:
    """Canonical average ``sum_n exp(-beta E_n) <n|O|n> / Z`` in the fixed-number sector."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    _, diag = _eigenbasis_diagonal(dec, O)
    return float(thermal_weights(dec, beta) @ diag)


def thermal_weights(dec: SpectralDecomposition, beta: float) -> np.ndarray:
    if np.isinf(beta):
        w = (dec.energies <= dec.energies[0] + 1e-9 * max(1.0, abs(dec.energies[0]))).astype(float)
    else:
        w = np.exp(-beta * (dec.energies - dec.energies[0]))
    return w / w.sum()


def thermal_curve(dec: SpectralDecomposition, O, temperatures) -> np.ndarray:
    """Canonical ``<O>`` on a grid of temperatures (``T = 0`` is the ground-state average)."""
    _, diag = _eigenbasis_diagonal(dec, O)
    out = []
    for T in np.asarray(temperatures, dtype=float):
        beta = np.inf if T == 0 else 1.0 / T
        out.append(thermal_weights(dec, beta) @ diag)
    return np.array(out)


def effective_temperature(
    dec: SpectralDecomposition, O, target: float, T_range: tuple[float, float] = (1e-3, 20.0)
) -> float:
    """Temperature at which the canonical ``<O>`` equals ``target`` (root of a monotone scan)."""
    _, diag = _eigenbasis_diagonal(dec, O)

    def gap(T):
        return float(thermal_weights(dec, 1.0 / T) @ diag) - target

    lo, hi = T_range
    if gap(lo) * gap(hi) > 0:
        raise ValueError(
            f"thermal curve does not cross {target:.6g} for T in [{lo}, {hi}]"
        )
    return float(optimize.brentq(gap, lo, hi, xtol=1e-12))


def ground_expectation(dec: SpectralDecomposition, O) -> float:
    """Average over the (possibly degenerate) ground manifold."""
    return thermal_average(dec, np.inf, O)
