"""Command-line front end: ``hubbard-quench --config run.yaml --out results/``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 regime error (stable-regime quantity requested beyond J_c).
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, bose, ed, fermi
from .config import ConfigError, RunConfig, load
from .io import EmitError, SeriesSet, envelope, write_csv, write_json
from .lattice import HypercubicLattice, MomentumGrid, build_lattice, momentum_grid, thermodynamic_grid
from .protocol import QuenchProtocol

log = logging.getLogger("hubbard_quench")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_REGIME = 0, 2, 3, 4


class NumericalError(RuntimeError):
    """Non-finite output or a conserved quantity drifting past tolerance."""


@dataclass
class RunResult:
    sets: dict[str, SeriesSet]
    summary: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)


def column(name: str, d: Sequence[int] | None = None) -> str:
    return name if d is None else name + "_" + "_".join(str(x) for x in d)


def _lattice(cfg: RunConfig) -> HypercubicLattice:
    return build_lattice(cfg.lattice.D, cfg.lattice.L)


def _grid(cfg: RunConfig) -> MomentumGrid:
    if cfg.mode == "compare" or cfg.lattice.grid == "finite":
        return momentum_grid(_lattice(cfg), "finite")
    return thermodynamic_grid(cfg.lattice.D, cfg.lattice.points_per_axis)


def _protocol(cfg: RunConfig) -> QuenchProtocol:
    p = cfg.protocol
    return QuenchProtocol(p.kind, cfg.params.J_initial, cfg.params.J_final, p.tau)


def _is_pair(cfg: RunConfig, name: str) -> bool:
    return name in {"hh", "hp", "ph", "pp", "bb", "nn", "parity", "symmetric_11", "mixed_10", "szsz"}


def _requests(cfg: RunConfig):
    """``(observable, separation or None)`` pairs in output order."""
    for name in cfg.observables:
        if _is_pair(cfg, name):
            for d in cfg.separations:
                yield name, d
        else:
            yield name, None


def _bose_params(cfg: RunConfig) -> bose.BoseParams:
    return bose.BoseParams(cfg.params.J_final, cfg.params.U)


def _fermi_params(cfg: RunConfig) -> fermi.FermiParams:
    return fermi.FermiParams(cfg.params.J_final, cfg.params.U, cfg.params.a)


def _record_every(cfg: RunConfig) -> int:
    return int(round(cfg.time.sample_dt / cfg.time.dt))


def _check_drift(drift: np.ndarray, tol: float) -> None:
    worst = float(np.max(drift))
    if not np.isfinite(worst) or worst > tol:
        raise NumericalError(f"conserved bilinear drifted by {worst:.3g} (tolerance {tol:g})")


# ---------------------------------------------------------------------------
# 1/Z analytic and ODE
# ---------------------------------------------------------------------------


def _bose_summary(cfg: RunConfig, grid: MomentumGrid) -> dict:
    params = _bose_params(cfg)
    out = {
        "critical_hopping": bose.critical_hopping(params.U),
        "ground_depletion": bose.ground_depletion(params, grid),
        "equilibrium_depletion": bose.equilibrium_correlator(params, grid, "onsite"),
    }
    if params.J > 0:
        beta, T = bose.effective_temperature(params, grid)
        out["effective_temperature"] = T
    for d in cfg.separations:
        if any(d):
            for kind in ("hh", "hp", "bb"):
                out[f"equilibrium_{column(kind, d)}"] = bose.equilibrium_correlator(params, grid, kind, d)
    return out


def _bose_analytic_column(params, grid, name, d, times):
    zero = (0,) * grid.dimension
    if name == "depletion":
        return bose.quench_correlator(params, grid, "hh", zero, times).real
    kind = "hh" if name == "pp" else name
    values = bose.quench_correlator(params, grid, kind, d, times)
    return values if name in ("hp", "ph") else values.real


def _bose_ode_column(traj: bose.BoseTrajectory, name, d):
    if name == "depletion":
        return traj.depletion()
    values = traj.correlator(name, d)
    return values if name in ("hp", "ph") else values.real


def _fermi_analytic_column(params, grid, name, d, times):
    if name == "double_occupancy":
        return fermi.fermi_double_occupancy(params, grid, times)
    values = fermi.fermi_quench_correlator(params, grid, name, d, times)
    return values.real if name == "symmetric_11" else values


def _fermi_ode_column(traj: fermi.FermiTrajectory, name, d):
    if name == "double_occupancy":
        return traj.double_occupancy()
    if name == "symmetric_11":
        return traj.correlator("1B1B", d).real
    return traj.correlator("1B0A", d)


def _fermi_summary(cfg: RunConfig, grid: MomentumGrid) -> dict:
    params = _fermi_params(cfg)
    zero = (0,) * grid.dimension
    out = {
        "ground_double_occupancy": fermi.fermi_depletion(params, grid),
        "equilibrium_double_occupancy": fermi.fermi_equilibrium_correlator(
            params, grid, "symmetric_11", zero),
        "heisenberg_coupling": fermi.heisenberg_coupling(params, 2 * grid.dimension),
    }
    for d in cfg.separations:
        kind = "symmetric_11" if sum(d) % 2 == 0 else "mixed_10"
        out[f"equilibrium_{column(kind, d)}"] = fermi.fermi_equilibrium_correlator(params, grid, kind, d)
    return out


def run_analytic(cfg: RunConfig) -> RunResult:
    grid = _grid(cfg)
    times = cfg.time.times()
    s = SeriesSet("t", times)
    if cfg.model == "bose":
        params = _bose_params(cfg)
        bose.require_stable(params)
        for name, d in _requests(cfg):
            s.add(column(name, d), _bose_analytic_column(params, grid, name, d, times))
        summary = _bose_summary(cfg, grid)
    else:
        params = _fermi_params(cfg)
        for name, d in _requests(cfg):
            s.add(column(name, d), _fermi_analytic_column(params, grid, name, d, times))
        summary = _fermi_summary(cfg, grid)
    return RunResult({"time": s}, summary, {"grid": grid.describe()})


def _integrate(cfg: RunConfig, grid: MomentumGrid):
    tol = cfg.tolerances.invariant_drift
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", bose.InvariantDriftWarning)
        if cfg.model == "bose":
            bose.require_stable(_bose_params(cfg))
            traj = bose.integrate_modes(
                _protocol(cfg), cfg.params.U, grid, cfg.time.t_end, cfg.time.dt,
                record_every=_record_every(cfg), drift_tolerance=tol,
            )
        else:
            traj = fermi.integrate_charge_modes(
                _protocol(cfg), _fermi_params(cfg), grid, cfg.time.t_end, cfg.time.dt,
                record_every=_record_every(cfg), drift_tolerance=tol,
            )
    _check_drift(traj.invariant_drift, tol)
    return traj


def run_ode(cfg: RunConfig) -> RunResult:
    grid = _grid(cfg)
    traj = _integrate(cfg, grid)
    s = SeriesSet("t", traj.times)
    for name, d in _requests(cfg):
        if cfg.model == "bose":
            s.add(column(name, d), _bose_ode_column(traj, name, d))
        else:
            s.add(column(name, d), _fermi_ode_column(traj, name, d))
    summary = {"max_invariant_drift": float(np.max(traj.invariant_drift))}
    if cfg.model == "fermi":
        summary["max_soft_sector_amplitude"] = float(np.max(traj.soft_max))
    provenance = {"grid": grid.describe(), "integrator": "rk4", "dt": cfg.time.dt}
    return RunResult({"time": s}, summary, provenance)


# ---------------------------------------------------------------------------
# exact diagonalization
# ---------------------------------------------------------------------------


@dataclass
class EDSystem:
    lattice: HypercubicLattice
    dec: ed.SpectralDecomposition
    psi0: np.ndarray
    basis: object

    def operator(self, model: str, name: str, d):
        b = self.basis
        j = None if d is None else self.lattice.site_index(d)
        if model == "bose":
            if name in ("p0", "p1", "p2"):
                return ed.occupation_probability(b, 0, int(name[1]))
            if name == "bb":
                O = ed.bose_hopping(b, 0, j)
                return ((O + O.T) / 2).tocsr()
            if name == "nn":
                return ed.density_density(b, 0, j)
            if name == "parity":
                return ed.parity_product(b, 0, j)
        else:
            if name == "double_occupancy":
                return ed.double_occupancy(b, 0)
            if name == "empty":
                return ed.empty_site(b, 0)
            if name == "szsz":
                return ed.spin_correlation(b, 0, j)
        raise ConfigError(f"no exact-diagonalization operator for {name!r}", "observables")


def _ed_system(cfg: RunConfig) -> EDSystem:
    lat = _lattice(cfg)
    cap = cfg.ed.dimension_cap
    if cfg.model == "bose":
        H, basis = ed.build_bose_hamiltonian(lat, cfg.params.J_final, cfg.params.U, cap=cap)
        psi0 = basis.mott_state()
    else:
        H, basis = ed.build_fermi_hamiltonian(
            lat, cfg.params.J_final, cfg.params.U, cfg.params.a, cap=cap)
        psi0 = basis.neel_state(lat)
    log.info("diagonalizing %s Hamiltonian of dimension %d", cfg.model, basis.dim)
    dec = ed.diagonalize(H, cap)
    return EDSystem(lat, dec, psi0, basis)


def _ed_provenance(cfg: RunConfig, system: EDSystem) -> dict:
    return {
        "lattice": list(system.lattice.extents),
        "grid": {"mode": "real-space", "points_per_axis": list(system.lattice.extents)},
        "hilbert_dimension": system.dec.dim,
        "initial_state": "mott" if cfg.model == "bose" else "neel",
        "thermal_ensemble": "canonical",
    }


def _ed_ops(cfg: RunConfig, system: EDSystem, names=None):
    requests = list(_requests(cfg)) if names is None else names
    return [(column(n, d), system.operator(cfg.model, n, d)) for n, d in requests]


def run_ed(cfg: RunConfig) -> RunResult:
    system = _ed_system(cfg)
    times = cfg.time.times()
    s = SeriesSet("t", times)
    summary = {"ground_energy": float(system.dec.energies[0])}
    tol = cfg.tolerances.degeneracy
    for col, O in _ed_ops(cfg, system):
        s.add(col, ed.expectation_series(system.dec, system.psi0, O, times))
        diag = ed.diagonal_ensemble_average(system.dec, system.psi0, O, tol)
        s.add(f"{col}_diag", np.full(len(times), diag))
        summary[f"diagonal_ensemble_{col}"] = diag
    return RunResult({"time": s}, summary, _ed_provenance(cfg, system))


def _thermal_set(cfg: RunConfig, system: EDSystem, ops, suffix: str = "") -> tuple[SeriesSet, dict]:
    temps = np.geomspace(cfg.thermal.T_min, cfg.thermal.T_max, cfg.thermal.num)
    s = SeriesSet("T", temps)
    summary = {}
    tol = cfg.tolerances.degeneracy
    for col, O in ops:
        s.add(col + suffix, ed.thermal_curve(system.dec, O, temps))
        diag = ed.diagonal_ensemble_average(system.dec, system.psi0, O, tol)
        summary[f"diagonal_ensemble_{col}"] = diag
        try:
            T = ed.effective_temperature(system.dec, O, diag, (cfg.thermal.T_min, cfg.thermal.T_max))
        except ValueError:
            T = None
        summary[f"effective_temperature_{col}"] = T
    return s, summary


def run_thermal_scan(cfg: RunConfig) -> RunResult:
    system = _ed_system(cfg)
    s, summary = _thermal_set(cfg, system, _ed_ops(cfg, system))
    if cfg.model == "bose" and cfg.params.J_final > 0:
        grid = momentum_grid(system.lattice, "finite")
        params = _bose_params(cfg)
        bose.require_stable(params)
        summary["first_order_effective_temperature"] = bose.effective_temperature(params, grid)[1]
    return RunResult({"thermal": s}, summary, _ed_provenance(cfg, system))


def run_compare(cfg: RunConfig) -> RunResult:
    """1/Z analytic and ODE curves on the ED lattice's own momentum grid next to ED."""
    system = _ed_system(cfg)
    grid = momentum_grid(system.lattice, "finite")
    traj = _integrate(cfg, grid)
    times = traj.times
    s = SeriesSet("t", times)
    zero = (0,) * grid.dimension
    summary = {}
    tol = cfg.tolerances.degeneracy
    ops = _ed_ops(cfg, system)
    if cfg.model == "bose":
        params = _bose_params(cfg)
    else:
        params = _fermi_params(cfg)
    for (name, d), (col, O) in zip(_requests(cfg), ops):
        if cfg.model == "bose" and name == "bb":
            analytic = bose.quench_correlator(params, grid, "bb", d, times).real
            ode = traj.correlator("bb", d).real
            equil = bose.equilibrium_correlator(params, grid, "bb", d)
        elif cfg.model == "bose":
            analytic = bose.quench_correlator(params, grid, "hh", zero, times).real
            ode = traj.depletion()
            equil = bose.equilibrium_correlator(params, grid, "onsite")
        else:
            analytic = fermi.fermi_double_occupancy(params, grid, times)
            ode = traj.double_occupancy()
            equil = fermi.fermi_equilibrium_correlator(params, grid, "symmetric_11", zero)
        diag = ed.diagonal_ensemble_average(system.dec, system.psi0, O, tol)
        s.add(f"{col}_analytic", analytic)
        s.add(f"{col}_ode", ode)
        s.add(f"{col}_equilibrium", np.full(len(times), equil))
        s.add(f"{col}_ed", ed.expectation_series(system.dec, system.psi0, O, times))
        s.add(f"{col}_ed_diag", np.full(len(times), diag))
        summary[f"equilibrium_{col}"] = equil
    thermal, th_summary = _thermal_set(cfg, system, ops, "_thermal")
    summary.update(th_summary)
    summary["max_invariant_drift"] = float(np.max(traj.invariant_drift))
    provenance = _ed_provenance(cfg, system)
    provenance.update({"grid": grid.describe(), "integrator": "rk4", "dt": cfg.time.dt})
    return RunResult({"time": s, "thermal": thermal}, summary, provenance)


RUNNERS = {
    "analytic": run_analytic,
    "ode": run_ode,
    "ed": run_ed,
    "thermal-scan": run_thermal_scan,
    "compare": run_compare,
}


def execute(cfg: RunConfig) -> RunResult:
    with np.errstate(all="ignore"):
        result = RUNNERS[cfg.mode](cfg)
    for key, s in result.sets.items():
        s.check_nonempty()
        bad = [c.name for c in s.series if not np.all(np.isfinite(c.values))]
        if bad:
            raise NumericalError(f"non-finite values in {key} series: {', '.join(bad)}")
    result.provenance = {
        "mode": cfg.mode,
        "model": cfg.model,
        "version": __version__,
        "tolerances": {
            "invariant_drift": cfg.tolerances.invariant_drift,
            "degeneracy": cfg.tolerances.degeneracy,
        },
        **result.provenance,
    }
    return result


def emit(cfg: RunConfig, result: RunResult, out_dir: Path) -> list[Path]:
    """Write ``<name>.csv`` (plus ``<name>_thermal.csv`` when both axes exist) and ``<name>.json``."""
    name = cfg.output.name
    written = []
    if "csv" in cfg.output.formats:
        for key, s in result.sets.items():
            stem = name if key == next(iter(result.sets)) else f"{name}_{key}"
            path = out_dir / f"{stem}.csv"
            write_csv(path, s)
            written.append(path)
    if "json" in cfg.output.formats:
        path = out_dir / f"{name}.json"
        write_json(path, envelope(cfg.to_dict(), result.provenance, result.sets, result.summary))
        written.append(path)
    return written


def run(config_path: str | Path, out_dir: str | Path = ".", mode: str | None = None) -> list[Path]:
    cfg = load(config_path)
    if mode is not None:
        cfg = cfg.with_mode(mode)
    log.info("running %s model in %s mode", cfg.model, cfg.mode)
    result = execute(cfg)
    return emit(cfg, result, Path(out_dir))


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hubbard-quench",
        description="Quench dynamics of Hubbard models: 1/Z expansion and exact diagonalization.",
    )
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    parser.add_argument("--mode", help="override the mode given in the configuration")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        paths = run(args.config, args.out, args.mode)
    except (ConfigError, EmitError, ed.DimensionCapError, fermi.SublatticeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except bose.UnstableRegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
