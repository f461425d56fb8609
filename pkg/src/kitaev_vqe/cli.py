"""Command-line experiment runner.

    kitaev-vqe run <config> [--output PATH]
    kitaev-vqe validate <config>
    kitaev-vqe oracle <config> [--output PATH]

``run`` writes one CSV plus ``<csv>.manifest.json``; ``oracle`` writes only the
exact-reference columns (default path ``<stem>.oracle.csv``).  Sweep points are
computed by a process pool whose size comes from ``KITAEV_VQE_WORKERS``
(default 1); rows are written and flushed in grid order as they complete.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, validate_text
from .freefermion import (
    CanonicalFormError,
    build_K,
    canonical_form,
    format_float,
    ground_energy,
    parity_splitting,
)
from .hamiltonians import Couplings, HamiltonianError, fixed_gauge_hamiltonian, spin_hamiltonian, spin_observables
from .lattice import Lattice, build_lattice, flip_winding, insert_vortex_pair, standard_gauge
from .oracle import DENSE_MAX_QUBITS, OracleError, ed_splitting, ground_expectations, ground_infidelity, ground_space
from .vqe import DegenerateCostError, run_dynamical, run_fixed_gauge

WORKERS_ENV = "KITAEV_VQE_WORKERS"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

NUMERIC_ERRORS = (OracleError, CanonicalFormError, DegenerateCostError, FloatingPointError, np.linalg.LinAlgError)

COLUMNS = {
    ("run", "fixed-gauge-sweep"): ["kappa", "E_vqe", "E_exact", "E_error", "infidelity"],
    ("run", "dynamical-field-sweep"): ["h", "E_vqe", "E_exact", "m_z_vqe", "m_z_exact", "w_vqe", "w_exact", "phys_norm"],
    ("run", "vortex-splitting"): ["kappa", "kappa_int", "splitting"],
    ("run", "single-run/fixed"): ["E_vqe", "E_exact", "E_error", "infidelity", "parity_branch", "evaluations", "converged"],
    ("run", "single-run/dynamical"): [
        "E_vqe", "E_exact", "E_error", "m_z_vqe", "m_z_exact", "w_vqe", "w_exact", "phys_norm", "evaluations", "converged",
    ],
    ("oracle", "fixed-gauge-sweep"): ["kappa", "E_exact"],
    ("oracle", "dynamical-field-sweep"): ["h", "E_exact", "m_z_exact", "w_exact"],
    ("oracle", "vortex-splitting"): ["kappa", "kappa_int", "splitting"],
    ("oracle", "single-run/fixed"): ["E_exact"],
    ("oracle", "single-run/dynamical"): ["E_exact", "m_z_exact", "w_exact"],
}


def _table(cfg: ExperimentConfig) -> str:
    return f"single-run/{cfg.mode}" if cfg.kind == "single-run" else cfg.kind


def columns(cfg: ExperimentConfig, command: str = "run") -> list[str]:
    return COLUMNS[(command, _table(cfg))]


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    return str(v)


# ---------------------------------------------------------------------------
# experiment points


def lattice_of(cfg: ExperimentConfig) -> Lattice:
    return build_lattice(cfg.lattice_kind, cfg.L1, cfg.L2)


def gauge_of(cfg: ExperimentConfig, lattice: Lattice):
    g = standard_gauge(lattice)
    for d, w in enumerate(cfg.winding):
        if w:
            g = flip_winding(lattice, g, d)
    if cfg.vortices is not None:
        g = insert_vortex_pair(lattice, g, *cfg.vortices)
    return g


def points(cfg: ExperimentConfig) -> list[dict]:
    if cfg.kind == "fixed-gauge-sweep":
        return [{"kappa": k} for k in cfg.kappa_grid]
    if cfg.kind == "dynamical-field-sweep":
        return [{"h": h} for h in cfg.h_grid]
    if cfg.kind == "vortex-splitting":
        return [{"kappa": k, "kappa_int": ki} for ki in (cfg.kappa_int_grid or [0.0]) for k in cfg.kappa_grid]
    return [{}]


def _couplings(cfg: ExperimentConfig, point: dict) -> Couplings:
    c = cfg.couplings
    if "kappa" in point:
        c = replace(c, kappa=point["kappa"])
        if cfg.kappa_follows:
            c = replace(c, kappa_int=point["kappa"])
    if cfg.kappa_follows and "kappa" not in point:
        c = replace(c, kappa_int=c.kappa)
    if "kappa_int" in point:
        c = replace(c, kappa_int=point["kappa_int"])
    if "h" in point:
        c = replace(c, h=tuple(point["h"] * d for d in cfg.direction))
    return c


def _fixed_exact(lattice, gauge, c: Couplings):
    """Fixed-gauge ground energy and ground-space basis (basis is None past the dense cap)."""
    n = lattice.n_sites // 2
    if n <= DENSE_MAX_QUBITS:
        return ground_space(fixed_gauge_hamiltonian(lattice, gauge, c))
    if c.kappa_int != 0:
        raise OracleError(f"no exact reference for an interacting problem on {n} qubits")
    return ground_energy(canonical_form(build_K(lattice, gauge, c))), None


def _spin_exact(lattice, c: Couplings):
    obs = spin_observables(lattice)
    return ground_expectations(spin_hamiltonian(lattice, c), {"m_z": obs.m_z, "w": obs.w})


def _splitting(lattice, gauge, c: Couplings) -> float:
    if c.kappa_int == 0:
        return parity_splitting(canonical_form(build_K(lattice, gauge, c)))
    return ed_splitting(fixed_gauge_hamiltonian(lattice, gauge, c))


def _rel(a: float, b: float) -> float:
    return abs((a - b) / b) if b != 0 else abs(a - b)


def compute_point(cfg: ExperimentConfig, point: dict, command: str = "run") -> tuple[list, list]:
    """One CSV row (in ``columns`` order) and the optimizer trace for that point."""
    lattice = lattice_of(cfg)
    c = _couplings(cfg, point)
    vqe = command == "run"
    trace: list = []
    table = _table(cfg)

    if cfg.kind == "vortex-splitting":
        return [point["kappa"], point["kappa_int"], _splitting(lattice, gauge_of(cfg, lattice), c)], trace

    if table in ("fixed-gauge-sweep", "single-run/fixed"):
        gauge = gauge_of(cfg, lattice)
        E_exact, basis = _fixed_exact(lattice, gauge, c)
        lead = [point["kappa"]] if "kappa" in point else []
        if not vqe:
            return lead + [E_exact], trace
        res = run_fixed_gauge(lattice, gauge, c, cfg.optimizer, trace=trace)
        infid = ground_infidelity(res.state, basis) if basis is not None else float("nan")
        row = lead + [res.best_energy, E_exact, _rel(res.best_energy, E_exact), infid]
        if table == "single-run/fixed":
            row += [res.parity_branch, res.evaluations, res.converged]
        return row, trace

    E_exact, ex = _spin_exact(lattice, c)
    lead = [point["h"]] if "h" in point else []
    if not vqe:
        return lead + [E_exact, ex["m_z"], ex["w"]], trace
    res = run_dynamical(lattice, c, cfg.optimizer, trace=trace)
    obs = res.observables
    if table == "dynamical-field-sweep":
        return lead + [res.best_energy, E_exact, obs["m_z"], ex["m_z"], obs["w"], ex["w"], res.physical_norm], trace
    return [
        res.best_energy, E_exact, _rel(res.best_energy, E_exact),
        obs["m_z"], ex["m_z"], obs["w"], ex["w"], res.physical_norm, res.evaluations, res.converged,
    ], trace


def _worker(args):
    cfg, point, command = args
    return compute_point(cfg, point, command)


# ---------------------------------------------------------------------------
# output


def _versions() -> dict[str, str]:
    import numba
    import scipy

    return {
        "kitaev_vqe": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def write_manifest(path: Path, cfg: ExperimentConfig, command: str, config_text: str) -> None:
    manifest = {
        "command": command,
        "experiment": cfg.kind,
        "seed": cfg.seed,
        "columns": columns(cfg, command),
        "config": {k: cfg.raw[k] for k in sorted(cfg.raw)},
        "config_text": config_text,
        "optimizer": asdict(cfg.optimizer),
        "versions": _versions(),
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError([f"{WORKERS_ENV}={raw!r} is not an integer"]) from None
    if n < 1:
        raise ConfigError([f"{WORKERS_ENV} must be at least 1"])
    return n


def run_experiment(cfg: ExperimentConfig, output: str | Path, command: str = "run", config_text: str = "") -> Path:
    """Compute every point and write the CSV, its manifest and the optional trace."""
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_manifest(out.with_name(out.name + ".manifest.json"), cfg, command, config_text)
    pts = points(cfg)
    jobs = [(cfg, p, command) for p in pts]
    n = min(workers(), len(jobs))
    traces = []
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns(cfg, command))
        fh.flush()
        if n > 1:
            pool = ProcessPoolExecutor(max_workers=n)
            results = pool.map(_worker, jobs)
        else:
            pool = None
            results = map(_worker, jobs)
        try:
            for k, (row, trace) in enumerate(results):
                w.writerow([_cell(v) for v in row])
                fh.flush()
                traces += [(k, *t) for t in trace]
        finally:
            if pool is not None:
                pool.shutdown(cancel_futures=True)
    if cfg.trace and command == "run":
        with open(cfg.trace, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["point", "branch", "evaluation", "cost"])
            for k, branch, i, f in traces:
                w.writerow([k, branch, i, format_float(f)])
    return out


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kitaev-vqe", description="Kitaev-model VQE experiments on a statevector simulator")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "run the experiment and write CSV + manifest"),
        ("validate", "check a configuration file"),
        ("oracle", "exact-diagonalisation references only"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("config")
        if name != "validate":
            s.add_argument("--output", "-o", help="override output.path")
    return p


def _default_oracle_path(path: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + ".oracle" + (p.suffix or ".csv")))


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cfg, diags = validate_text(text)
    if diags:
        for d in diags:
            print(f"{args.config}: {d}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(f"{args.config}: ok ({cfg.kind}, {len(points(cfg))} points)")
        return EXIT_OK
    output = args.output or (cfg.output if args.command == "run" else _default_oracle_path(cfg.output))
    try:
        path = run_experiment(cfg, output, args.command, text)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return EXIT_CONFIG
    except (*NUMERIC_ERRORS, HamiltonianError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
