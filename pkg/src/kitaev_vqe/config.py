"""Experiment configuration files.

Grammar, one entry per line::

    # comment
    section.key = value

Values are JSON scalars or lists (``1.5``, ``"text"``, ``[1, 1, 1.41421356]``),
bare words (``honeycomb``, ``true``) or a grid ``start/stop/steps`` that expands
to ``steps`` evenly spaced points including both ends.  Keys are listed in
``KEYS``; anything else is reported as an error together with its line number.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .hamiltonians import PROJECTOR_MAX_SPINS, Couplings
from .lattice import HONEYCOMB, KINDS, LatticeError, build_lattice
from .vqe import OptimizerConfig

EXPERIMENTS = ("fixed-gauge-sweep", "dynamical-field-sweep", "vortex-splitting", "single-run")

KEYS = {
    "experiment.kind": "one of " + ", ".join(EXPERIMENTS),
    "experiment.seed": "integer seed for optimizer restarts",
    "experiment.mode": "single-run only: fixed or dynamical",
    "lattice.kind": "honeycomb or square-octagon",
    "lattice.L1": "cells along a1",
    "lattice.L2": "cells along a2",
    "couplings.J": "[Jx, Jy, Jz]",
    "couplings.kappa": "three-spin coupling",
    "couplings.kappa_int": "interaction coupling, or the word kappa to follow the swept kappa",
    "couplings.h": "[hx, hy, hz]",
    "sweep.kappa": "grid of kappa values",
    "sweep.kappa_int": "list of kappa_int values (vortex-splitting)",
    "sweep.h": "grid of field magnitudes (dynamical-field-sweep)",
    "sweep.direction": "[dx, dy, dz] field direction multiplied by each sweep.h value",
    "gauge.vortices": "[p_a, p_b] plaquettes carrying a vortex pair, or empty",
    "gauge.winding": "[w1, w2] with entries 0 or 1: flip the links on the a1 / a2 seam",
    "optimizer.method": "bfgs or lbfgs",
    "optimizer.gradient": "adjoint, fd or shift",
    "optimizer.max_evaluations": "evaluation budget per run",
    "optimizer.fd_step": "central-difference step",
    "optimizer.tol": "tolerance on cost change between restarts",
    "optimizer.gtol": "gradient tolerance",
    "optimizer.restarts": "number of perturbed restarts",
    "optimizer.perturbation": "restart perturbation size",
    "output.path": "CSV output path",
    "output.trace": "optional CSV path for per-evaluation cost traces",
}


class ConfigError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("\n".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass
class ExperimentConfig:
    kind: str
    lattice_kind: str
    L1: int
    L2: int
    couplings: Couplings
    kappa_follows: bool = False
    kappa_grid: list[float] = field(default_factory=list)
    kappa_int_grid: list[float] = field(default_factory=list)
    h_grid: list[float] = field(default_factory=list)
    direction: tuple[float, float, float] = (0.0, 0.0, 1.0)
    vortices: tuple[int, int] | None = None
    winding: tuple[int, int] = (0, 0)
    mode: str = "fixed"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    output: str = "results.csv"
    trace: str | None = None
    seed: int = 0
    raw: dict[str, object] = field(default_factory=dict)


def _value(text: str, lineno: int, key: str):
    text = text.strip()
    if not text:
        raise ValueError("empty value")
    if text.count("/") == 2 and not text.startswith(("[", '"')):
        start, stop, steps = (s.strip() for s in text.split("/"))
        n = int(steps)
        if n < 1:
            raise ValueError("grid needs at least one step")
        return [float(v) for v in np.linspace(float(start), float(stop), n)]
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_text(text: str) -> tuple[dict[str, object], dict[str, int], list[str]]:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    diags: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            diags.append(f"line {lineno}: expected 'key = value'")
            continue
        key, val = (s.strip() for s in stripped.split("=", 1))
        if key not in KEYS:
            diags.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            diags.append(f"line {lineno}: duplicate key {key!r} (first on line {lines[key]})")
            continue
        try:
            values[key] = _value(val, lineno, key)
        except ValueError as exc:
            diags.append(f"line {lineno}: {key}: {exc}")
            continue
        lines[key] = lineno
    return values, lines, diags


def _grid(values, lines, key, diags) -> list[float]:
    if key not in values:
        return []
    v = values[key]
    where = f"line {lines[key]}: {key}"
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v]
    if not isinstance(v, list) or not v or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        diags.append(f"{where}: expected a nonempty numeric list or start/stop/steps grid")
        return []
    v = [float(x) for x in v]
    if not all(math.isfinite(x) for x in v):
        diags.append(f"{where}: values must be finite")
    if any(b <= a for a, b in zip(v, v[1:])):
        diags.append(f"{where}: grid must be strictly increasing")
    return v


def _triple(values, lines, key, default, diags):
    if key not in values:
        return default
    v = values[key]
    if not (isinstance(v, list) and len(v) == 3 and all(isinstance(x, (int, float)) for x in v)):
        diags.append(f"line {lines[key]}: {key}: expected three numbers")
        return default
    return tuple(float(x) for x in v)


def _number(values, lines, key, default, diags, kind=float):
    if key not in values:
        return default
    v = values[key]
    ok = isinstance(v, (int, float)) and not isinstance(v, bool)
    if kind is int:
        ok = ok and float(v).is_integer()
    if not ok:
        diags.append(f"line {lines[key]}: {key}: expected {'an integer' if kind is int else 'a number'}")
        return default
    return kind(v)


def build(values: dict[str, object], lines: dict[str, int], diags: list[str]) -> ExperimentConfig | None:
    def where(key):
        return f"line {lines[key]}: {key}" if key in lines else key

    kind = values.get("experiment.kind")
    if kind not in EXPERIMENTS:
        diags.append(f"{where('experiment.kind')}: expected one of {', '.join(EXPERIMENTS)}")
    lk = values.get("lattice.kind")
    if lk not in KINDS:
        diags.append(f"{where('lattice.kind')}: expected one of {', '.join(KINDS)}")
    L1 = _number(values, lines, "lattice.L1", None, diags, int)
    L2 = _number(values, lines, "lattice.L2", None, diags, int)
    if L1 is None or L2 is None:
        diags.append("lattice.L1 and lattice.L2 are required")
    for key, L in (("lattice.L1", L1), ("lattice.L2", L2)):
        if L is not None and L < 1:
            diags.append(f"{where(key)}: must be a positive integer")
    J = _triple(values, lines, "couplings.J", (1.0, 1.0, 1.0), diags)
    h = _triple(values, lines, "couplings.h", (0.0, 0.0, 0.0), diags)
    kappa = _number(values, lines, "couplings.kappa", 0.0, diags)
    follows = values.get("couplings.kappa_int") == "kappa"
    kappa_int = 0.0 if follows else _number(values, lines, "couplings.kappa_int", 0.0, diags)
    direction = _triple(values, lines, "sweep.direction", (0.0, 0.0, 1.0), diags)
    seed = _number(values, lines, "experiment.seed", 0, diags, int)
    mode = values.get("experiment.mode", "fixed")
    if mode not in ("fixed", "dynamical"):
        diags.append(f"{where('experiment.mode')}: expected fixed or dynamical")

    opt_kwargs = {"seed": seed}
    for key, typ in (
        ("max_evaluations", int),
        ("fd_step", float),
        ("tol", float),
        ("gtol", float),
        ("restarts", int),
        ("perturbation", float),
    ):
        full = f"optimizer.{key}"
        if full in values:
            opt_kwargs[key] = _number(values, lines, full, None, diags, typ)
    for key in ("method", "gradient"):
        if f"optimizer.{key}" in values:
            opt_kwargs[key] = str(values[f"optimizer.{key}"])
    try:
        optimizer = OptimizerConfig(**{k: v for k, v in opt_kwargs.items() if v is not None})
    except ValueError as exc:
        diags.append(f"optimizer: {exc}")
        optimizer = OptimizerConfig()

    vortices = None
    if values.get("gauge.vortices") not in (None, []):
        v = values["gauge.vortices"]
        if isinstance(v, list) and len(v) == 2 and all(isinstance(x, int) for x in v) and v[0] != v[1]:
            vortices = (v[0], v[1])
        else:
            diags.append(f"{where('gauge.vortices')}: expected two distinct plaquette indices")

    winding = (0, 0)
    if "gauge.winding" in values:
        v = values["gauge.winding"]
        if isinstance(v, list) and len(v) == 2 and all(x in (0, 1) and not isinstance(x, bool) for x in v):
            winding = (v[0], v[1])
        else:
            diags.append(f"{where('gauge.winding')}: expected [w1, w2] with entries 0 or 1")

    try:
        couplings = Couplings(J=J, kappa=kappa, kappa_int=kappa_int, h=h)
    except ValueError as exc:
        diags.append(f"couplings: {exc}")
        couplings = Couplings()

    cfg = ExperimentConfig(
        kind=str(kind),
        lattice_kind=str(lk),
        L1=L1 or 0,
        L2=L2 or 0,
        couplings=couplings,
        kappa_follows=follows,
        kappa_grid=_grid(values, lines, "sweep.kappa", diags),
        kappa_int_grid=_grid(values, lines, "sweep.kappa_int", diags),
        h_grid=_grid(values, lines, "sweep.h", diags),
        direction=direction,
        vortices=vortices,
        winding=winding,
        mode=str(mode),
        optimizer=optimizer,
        output=str(values.get("output.path", "results.csv")),
        trace=str(values["output.trace"]) if "output.trace" in values else None,
        seed=seed,
        raw=dict(values),
    )
    _semantic_checks(cfg, lines, diags)
    return cfg


def _semantic_checks(cfg: ExperimentConfig, lines, diags: list[str]) -> None:
    if cfg.lattice_kind not in KINDS or not cfg.L1 or not cfg.L2:
        return

    def at(key: str, msg: str) -> str:
        return f"line {lines[key]}: {msg}" if key in lines else msg

    try:
        lattice = build_lattice(cfg.lattice_kind, cfg.L1, cfg.L2)
    except LatticeError as exc:
        diags.append(at("lattice.kind", f"lattice: {exc}"))
        return
    N = lattice.n_sites
    fixed = cfg.kind in ("fixed-gauge-sweep", "vortex-splitting") or (cfg.kind == "single-run" and cfg.mode == "fixed")
    if fixed and cfg.couplings.has_field:
        diags.append(at("couplings.h", "couplings.h: a magnetic field mixes gauge sectors; fixed-gauge experiments need h = 0"))
    if fixed and N // 2 < 2:
        diags.append(at("lattice.kind", f"lattice: fixed-gauge ansatz needs N/2 >= 2 qubits, got N = {N}"))
    dynamical = cfg.kind == "dynamical-field-sweep" or (cfg.kind == "single-run" and cfg.mode == "dynamical")
    gauge_keys = sorted(k for k in cfg.raw if k.startswith("gauge."))
    if dynamical and gauge_keys:
        diags.append(at(gauge_keys[0], "gauge: links are dynamical here; gauge.* keys only apply to fixed-gauge experiments"))
    if dynamical and N > PROJECTOR_MAX_SPINS:
        diags.append(at("lattice.kind", f"lattice: dynamical-gauge runs are capped at {PROJECTOR_MAX_SPINS} spins, got {N}"))
    if cfg.kind == "fixed-gauge-sweep" and not cfg.kappa_grid:
        diags.append(at("sweep.kappa", "sweep.kappa: required for fixed-gauge-sweep"))
    if cfg.kind == "vortex-splitting":
        if not cfg.kappa_grid:
            diags.append(at("sweep.kappa", "sweep.kappa: required for vortex-splitting"))
        if cfg.vortices is None:
            diags.append(at("gauge.vortices", "gauge.vortices: required for vortex-splitting"))
        if cfg.kappa_follows:
            diags.append(at("couplings.kappa_int", "couplings.kappa_int: use sweep.kappa_int for vortex-splitting"))
    if cfg.kind == "dynamical-field-sweep":
        if not cfg.h_grid:
            diags.append(at("sweep.h", "sweep.h: required for dynamical-field-sweep"))
        if not any(cfg.direction):
            diags.append(at("sweep.direction", "sweep.direction: must not be zero"))
    if cfg.vortices is not None and not all(0 <= p < len(lattice.plaquettes) for p in cfg.vortices):
        diags.append(at("gauge.vortices", f"gauge.vortices: plaquette index out of range (lattice has {len(lattice.plaquettes)})"))
    if cfg.lattice_kind == HONEYCOMB and cfg.kind == "vortex-splitting" and min(cfg.L1, cfg.L2) < 2:
        diags.append(at("lattice.kind", "lattice: vortex experiments need L1, L2 >= 2"))


def validate_text(text: str) -> tuple[ExperimentConfig | None, list[str]]:
    values, lines, diags = parse_text(text)
    cfg = build(values, lines, diags)
    return (cfg if not diags else None), diags


def load(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    cfg, diags = validate_text(text)
    if diags:
        raise ConfigError(diags)
    return cfg
