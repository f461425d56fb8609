"""Cost functions, the classical optimiser loop and the two experiment drivers."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np
import scipy.optimize

from .ansatz import Circuit, bind, dynamical_gauge_ansatz, fixed_gauge_ansatz
from .freefermion import build_K, canonical_form, format_float, ground_energy
from .hamiltonians import (
    Couplings,
    HamiltonianError,
    constraint_sign,
    dynamical_gauge_hamiltonian,
    fixed_gauge_hamiltonian,
    observables,
    projector,
)
from .lattice import GaugeConfig, Lattice
from .pauli import PauliSum
from .statevector import CompiledSum, _apply_sum, _expect_sum, adjoint_sweep, compile_sum, run_gates, zero_state

DEGENERATE_NORM = 1e-8


class DegenerateCostError(ArithmeticError):
    """The trial state has (almost) no weight in the physical subspace."""


class BudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "bfgs"
    gradient: str = "adjoint"  # adjoint | fd | shift
    max_evaluations: int = 20000
    fd_step: float = 1e-5
    tol: float = 1e-10
    gtol: float = 1e-8
    restarts: int = 3
    perturbation: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0 or self.gtol <= 0:
            raise ValueError("tolerances must be positive")
        if self.method not in ("bfgs", "lbfgs"):
            raise ValueError(f"unknown optimizer method {self.method!r}")
        if self.gradient not in ("adjoint", "fd", "shift"):
            raise ValueError(f"unknown gradient {self.gradient!r}")
        if self.max_evaluations < 1 or self.restarts < 0:
            raise ValueError("max_evaluations must be positive and restarts nonnegative")


@dataclass
class VQEResult:
    best_energy: float
    best_parameters: np.ndarray
    parity_branch: str = "even"
    physical_norm: float | None = None
    evaluations: int = 0
    converged: bool = False
    state: np.ndarray | None = None
    observables: dict[str, float] = field(default_factory=dict)
    branches: dict[str, float] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# costs


class EnergyCost:
    """``theta -> <psi(theta)|H|psi(theta)>`` with adjoint and shift-rule gradients."""

    def __init__(self, H: PauliSum, circuit: Circuit):
        if H.n != circuit.n_qubits:
            raise ValueError(f"operator on {H.n} qubits, circuit on {circuit.n_qubits}")
        if not H.is_hermitian():
            raise ValueError("cost operator must be Hermitian")
        self.H = compile_sum(H)
        self.circuit = circuit
        self.cc = circuit.compiled

    def state(self, theta) -> np.ndarray:
        return bind(self.circuit, theta).amplitudes

    def _state_from_angles(self, angles) -> np.ndarray:
        psi = zero_state(self.circuit.n_qubits).amplitudes
        run_gates(psi, self.cc.kinds, self.cc.xs, self.cc.zs, self.cc.phases, angles)
        return psi

    def value_from_state(self, psi) -> float:
        return float(_expect_sum(psi, psi, self.H.xs, self.H.zs, self.H.phases).real)

    def __call__(self, theta) -> float:
        return self.value_from_state(self.state(theta))

    def _adjoint(self, psi, lam, theta) -> np.ndarray:
        per_word = np.zeros(len(self.cc.xs))
        adjoint_sweep(psi, lam, self.cc.kinds, self.cc.xs, self.cc.zs, self.cc.phases, self.cc.angles(theta), per_word)
        return self._collect(per_word)

    def _collect(self, per_word) -> np.ndarray:
        grad = np.zeros(self.circuit.parameter_count)
        mask = self.cc.params >= 0
        np.add.at(grad, self.cc.params[mask], per_word[mask] * self.cc.weights[mask])
        return grad

    def value_and_grad(self, theta) -> tuple[float, np.ndarray]:
        theta = np.asarray(theta, dtype=float)
        psi = self.state(theta)
        E = self.value_from_state(psi)
        lam = np.zeros_like(psi)
        _apply_sum(psi, lam, self.H.xs, self.H.zs, self.H.phases)
        return E, self._adjoint(psi, lam, theta)

    def shift_gradient(self, theta) -> np.ndarray:
        """Two-term shift rule per word: ``dE/dphi = E(phi + pi/4) - E(phi - pi/4)``."""
        theta = np.asarray(theta, dtype=float)
        base = self.cc.angles(theta)
        per_word = np.zeros(len(base))
        for g in range(len(base)):
            if self.cc.params[g] < 0:
                continue
            up, down = base.copy(), base.copy()
            up[g] += np.pi / 4
            down[g] -= np.pi / 4
            per_word[g] = self.value_from_state(self._state_from_angles(up)) - self.value_from_state(
                self._state_from_angles(down)
            )
        return self._collect(per_word)


class ProjectedCost(EnergyCost):
    """``<P H> / <P>`` with ``P H`` expanded once."""

    def __init__(self, H: PauliSum, P: PauliSum, circuit: Circuit):
        super().__init__(H, circuit)
        PH = (P * H).real()
        self.PH = compile_sum(PH)
        self.P = compile_sum(P)

    def norm_from_state(self, psi) -> float:
        return float(_expect_sum(psi, psi, self.P.xs, self.P.zs, self.P.phases).real)

    def value_from_state(self, psi) -> float:
        p = self.norm_from_state(psi)
        if p < DEGENERATE_NORM:
            raise DegenerateCostError(f"physical weight {p:.3g} below {DEGENERATE_NORM}")
        return float(_expect_sum(psi, psi, self.PH.xs, self.PH.zs, self.PH.phases).real) / p

    def value_and_grad(self, theta) -> tuple[float, np.ndarray]:
        theta = np.asarray(theta, dtype=float)
        psi = self.state(theta)
        C = self.value_from_state(psi)
        p = self.norm_from_state(psi)
        # d(<PH>/<P>) = d<PH - C P> / <P>
        lam = np.zeros_like(psi)
        _apply_sum(psi, lam, self.PH.xs, self.PH.zs, self.PH.phases)
        _apply_sum(psi, lam, self.P.xs, self.P.zs, -C * self.P.phases)
        return C, self._adjoint(psi, lam, theta) / p

    def shift_gradient(self, theta):
        raise NotImplementedError("the shift rule does not apply to a ratio of expectations")


def energy_cost(H: PauliSum, circuit: Circuit, theta) -> float:
    return EnergyCost(H, circuit)(theta)


def projected_cost(H: PauliSum, P: PauliSum, circuit: Circuit, theta) -> float:
    return ProjectedCost(H, P, circuit)(theta)


def fd_gradient(f: Callable[[np.ndarray], float], theta, h: float = 1e-5) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    g = np.zeros_like(theta)
    for k in range(len(theta)):
        e = np.zeros_like(theta)
        e[k] = h
        g[k] = (f(theta + e) - f(theta - e)) / (2 * h)
    return g


# ---------------------------------------------------------------------------
# optimiser


@dataclass
class MinimizeResult:
    fun: float
    x: np.ndarray
    evaluations: int
    converged: bool
    trace: list[tuple[int, float]]


def minimize(
    cost: Callable[[np.ndarray], float] | EnergyCost,
    theta0,
    cfg: OptimizerConfig,
    value_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]] | None = None,
) -> MinimizeResult:
    """Quasi-Newton minimisation with seeded restarts around the incumbent.

    Every cost evaluation (gradient sweeps included) counts against
    ``cfg.max_evaluations``; the best point seen is always returned.
    """
    theta0 = np.asarray(theta0, dtype=float)
    rng = np.random.default_rng(cfg.seed)
    count = 0
    best = [np.inf, theta0.copy()]
    trace: list[tuple[int, float]] = []

    def record(x, f):
        trace.append((count, float(f)))
        if f < best[0]:
            best[0], best[1] = float(f), np.array(x, dtype=float)

    def spend(n):
        nonlocal count
        if count + n > cfg.max_evaluations:
            raise BudgetExhausted
        count += n

    if value_and_grad is None and isinstance(cost, EnergyCost):
        if cfg.gradient == "adjoint":
            value_and_grad = cost.value_and_grad
        elif cfg.gradient == "shift":

            def value_and_grad(x, _c=cost):
                return _c(x), _c.shift_gradient(x)

    def fun(x):
        try:
            if value_and_grad is not None and cfg.gradient != "fd":
                spend(1)
                f, g = value_and_grad(x)
            else:
                spend(1 + 2 * len(x))
                f = cost(x)
                g = fd_gradient(cost, x, cfg.fd_step)
        except DegenerateCostError:
            # penalised point; the line search backs off and restarts reseed
            return (best[0] if np.isfinite(best[0]) else 0.0) + 1e6, np.zeros_like(x)
        record(x, f)
        return f, g

    scipy_method = "BFGS" if cfg.method == "bfgs" else "L-BFGS-B"
    options = {"gtol": cfg.gtol, "maxiter": 10 * cfg.max_evaluations}
    if scipy_method == "L-BFGS-B":
        options = {"gtol": cfg.gtol, "ftol": cfg.tol, "maxiter": 10 * cfg.max_evaluations}

    converged = False
    start = theta0
    previous = np.inf
    try:
        for attempt in range(cfg.restarts + 1):
            res = scipy.optimize.minimize(fun, start, jac=True, method=scipy_method, options=options)
            gnorm = float(np.max(np.abs(res.jac))) if res.jac is not None else np.inf
            converged = bool(res.success) or gnorm <= 10 * cfg.gtol
            if attempt > 0 and previous - best[0] <= cfg.tol and converged:
                break
            previous = best[0]
            if attempt < cfg.restarts:
                start = best[1] + cfg.perturbation * rng.standard_normal(len(theta0))
    except BudgetExhausted:
        converged = False
    if not np.isfinite(best[0]):
        raise ValueError("cost was never evaluated within the budget")
    return MinimizeResult(best[0], best[1], count, converged, trace)


def write_trace_csv(trace: list[tuple[int, float]], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["evaluation", "cost"])
    for k, f in trace:
        w.writerow([k, format_float(f)])


# ---------------------------------------------------------------------------
# drivers


def _freefermion_bound(lattice: Lattice, gauge: GaugeConfig, c: Couplings) -> float:
    return ground_energy(canonical_form(build_K(lattice, gauge, c)))


def run_fixed_gauge(
    lattice: Lattice,
    gauge: GaugeConfig,
    couplings: Couplings,
    cfg: OptimizerConfig = OptimizerConfig(),
    include_quartic: bool | None = None,
    both_branches: bool = False,
    trace: list | None = None,
) -> VQEResult:
    """Fixed-gauge VQE over the even branch and, when needed, the particle-hole branch."""
    if couplings.has_field:
        raise HamiltonianError("fixed-gauge VQE needs h = 0")
    H = fixed_gauge_hamiltonian(lattice, gauge, couplings)
    if include_quartic is None:
        include_quartic = couplings.kappa_int != 0
    bound = _freefermion_bound(lattice, gauge, couplings)
    N = lattice.n_sites
    results: dict[str, tuple[MinimizeResult, EnergyCost]] = {}
    for branch, ph in (("even", False), ("odd", True)):
        if branch == "odd" and not both_branches and couplings.kappa_int == 0:
            even = results["even"][0]
            if even.fun - bound <= 1e-6 * max(1.0, abs(bound)):
                break
        cost = EnergyCost(H, fixed_gauge_ansatz(N, include_quartic, ph))
        run = minimize(cost, np.zeros(cost.circuit.parameter_count), cfg)
        results[branch] = (run, cost)
        if trace is not None:
            trace += [(branch, k, f) for k, f in run.trace]
    branch = min(results, key=lambda b: results[b][0].fun)
    run, cost = results[branch]
    return VQEResult(
        best_energy=run.fun,
        best_parameters=run.x,
        parity_branch=branch,
        evaluations=sum(r.evaluations for r, _ in results.values()),
        converged=run.converged,
        state=cost.state(run.x),
        branches={b: r.fun for b, (r, _) in results.items()},
    )


def projected_expectations(psi: np.ndarray, P: CompiledSum, ops: dict[str, PauliSum]) -> tuple[float, dict[str, float]]:
    """``<P>`` and ``<P O P>/<P>`` for each observable."""
    Ppsi = np.zeros_like(psi)
    _apply_sum(psi, Ppsi, P.xs, P.zs, P.phases)
    norm = float(np.vdot(psi, Ppsi).real)
    out = {}
    for name, O in ops.items():
        c = compile_sum(O)
        out[name] = float(_expect_sum(Ppsi, Ppsi, c.xs, c.zs, c.phases).real) / norm
    return norm, out


def run_dynamical(
    lattice: Lattice,
    couplings: Couplings,
    cfg: OptimizerConfig = OptimizerConfig(),
    parity_flip: bool | None = None,
    trace: list | None = None,
) -> VQEResult:
    """Dynamical-gauge VQE on the projected cost, started from ``|0...0>``.

    ``parity_flip=None`` prefixes the circuit with one matter Majorana exactly
    when ``|0...0>`` has the wrong total parity to be physical.
    """
    H = dynamical_gauge_hamiltonian(lattice, couplings)
    P = projector(lattice)
    if parity_flip is None:
        parity_flip = constraint_sign(lattice) == -1
    cost = ProjectedCost(H, P, dynamical_gauge_ansatz(lattice, parity_flip))
    run = minimize(cost, np.zeros(cost.circuit.parameter_count), cfg)
    if trace is not None:
        trace += [("dynamical", k, f) for k, f in run.trace]
    psi = cost.state(run.x)
    obs = observables(lattice)
    ops = {"m_z": obs.m_z, "w": obs.w}
    for p, W in enumerate(obs.plaquettes):
        ops[f"W{p}"] = W
    norm, vals = projected_expectations(psi, cost.P, ops)
    phi = np.zeros_like(psi)
    _apply_sum(psi, phi, cost.P.xs, cost.P.zs, cost.P.phases)
    phi /= np.linalg.norm(phi)
    vals["physical_residual"] = abs(1.0 - float(_expect_sum(phi, phi, cost.P.xs, cost.P.zs, cost.P.phases).real))
    return VQEResult(
        best_energy=run.fun,
        best_parameters=run.x,
        parity_branch="odd" if parity_flip else "even",
        physical_norm=norm,
        evaluations=run.evaluations,
        converged=run.converged,
        state=psi,
        observables=vals,
    )
