"""Parameterised circuits built from fermionic pair-creation exponentials.

Modes are Jordan-Wigner qubits with ``a_m = (c_{2m} + i c_{2m+1}) / 2``, so
``|0...0>`` is the fermionic vacuum.  Every generator is Hermitian and expands
into mutually commuting Pauli words; a gate with parameter ``theta`` and
generator ``sum_s w_s P_s`` is applied as the exact product of
``exp(i theta w_s P_s)`` over its words.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .lattice import Lattice
from .pauli import PauliString, PauliSum, jw_majorana
from .statevector import State, _phase, run_gates, zero_state


class AnsatzError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """Rotation ``exp(i theta_param sum_s weights[s] strings[s])``, or a fixed word when ``param`` is None."""

    strings: tuple[PauliString, ...]
    weights: tuple[float, ...]
    param: int | None
    label: str = ""


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]
    parameter_count: int
    blocks: tuple[tuple[str, int], ...] = ()  # (name, parameter count) in order

    def __post_init__(self):
        seen = sorted({g.param for g in self.gates if g.param is not None})
        if seen != list(range(self.parameter_count)):
            raise AnsatzError("parameter indices must cover 0..parameter_count-1")
        for g in self.gates:
            for a, b in combinations(g.strings, 2):
                if not a.commutes_with(b):
                    raise AnsatzError(f"generator words {a.word} and {b.word} do not commute")

    def block_count(self, name: str) -> int:
        return sum(n for b, n in self.blocks if b == name)

    def render(self) -> str:
        lines = []
        for g in self.gates:
            for p, w in zip(g.strings, g.weights):
                head = "fixed" if g.param is None else f"theta[{g.param}]"
                lines.append(f"{head} * ({w:+.12g}) {p.word}")
        return "\n".join(lines)

    @cached_property
    def compiled(self) -> "CompiledCircuit":
        return _compile(self)


@dataclass(frozen=True)
class CompiledCircuit:
    kinds: np.ndarray
    xs: np.ndarray
    zs: np.ndarray
    phases: np.ndarray
    weights: np.ndarray
    params: np.ndarray  # -1 for fixed words

    def angles(self, theta: np.ndarray) -> np.ndarray:
        out = np.zeros(len(self.xs))
        mask = self.params >= 0
        out[mask] = theta[self.params[mask]] * self.weights[mask]
        return out


def _compile(circuit: Circuit) -> CompiledCircuit:
    kinds, xs, zs, phases, weights, params = [], [], [], [], [], []
    for g in circuit.gates:
        for p, w in zip(g.strings, g.weights):
            kinds.append(1 if g.param is None else 0)
            xs.append(p.x)
            zs.append(p.z)
            phases.append(_phase(p))
            weights.append(w)
            params.append(-1 if g.param is None else g.param)
    return CompiledCircuit(
        np.array(kinds, dtype=np.int64),
        np.array(xs, dtype=np.int64),
        np.array(zs, dtype=np.int64),
        np.array(phases, dtype=np.complex128),
        np.array(weights, dtype=float),
        np.array(params, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# fermionic generators


def annihilator(m: int, n_qubits: int) -> PauliSum:
    return PauliSum(n_qubits, [jw_majorana(2 * m, n_qubits).scaled(0.5), jw_majorana(2 * m + 1, n_qubits).scaled(0.5j)])


def creator(m: int, n_qubits: int) -> PauliSum:
    return annihilator(m, n_qubits).adjoint()


def _product(ops) -> PauliSum:
    out = ops[0]
    for o in ops[1:]:
        out = out * o
    return out


def creation_generators(modes: tuple[int, ...], n_qubits: int) -> tuple[PauliSum, PauliSum]:
    """Hermitian ``C + C^dag`` and ``-i (C - C^dag)`` for ``C = a^dag_{m1} a^dag_{m2} ...``."""
    C = _product([creator(m, n_qubits) for m in modes])
    Cd = C.adjoint()
    return (C + Cd).real(), ((C - Cd) * -1j).real()


def _gate(generator: PauliSum, param: int, label: str) -> Gate:
    strings, weights = [], []
    for p in generator:
        strings.append(PauliString(p.n, p.x, p.z, 1.0))
        weights.append(float(p.coeff.real))
    return Gate(tuple(strings), tuple(weights), param, label)


def _pair_block(pairs, n_qubits: int, start: int, tag: str) -> list[Gate]:
    gates = []
    k = start
    for modes in pairs:
        g1, g2 = creation_generators(tuple(modes), n_qubits)
        name = ",".join(map(str, modes))
        gates.append(_gate(g1, k, f"{tag}1({name})"))
        gates.append(_gate(g2, k + 1, f"{tag}2({name})"))
        k += 2
    return gates


def parity_flip_gate(n_qubits: int) -> Gate:
    """The first matter Majorana as a fixed word."""
    return Gate((jw_majorana(0, n_qubits),), (1.0,), None, "c1")


def fixed_gauge_ansatz(N: int, include_quartic: bool = False, particle_hole: bool = False) -> Circuit:
    """Circuit on ``N/2`` qubits.

    Application order: quartic gates (if any), pair gates, then the optional
    particle-hole word.  Pair parameters come first in the parameter vector.
    The quartic gates act on the vacuum before the pair gates dress it, which
    is what lets the pair block play the role of the quasiparticle rotation.
    """
    if N % 2 or N // 2 < 2:
        raise AnsatzError(f"need an even spin count with N/2 >= 2, got {N}")
    n = N // 2
    pair = _pair_block(combinations(range(n), 2), n, 0, "a")
    blocks = [("a", len(pair))]
    gates: list[Gate] = []
    if include_quartic:
        quad = _pair_block(combinations(range(n), 4), n, len(pair), "b")
        gates += quad
        blocks.append(("b", len(quad)))
    gates += pair
    if particle_hole:
        # last, so the branch is c_1 applied to the whole even manifold
        gates.append(parity_flip_gate(n))
    return Circuit(n, tuple(gates), sum(b for _, b in blocks), tuple(blocks))


def dynamical_gauge_ansatz(lattice: Lattice, parity_flip: bool = False) -> Circuit:
    """Circuit on ``2N`` qubits: matter pairs, gauge pairs, matter-gauge pairs, then the optional parity flip."""
    N = lattice.n_sites
    if N % 2:
        raise AnsatzError("odd number of sites")
    nq = 2 * N
    matter = range(N // 2)
    gauge = range(N // 2, nq)
    gates: list[Gate] = []
    blocks = []
    start = 0
    for name, pairs in (
        ("a", list(combinations(matter, 2))),
        ("b", list(combinations(gauge, 2))),
        ("c", [(i, g) for i in matter for g in gauge]),
    ):
        block = _pair_block(pairs, nq, start, name)
        gates += block
        blocks.append((name, len(block)))
        start += len(block)
    if parity_flip:
        gates.append(parity_flip_gate(nq))
    return Circuit(nq, tuple(gates), start, tuple(blocks))


def bind(circuit: Circuit, theta, state: State | None = None) -> State:
    """Apply the gates in order to a copy of ``state`` (default ``|0...0>``)."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.parameter_count,):
        raise AnsatzError(f"expected {circuit.parameter_count} parameters, got shape {theta.shape}")
    out = zero_state(circuit.n_qubits) if state is None else state.copy()
    if out.n_qubits != circuit.n_qubits:
        raise AnsatzError(f"circuit on {circuit.n_qubits} qubits, state on {out.n_qubits}")
    cc = circuit.compiled
    run_gates(out.amplitudes, cc.kinds, cc.xs, cc.zs, cc.phases, cc.angles(theta))
    return out
