"""Dense statevector engine.

Qubit 0 is the lowest bit of the amplitude index.  A Pauli word with masks
``(x, z)`` and coefficient ``c`` acts as ``P|k> = c i^{#Y} (-1)^{|k & z|} |k ^ x>``.
Sums are compiled once into flat mask/phase arrays and evaluated by numba
kernels that sweep terms in a fixed order, so results are reproducible bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np
import scipy.sparse

from .pauli import PauliString, PauliSum

MAX_QUBITS = 24
NORM_TOL = 1e-10


class StateError(ValueError):
    pass


@dataclass
class State:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise StateError(f"{self.n_qubits} qubits need {1 << self.n_qubits} amplitudes")
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)

    def copy(self) -> "State":
        return State(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def zero_state(n: int, max_qubits: int = MAX_QUBITS) -> State:
    if not 1 <= n <= max_qubits:
        raise StateError(f"qubit count must be in [1, {max_qubits}], got {n}")
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    return State(n, psi)


def basis_state(n: int, index: int) -> State:
    s = zero_state(n)
    s.amplitudes[0] = 0.0
    s.amplitudes[index] = 1.0
    return s


# ---------------------------------------------------------------------------
# kernels


@numba.njit(cache=True, inline="always")
def _sign(v):
    # (-1)^popcount(v)
    v ^= v >> 32
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return 1.0 - 2.0 * (v & 1)


@numba.njit(cache=True)
def _apply_term(psi, out, x, z, phase):
    for k in range(psi.shape[0]):
        out[k ^ x] += phase * _sign(k & z) * psi[k]


@numba.njit(cache=True)
def _apply_sum(psi, out, xs, zs, phases):
    for t in range(xs.shape[0]):
        x, z, ph = xs[t], zs[t], phases[t]
        for k in range(psi.shape[0]):
            out[k ^ x] += ph * _sign(k & z) * psi[k]


@numba.njit(cache=True)
def _expect_sum(bra, ket, xs, zs, phases):
    total = 0j
    for t in range(xs.shape[0]):
        x, z = xs[t], zs[t]
        acc = 0j
        for k in range(ket.shape[0]):
            acc += np.conj(bra[k ^ x]) * _sign(k & z) * ket[k]
        total += phases[t] * acc
    return total


@numba.njit(cache=True)
def _rotate(psi, x, z, phase, c, s):
    """In place ``psi <- (c + i s P) psi`` for a unit Pauli word ``P``."""
    n = psi.shape[0]
    isp = 1j * s * phase
    if x == 0:
        for k in range(n):
            psi[k] *= c + isp * _sign(k & z)
        return
    hb = 1
    while hb * 2 <= x:
        hb *= 2
    low = hb - 1
    for m in range(n // 2):
        k = ((m & ~low) << 1) | (m & low)
        j = k ^ x
        a = psi[k]
        b = psi[j]
        psi[k] = c * a + isp * _sign(j & z) * b
        psi[j] = c * b + isp * _sign(k & z) * a


# ---------------------------------------------------------------------------
# operator compilation


def _phase(p: PauliString) -> complex:
    ny = bin(p.x & p.z).count("1")
    return complex(p.coeff) * (1j) ** ny


@dataclass(frozen=True)
class CompiledSum:
    n: int
    xs: np.ndarray
    zs: np.ndarray
    phases: np.ndarray
    hermitian: bool


def compile_sum(op: PauliSum | PauliString) -> CompiledSum:
    if isinstance(op, PauliString):
        op = PauliSum(op.n, [op])
    terms = list(op)
    xs = np.array([t.x for t in terms], dtype=np.int64)
    zs = np.array([t.z for t in terms], dtype=np.int64)
    ph = np.array([_phase(t) for t in terms], dtype=np.complex128)
    return CompiledSum(op.n, xs, zs, ph, op.is_hermitian())


def _compiled(op) -> CompiledSum:
    return op if isinstance(op, CompiledSum) else compile_sum(op)


def _check(n: int, state: State):
    if n != state.n_qubits:
        raise StateError(f"operator on {n} qubits applied to a {state.n_qubits}-qubit state")


def apply_pauli(state: State, P: PauliString) -> State:
    _check(P.n, state)
    out = np.zeros_like(state.amplitudes)
    _apply_term(state.amplitudes, out, np.int64(P.x), np.int64(P.z), _phase(P))
    return State(state.n_qubits, out)


def apply_sum(op: PauliSum | CompiledSum, state: State) -> State:
    op = _compiled(op)
    _check(op.n, state)
    out = np.zeros_like(state.amplitudes)
    _apply_sum(state.amplitudes, out, op.xs, op.zs, op.phases)
    return State(state.n_qubits, out)


def _unit_phase(P: PauliString) -> complex:
    if P.x == 0 and P.z == 0:
        raise StateError("rotation generator must not be the identity")
    if abs(abs(P.coeff) - 1) > 1e-12 or abs(complex(P.coeff).imag) > 1e-12:
        raise StateError(f"rotation generator needs a unit real coefficient, got {P.coeff}")
    return _phase(P)


def rotate_inplace(state: State, P: PauliString, theta: float) -> None:
    _check(P.n, state)
    _rotate(state.amplitudes, np.int64(P.x), np.int64(P.z), _unit_phase(P), np.cos(theta), np.sin(theta))


def apply_rotation(state: State, P: PauliString, theta: float) -> State:
    """``exp(i theta P) |psi>`` for a Hermitian unit word ``P``."""
    out = state.copy()
    rotate_inplace(out, P, theta)
    return out


def expectation(H: PauliSum | CompiledSum, state: State, tol: float = 1e-10) -> float:
    H = _compiled(H)
    _check(H.n, state)
    if not H.hermitian:
        raise StateError("expectation needs a Hermitian operator")
    val = _expect_sum(state.amplitudes, state.amplitudes, H.xs, H.zs, H.phases)
    if abs(val.imag) > tol * max(1.0, abs(val.real)):
        raise StateError(f"expectation has imaginary part {val.imag:.3g}")
    return float(val.real)


def matrix_element(bra: State, op: PauliSum | CompiledSum, ket: State) -> complex:
    op = _compiled(op)
    _check(op.n, ket)
    _check(op.n, bra)
    return complex(_expect_sum(bra.amplitudes, ket.amplitudes, op.xs, op.zs, op.phases))


def overlap(a: State, b: State) -> complex:
    if a.n_qubits != b.n_qubits:
        raise StateError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def to_sparse(op: PauliSum | CompiledSum) -> scipy.sparse.csr_matrix:
    """Sparse matrix with ``M[k ^ x, k] = phase (-1)^{|k & z|}`` per term."""
    op = _compiled(op)
    d = 1 << op.n
    k = np.arange(d, dtype=np.int64)
    rows, cols, vals = [], [], []
    for x, z, ph in zip(op.xs, op.zs, op.phases):
        v = k & z
        par = np.zeros(d, dtype=np.int64)
        while v.any():
            par ^= v & 1
            v = v >> 1
        rows.append(k ^ x)
        cols.append(k)
        vals.append(ph * (1 - 2 * par))
    if not rows:
        return scipy.sparse.csr_matrix((d, d), dtype=np.complex128)
    return scipy.sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(d, d)
    )


def dump(state: State, path: str | Path) -> None:
    """Raw little-endian ``(re, im)`` float64 pairs; a debugging aid, not a stable format."""
    state.amplitudes.astype("<c16").tofile(str(path))


def load(path: str | Path) -> State:
    amp = np.fromfile(str(path), dtype="<c16").astype(np.complex128)
    n = amp.shape[0].bit_length() - 1
    if amp.shape[0] != 1 << n:
        raise StateError(f"{amp.shape[0]} amplitudes is not a power of two")
    return State(n, amp)


# ---------------------------------------------------------------------------
# gate sequences
#
# A compiled sequence is a list of unit words with a per-gate angle.  Gates with
# ``kind == 1`` are fixed Pauli operators applied as they stand; the others are
# rotations ``exp(i angle P)``.


@numba.njit(cache=True)
def _pauli_inplace(psi, x, z, phase):
    n = psi.shape[0]
    if x == 0:
        for k in range(n):
            psi[k] *= phase * _sign(k & z)
        return
    hb = 1
    while hb * 2 <= x:
        hb *= 2
    low = hb - 1
    for m in range(n // 2):
        k = ((m & ~low) << 1) | (m & low)
        j = k ^ x
        a = psi[k]
        psi[k] = phase * _sign(j & z) * psi[j]
        psi[j] = phase * _sign(k & z) * a


@numba.njit(cache=True)
def run_gates(psi, kinds, xs, zs, phases, angles):
    for g in range(xs.shape[0]):
        if kinds[g] == 1:
            _pauli_inplace(psi, xs[g], zs[g], phases[g])
        else:
            _rotate(psi, xs[g], zs[g], phases[g], np.cos(angles[g]), np.sin(angles[g]))


@numba.njit(cache=True)
def adjoint_sweep(psi, lam, kinds, xs, zs, phases, angles, out):
    """Walk the gates backwards from the final state ``psi`` and ``lam = A psi``.

    ``out[g]`` receives ``d<A>/d angle_g = 2 Re <lam_g| i P_g |psi_g>`` where both
    vectors are taken right after gate ``g``.  ``psi`` and ``lam`` are consumed.
    """
    for g in range(xs.shape[0] - 1, -1, -1):
        x, z, ph = xs[g], zs[g], phases[g]
        if kinds[g] == 1:
            out[g] = 0.0
            # fixed gates are Hermitian unit words, hence self-inverse
            _pauli_inplace(psi, x, z, ph)
            _pauli_inplace(lam, x, z, ph)
            continue
        acc = 0j
        for k in range(psi.shape[0]):
            acc += np.conj(lam[k ^ x]) * _sign(k & z) * psi[k]
        out[g] = 2.0 * (1j * ph * acc).real
        c, s = np.cos(angles[g]), np.sin(angles[g])
        _rotate(psi, x, z, ph, c, -s)
        _rotate(lam, x, z, ph, c, -s)
