"""Exact diagonalisation references.

Two routes share the statevector operator semantics: a dense LAPACK solve of
the assembled matrix, and a matrix-free Lanczos iteration with full
reorthogonalisation, explicit restarts and locking of converged vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .hamiltonians import Couplings, spin_hamiltonian
from .lattice import Lattice
from .pauli import PauliSum
from .statevector import CompiledSum, _apply_sum, compile_sum, to_sparse

DENSE_MAX_QUBITS = 12
ITERATIVE_MAX_QUBITS = 20
RESIDUAL_TOL = 1e-8


class OracleError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SpectrumRequest:
    operator: PauliSum
    k: int = 1
    mode: str = "dense"  # dense | iterative
    seed: int = 0

    def __post_init__(self):
        n = self.operator.n
        if self.mode not in ("dense", "iterative"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "dense" and n > DENSE_MAX_QUBITS:
            raise ValueError(f"dense mode is capped at {DENSE_MAX_QUBITS} qubits, got {n}")
        if self.mode == "iterative" and n > ITERATIVE_MAX_QUBITS:
            raise ValueError(f"iterative mode is capped at {ITERATIVE_MAX_QUBITS} qubits, got {n}")
        if not 1 <= self.k <= 1 << n:
            raise ValueError(f"k must be in [1, {1 << n}]")


def auto_mode(n_qubits: int) -> str:
    return "dense" if n_qubits <= DENSE_MAX_QUBITS else "iterative"


def _residual(op: CompiledSum, v: np.ndarray, lam: float) -> float:
    out = np.zeros_like(v)
    _apply_sum(v, out, op.xs, op.zs, op.phases)
    return float(np.linalg.norm(out - lam * v))


def _dense_matrix(op: CompiledSum) -> np.ndarray:
    H = to_sparse(op).toarray()
    # real matrices take the cheaper real symmetric driver
    return H.real.copy() if not np.any(H.imag) else H


def _dense_lowest(op: CompiledSum, k: int):
    H = _dense_matrix(op)
    w, v = scipy.linalg.eigh(H, subset_by_index=[0, k - 1], driver="evr")
    return w, v.astype(np.complex128)


def _dense(op: CompiledSum, k: int):
    w, v = _dense_lowest(op, k)
    return w, [np.ascontiguousarray(v[:, i]) for i in range(k)]


def _lanczos(op: CompiledSum, k: int, seed: int, krylov: int = 60, max_restarts: int = 500, tol: float = 1e-10):
    d = 1 << op.n
    m = min(krylov, d)
    rng = np.random.default_rng(seed)
    locked: list[np.ndarray] = []
    values: list[float] = []

    def matvec(v):
        out = np.zeros_like(v)
        _apply_sum(v, out, op.xs, op.zs, op.phases)
        return out

    def project_out(w, basis):
        if basis is not None and len(basis):
            w -= basis.T @ (basis.conj() @ w)
        return w

    for _ in range(k):
        L = np.array(locked) if locked else None
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v = project_out(v, L)
        v /= np.linalg.norm(v)
        lam, resid = np.inf, np.inf
        for _restart in range(max_restarts):
            V = np.zeros((m + 1, d), dtype=np.complex128)
            alpha, beta = [], []
            V[0] = v
            size = m
            for j in range(m):
                w = matvec(V[j])
                alpha.append(float(np.vdot(V[j], w).real))
                # two passes of classical Gram-Schmidt against the Krylov basis and locked vectors
                for _pass in range(2):
                    w = project_out(w, V[: j + 1])
                    w = project_out(w, L)
                b = float(np.linalg.norm(w))
                if j == m - 1 or b < 1e-12:
                    size = j + 1
                    break
                beta.append(b)
                V[j + 1] = w / b
            a = np.array(alpha)
            if size > 1:
                theta, Y = scipy.linalg.eigh_tridiagonal(a, np.array(beta[: size - 1]))
            else:
                theta, Y = a, np.ones((1, 1))
            lam = float(theta[0])
            v = Y[:, 0] @ V[:size]
            v = project_out(v, L)
            v /= np.linalg.norm(v)
            resid = float(np.linalg.norm(matvec(v) - lam * v))
            if resid <= tol * max(1.0, abs(lam)):
                break
        else:
            raise OracleError(f"Lanczos did not converge, residual {resid:.3g}")
        locked.append(v)
        values.append(lam)
    order = np.argsort(values, kind="stable")
    return np.array(values)[order], [locked[i] for i in order]


def lowest_eigenpairs(req: SpectrumRequest) -> list[tuple[float, np.ndarray]]:
    """``k`` lowest eigenpairs in ascending order, each checked for its residual."""
    op = compile_sum(req.operator)
    if not op.hermitian:
        raise OracleError("operator is not Hermitian")
    if req.mode == "dense":
        w, vecs = _dense(op, req.k)
    else:
        w, vecs = _lanczos(op, req.k, req.seed)
    out = []
    for lam, v in zip(w, vecs):
        r = _residual(op, v, lam)
        if r > RESIDUAL_TOL * max(1.0, abs(lam)):
            raise OracleError(f"eigenpair residual {r:.3g} exceeds {RESIDUAL_TOL}")
        out.append((float(lam), v))
    return out


def ground_space(op: PauliSum, tol: float = 1e-8, max_degeneracy: int = 32) -> tuple[float, np.ndarray]:
    """Ground energy and an orthonormal basis (columns) of the ground space, dense only."""
    if op.n > DENSE_MAX_QUBITS:
        raise ValueError(f"ground space needs dense mode (<= {DENSE_MAX_QUBITS} qubits)")
    k = min(1 << op.n, max_degeneracy + 1)
    w, v = _dense_lowest(compile_sum(op), k)
    keep = w <= w[0] + tol * max(1.0, abs(w[0]))
    if keep.all() and k < 1 << op.n:
        raise OracleError(f"ground space degeneracy exceeds {max_degeneracy}")
    return float(w[0]), v[:, keep]


def ground_infidelity(psi: np.ndarray, basis: np.ndarray) -> float:
    """``1 - |<ground|psi>|^2`` maximised over the (possibly degenerate) ground space."""
    amp = basis.conj().T @ psi
    return float(max(0.0, 1.0 - np.vdot(amp, amp).real / np.vdot(psi, psi).real))


def ground_energy_spin(lattice: Lattice, couplings: Couplings, mode: str | None = None) -> float:
    H = spin_hamiltonian(lattice, couplings)
    mode = mode or auto_mode(H.n)
    return lowest_eigenpairs(SpectrumRequest(H, 1, mode))[0][0]


def ground_expectations(H: PauliSum, observables: dict[str, PauliSum], tol: float = 1e-8) -> tuple[float, dict[str, float]]:
    """Ground energy and ground-space averaged expectation values (dense).

    Averaging over a degenerate ground space gives the zero-temperature limit
    and removes the arbitrariness of a single eigenvector.
    """
    E, basis = ground_space(H, tol)
    vals = {}
    for name, O in observables.items():
        M = to_sparse(O).toarray()
        vals[name] = float(np.trace(basis.conj().T @ M @ basis).real / basis.shape[1])
    return E, vals


def parity_sector_energies(op: PauliSum) -> tuple[float, float]:
    """Lowest eigenvalue in the ``Z^n = +1`` and ``Z^n = -1`` sectors (dense)."""
    if op.n > DENSE_MAX_QUBITS:
        raise ValueError(f"parity sectors need dense mode (<= {DENSE_MAX_QUBITS} qubits)")
    c = compile_sum(op)
    if np.any(np.array([bin(int(x)).count("1") % 2 for x in c.xs], dtype=bool)):
        raise OracleError("operator does not conserve Z parity")
    H = _dense_matrix(c)
    idx = np.arange(1 << op.n)
    odd = np.array([bin(i).count("1") & 1 for i in idx], dtype=bool)
    out = []
    for mask in (~odd, odd):
        block = H[np.ix_(mask, mask)]
        out.append(float(scipy.linalg.eigh(block, eigvals_only=True, subset_by_index=[0, 0], driver="evr")[0]))
    return out[0], out[1]


def ed_splitting(op: PauliSum) -> float:
    e_even, e_odd = parity_sector_energies(op)
    return abs(e_even - e_odd)
