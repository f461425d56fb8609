"""Exact solution of the quadratic sector.

With ``kappa_int = 0`` and a fixed gauge the Hamiltonian is
``H = (i/2) sum_ab K_ab c_a c_b`` for a real antisymmetric ``K``.  An orthogonal
``R`` brings ``K`` to ``(+) [[0, e_n], [-e_n, 0]]`` with ``e_n >= 0``; then
``H = sum_n e_n (2 n_n - 1)`` and the ground energy is ``-sum e_n``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Iterable, TextIO

import numpy as np
import scipy.linalg

from .hamiltonians import Couplings, fixed_gauge_terms
from .lattice import GaugeConfig, Lattice

GAPLESS = 1e-12
ORTHO_TOL = 1e-10


class CanonicalFormError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadraticProblem:
    K: np.ndarray

    def __post_init__(self):
        K = self.K
        if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] % 2:
            raise ValueError(f"K must be square with even size, got shape {K.shape}")
        if not np.array_equal(K.T, -K):
            raise ValueError("K must be exactly antisymmetric")


@dataclass(frozen=True)
class CanonicalForm:
    R: np.ndarray
    eps: np.ndarray  # descending
    det: int

    @property
    def vacuum_parity(self) -> int:
        """Eigenvalue of ``prod_n Z_n`` on the quasiparticle vacuum."""
        return self.det


def build_K(lattice: Lattice, gauge: GaugeConfig, c: Couplings) -> QuadraticProblem:
    """Single-particle matrix of the fixed-gauge model; ``kappa_int`` is ignored."""
    N = lattice.n_sites
    K = np.zeros((N, N))
    for t in fixed_gauge_terms(lattice, replace(c, kappa_int=0.0)):
        if len(t.matter) != 2:
            raise ValueError(f"non-quadratic term with matter {t.matter}")
        value = t.coeff
        for nu in t.links:
            value *= gauge.u[nu]
        # i K_ab c_a c_b for a < b
        k_ab = value / 1j
        if abs(k_ab.imag) > 1e-12:
            raise ValueError(f"complex hopping {k_ab} between {t.matter}")
        a, b = t.matter
        K[a, b] += k_ab.real
        K[b, a] -= k_ab.real
    return QuadraticProblem(K)


def canonical_form(K: np.ndarray | QuadraticProblem) -> CanonicalForm:
    """Block-diagonalise an antisymmetric matrix through its real Schur form."""
    if isinstance(K, QuadraticProblem):
        K = K.K
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    if K.shape != (n, n) or n % 2:
        raise ValueError(f"K must be square with even size, got shape {K.shape}")
    if not np.allclose(K, -K.T, atol=1e-12):
        raise ValueError("K is not antisymmetric")
    scale = max(np.abs(K).max(), 1.0)
    try:
        # nonzero pairs first; zero modes collect at the end as 1x1 blocks
        T, Z, _ = scipy.linalg.schur(K, output="real", sort=lambda re, im: abs(im) > GAPLESS * scale)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise CanonicalFormError(f"real Schur decomposition failed: {exc}") from exc
    R = Z.T.copy()
    eps = []
    k = 0
    while k < n:
        if k + 1 < n and abs(T[k + 1, k]) > GAPLESS * scale:
            e = T[k, k + 1]
            if e < 0:
                R[[k, k + 1]] = R[[k + 1, k]]
            eps.append(abs(e))
            k += 2
        else:
            # pair two zero modes
            if k + 1 >= n or abs(T[k + 1, k]) > GAPLESS * scale:
                raise CanonicalFormError("unpaired zero mode in Schur form")
            eps.append(0.0)
            k += 2
    eps = np.array(eps)
    order = np.argsort(-eps, kind="stable")
    perm = np.concatenate([[2 * m, 2 * m + 1] for m in order]).astype(int)
    R = R[perm]
    eps = eps[order]
    eps[eps < GAPLESS * scale] = 0.0
    if np.abs(R @ R.T - np.eye(n)).max() > ORTHO_TOL:
        raise CanonicalFormError("Schur vectors lost orthogonality")
    B = R @ K @ R.T
    target = np.zeros_like(K)
    for m, e in enumerate(eps):
        target[2 * m, 2 * m + 1], target[2 * m + 1, 2 * m] = e, -e
    resid = np.abs(B - target).max()
    if resid > 1e-9 * scale:
        raise CanonicalFormError(f"block-form residual {resid:.3g} too large")
    det = int(round(np.linalg.det(R)))
    return CanonicalForm(R, eps, det)


def ground_energy(cf: CanonicalForm) -> float:
    return -float(np.sum(cf.eps))


def parity_splitting(cf: CanonicalForm) -> float:
    """Cheapest single-quasiparticle excitation, ``2 min e_n``."""
    e = float(cf.eps.min())
    return 0.0 if e < GAPLESS else 2.0 * e


def sector_energy(cf: CanonicalForm, parity: int) -> float:
    """Lowest energy with ``prod_n Z_n = parity``."""
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    E = ground_energy(cf)
    return E if parity == cf.vacuum_parity else E + 2.0 * float(cf.eps.min())


def single_particle_energies(K: np.ndarray) -> np.ndarray:
    """Independent route: nonnegative eigenvalues of the Hermitian ``iK``, descending."""
    w = np.linalg.eigvalsh(1j * np.asarray(K))
    n = len(w) // 2
    return np.sort(np.abs(w[n:]))[::-1]


@dataclass(frozen=True)
class SweepRow:
    kappa: float
    kappa_int: float
    splitting: float
    E0: float


def splitting_sweep(
    lattice: Lattice, gauge: GaugeConfig, base: Couplings, kappas: Iterable[float]
) -> list[SweepRow]:
    rows = []
    for kappa in kappas:
        c = replace(base, kappa=float(kappa))
        cf = canonical_form(build_K(lattice, gauge, c))
        rows.append(SweepRow(float(kappa), c.kappa_int, parity_splitting(cf), ground_energy(cf)))
    return rows


def write_sweep_csv(rows: Iterable[SweepRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["kappa", "kappa_int", "splitting", "E0"])
    for r in rows:
        w.writerow([format_float(v) for v in (r.kappa, r.kappa_int, r.splitting, r.E0)])


def format_float(v: float) -> str:
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return f"{v:.17g}"
