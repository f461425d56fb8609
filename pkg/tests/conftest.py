"""Shared helpers.

``kron_matrix`` builds operators from 2x2 Pauli matrices with ``np.kron`` and is
deliberately independent of the bit-mask kernels in ``statevector``.
"""
from __future__ import annotations

import os
from functools import reduce

import numpy as np
import pytest

from kitaev_vqe.pauli import PauliString, PauliSum

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_string(p: PauliString) -> np.ndarray:
    # qubit 0 is the lowest bit, so it is the rightmost kron factor
    letters = p.word
    return p.coeff * reduce(np.kron, [PAULI[c] for c in reversed(letters)])


def kron_matrix(op: PauliSum | PauliString) -> np.ndarray:
    if isinstance(op, PauliString):
        return kron_string(op)
    d = 1 << op.n
    out = np.zeros((d, d), dtype=complex)
    for p in op:
        out += kron_string(p)
    return out


def parity_mask(n: int) -> np.ndarray:
    return np.array([bin(i).count("1") & 1 for i in range(1 << n)], dtype=bool)


def sector_lowest(H: np.ndarray, n: int, parity: int) -> float:
    odd = parity_mask(n)
    mask = odd if parity == -1 else ~odd
    return float(np.linalg.eigvalsh(H[np.ix_(mask, mask)])[0])


def pytest_configure(config):
    if os.environ.get("KITAEV_VQE_EXTENDED") != "1":
        config.addinivalue_line("markers", "extended: skipped unless KITAEV_VQE_EXTENDED=1")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("KITAEV_VQE_EXTENDED") == "1":
        return
    skip = pytest.mark.skip(reason="extended target; set KITAEV_VQE_EXTENDED=1")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)
