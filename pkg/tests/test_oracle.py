import numpy as np
import pytest

from conftest import kron_matrix, sector_lowest
from kitaev_vqe.hamiltonians import Couplings, fixed_gauge_hamiltonian, spin_hamiltonian
from kitaev_vqe.lattice import build_lattice, standard_gauge
from kitaev_vqe.oracle import (
    OracleError,
    SpectrumRequest,
    auto_mode,
    ed_splitting,
    ground_energy_spin,
    ground_expectations,
    ground_infidelity,
    ground_space,
    lowest_eigenpairs,
    parity_sector_energies,
)
from kitaev_vqe.pauli import PauliSum

HC22 = build_lattice("honeycomb", 2, 2)
SO11 = build_lattice("square-octagon", 1, 1)


def test_request_validation():
    H = PauliSum.from_labels([(1, "XX")])
    for kw in ({"mode": "magic"}, {"k": 0}, {"k": 5}):
        with pytest.raises(ValueError):
            SpectrumRequest(H, **kw)
    with pytest.raises(ValueError):
        SpectrumRequest(PauliSum.identity(13), mode="dense")
    with pytest.raises(ValueError):
        SpectrumRequest(PauliSum.identity(21), mode="iterative")
    assert auto_mode(12) == "dense" and auto_mode(13) == "iterative"


def test_non_hermitian_rejected():
    with pytest.raises(OracleError):
        lowest_eigenpairs(SpectrumRequest(PauliSum.from_labels([(1j, "XY")])))


def test_dense_matches_numpy():
    H = spin_hamiltonian(SO11, Couplings(J=(1, 0.7, 1.3), kappa=0.2, h=(0.1, 0.2, 0.3)))
    ref = np.linalg.eigvalsh(kron_matrix(H))[:3]
    got = lowest_eigenpairs(SpectrumRequest(H, 3))
    np.testing.assert_allclose([e for e, _ in got], ref, atol=1e-10)


def test_lanczos_matches_dense():
    H = spin_hamiltonian(HC22, Couplings(J=(1, 0.9, 1.1), kappa=0.15, h=(0.05, 0.1, 0.2)))
    dense = lowest_eigenpairs(SpectrumRequest(H, 2, "dense"))
    lanc = lowest_eigenpairs(SpectrumRequest(H, 2, "iterative", seed=1))
    for (e1, v1), (e2, v2) in zip(dense, lanc):
        assert e1 == pytest.approx(e2, abs=1e-9)
        assert abs(np.vdot(v1, v2)) == pytest.approx(1.0, abs=1e-8)


def test_ground_energy_spin_known_value():
    # kron-built 8-spin ED; on this torus the ground state has every W_p = -1, not the flux-free sector
    ref = np.linalg.eigvalsh(kron_matrix(spin_hamiltonian(HC22, Couplings())))[0]
    assert ref == pytest.approx(-4 * np.sqrt(3), abs=1e-10)
    assert ground_energy_spin(HC22, Couplings()) == pytest.approx(ref, abs=1e-10)
    assert ground_energy_spin(HC22, Couplings(), mode="iterative") == pytest.approx(ref, abs=1e-9)


def test_ground_space_degenerate():
    H = PauliSum.from_labels([(-1, "ZI")])
    E, basis = ground_space(H)
    assert E == -1 and basis.shape == (4, 2)
    # qubit 0 is the lowest bit: the ground space is spanned by |00> and |10> (indices 0, 2)
    psi = np.array([1, 0, 1j, 0]) / np.sqrt(2)
    assert ground_infidelity(psi, basis) < 1e-15
    assert ground_infidelity(np.array([0, 1, 0, 0], dtype=complex), basis) == pytest.approx(1.0)
    with pytest.raises(OracleError):
        ground_space(PauliSum.from_labels([(1, "ZZZ")]), max_degeneracy=2)


def test_ground_expectations_average():
    H = PauliSum.from_labels([(-1, "ZI")])
    E, vals = ground_expectations(H, {"z0": PauliSum.from_labels([(1, "ZI")]), "z1": PauliSum.from_labels([(1, "IZ")])})
    assert E == -1 and vals["z0"] == pytest.approx(1.0) and abs(vals["z1"]) < 1e-12


def test_parity_sectors_match_blocks():
    c = Couplings(J=(1, 0.8, 1.2), kappa=0.3, kappa_int=0.2)
    H = fixed_gauge_hamiltonian(HC22, standard_gauge(HC22), c)
    M = kron_matrix(H)
    even, odd = parity_sector_energies(H)
    assert even == pytest.approx(sector_lowest(M, 4, 1), abs=1e-10)
    assert odd == pytest.approx(sector_lowest(M, 4, -1), abs=1e-10)
    assert ed_splitting(H) == pytest.approx(abs(even - odd))
    with pytest.raises(OracleError):
        parity_sector_energies(PauliSum.from_labels([(1, "XI")]))
