import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kron_matrix
from kitaev_vqe.hamiltonians import (
    Couplings,
    HamiltonianError,
    constraint_operator,
    constraint_sign,
    dynamical_gauge_hamiltonian,
    fixed_gauge_hamiltonian,
    link_operator,
    majorana_image,
    observables,
    physical_matter_parity,
    plaquette_operator,
    projector,
    spin_hamiltonian,
    spin_observables,
    to_dynamical,
    triples,
)
from kitaev_vqe.lattice import EDGE_TYPES, build_lattice, standard_gauge
from kitaev_vqe.majorana import normal_order, reduce_spin_word
from kitaev_vqe.pauli import PauliString, PauliSum, commutes
from kitaev_vqe.statevector import expectation, zero_state

GENERIC = Couplings(J=(1.0, 0.8, 1.3), kappa=0.3, kappa_int=0.2)
SMALL = [("honeycomb", 2, 2), ("square-octagon", 1, 1), ("square-octagon", 2, 1)]
ALL = SMALL + [("honeycomb", 3, 3), ("square-octagon", 2, 2), ("honeycomb", 2, 3)]


def gauge_classes(lat):
    """One gauge per class: free signs on the edges outside a spanning tree."""
    parent = list(range(lat.n_sites))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    free = []
    for k, e in enumerate(lat.edges):
        ra, rb = find(e.a), find(e.b)
        if ra == rb:
            free.append(k)
        else:
            parent[ra] = rb
    for bits in itertools.product((0, 1), repeat=len(free)):
        yield standard_gauge(lat).flip([k for k, b in zip(free, bits) if b])


def test_couplings_validated():
    with pytest.raises(HamiltonianError):
        Couplings(J=(1.0, float("nan"), 1.0))
    with pytest.raises(HamiltonianError):
        Couplings(h=(0.0, 1.0))
    assert Couplings(h=(0, 0, 0.1)).has_field and not Couplings().has_field


def test_bond_terms():
    lat = build_lattice("square-octagon", 1, 1)
    H = spin_hamiltonian(lat, Couplings(J=(1, 2, 3)))
    assert len(H) == lat.n_edges
    for e in lat.edges:
        w = ["I"] * lat.n_sites
        w[e.a] = w[e.b] = e.kind.upper()
        assert H.coeff("".join(w)) == -(1, 2, 3)["xyz".index(e.kind)]


@pytest.mark.parametrize("shape", ALL)
def test_triples_are_neighbour_triples(shape):
    lat = build_lattice(*shape)
    ts = triples(lat)
    assert len(ts) == lat.n_sites
    for t in ts:
        assert (t.i, t.j, t.k) == tuple(lat.neighbor(t.l, a) for a in EDGE_TYPES)
        assert t.n in (1, -1)


@pytest.mark.parametrize("shape", ALL)
def test_plaquette_is_outer_leg_product(shape):
    lat = build_lattice(*shape)
    for p, plaq in enumerate(lat.plaquettes):
        W = plaquette_operator(lat, p)
        (term,) = list(W)
        assert term.coeff == 1
        if len(set(plaq.sites)) < len(plaq.sites):
            # wraps onto itself on the smallest tori; no per-site outer leg
            continue
        for k, s in enumerate(plaq.sites):
            inner = {lat.edges[plaq.edges[k]].kind, lat.edges[plaq.edges[k - 1]].kind}
            (outer,) = set("xyz") - inner
            assert term.word[s] == outer.upper()


@pytest.mark.parametrize("shape", ALL)
def test_plaquettes_conserved_with_interactions(shape):
    lat = build_lattice(*shape)
    H = spin_hamiltonian(lat, GENERIC)
    Ws = [plaquette_operator(lat, p) for p in range(len(lat.plaquettes))]
    for W in Ws:
        assert commutes(W, H)
        assert W * W == PauliSum.identity(lat.n_sites)
    for A, B in itertools.combinations(Ws, 2):
        assert commutes(A, B)


@pytest.mark.parametrize("shape", SMALL)
def test_majorana_images_anticommute(shape):
    lat = build_lattice(*shape)
    nq = 2 * lat.n_sites
    ms = [majorana_image(lat, m, nq) for m in range(lat.n_sites + 2 * lat.n_edges)]
    for a, ga in enumerate(ms):
        assert (ga * ga).is_identity() and (ga * ga).coeff == 1
        for gb in ms[a + 1:]:
            assert not ga.commutes_with(gb)


def test_link_operator_is_plus_z_on_vacuum():
    lat = build_lattice("square-octagon", 1, 1)
    N = lat.n_sites
    for nu, e in enumerate(lat.edges):
        u = link_operator(lat, nu)
        assert u.word == "I" * (N // 2 + nu) + "Z" + "I" * (3 * N // 2 - nu - 1)
        a, b = lat.n_sites + 2 * nu, lat.n_sites + 2 * nu + 1
        assert (majorana_image(lat, a, 2 * N) * majorana_image(lat, b, 2 * N)).scaled(1j) == u
        assert expectation(PauliSum(2 * N, [u]), zero_state(2 * N)) == 1.0


def test_projector_symbolic():
    lat = build_lattice("square-octagon", 1, 1)
    H = dynamical_gauge_hamiltonian(lat, Couplings(J=(1, 1, 1.5), kappa=0.2, kappa_int=0.1, h=(0.1, 0.2, 0.3)))
    P = projector(lat)
    assert P * P == P
    assert P.is_hermitian()
    assert commutes(P, H)
    for s in range(lat.n_sites):
        D = PauliSum(2 * lat.n_sites, [constraint_operator(lat, s)])
        assert D * D == PauliSum.identity(2 * lat.n_sites)
        assert commutes(D, H)


def test_dynamical_spectrum_matches_spin_spectrum():
    lat = build_lattice("square-octagon", 1, 1)
    c = Couplings(J=(1, 0.7, 1.4), kappa=0.3, kappa_int=0.15, h=(0.2, -0.1, 0.4))
    spin = np.linalg.eigvalsh(kron_matrix(spin_hamiltonian(lat, c)))
    P = kron_matrix(projector(lat))
    w, v = np.linalg.eigh(P)
    basis = v[:, w > 0.5]
    assert basis.shape[1] == 1 << lat.n_sites
    Hd = kron_matrix(dynamical_gauge_hamiltonian(lat, c))
    phys = np.linalg.eigvalsh(basis.conj().T @ Hd @ basis)
    np.testing.assert_allclose(phys, spin, atol=1e-10)


@pytest.mark.parametrize("shape", [("square-octagon", 1, 1), ("honeycomb", 2, 2)])
def test_fixed_gauge_sectors_rebuild_spin_spectrum(shape):
    # physical-parity spectra over all gauge classes make up the whole spin spectrum
    lat = build_lattice(*shape)
    c = Couplings(J=(1, 0.9, 1.2), kappa=0.25, kappa_int=0.15)
    n = lat.n_sites // 2
    odd = np.array([bin(i).count("1") & 1 for i in range(1 << n)], dtype=bool)
    pieces = []
    for g in gauge_classes(lat):
        H = kron_matrix(fixed_gauge_hamiltonian(lat, g, c))
        mask = odd if physical_matter_parity(lat, g) == -1 else ~odd
        pieces.append(np.linalg.eigvalsh(H[np.ix_(mask, mask)]))
    spin = np.linalg.eigvalsh(kron_matrix(spin_hamiltonian(lat, c)))
    np.testing.assert_allclose(np.sort(np.concatenate(pieces)), spin, atol=1e-10)


def test_fixed_gauge_requires_zero_field():
    lat = build_lattice("square-octagon", 1, 1)
    with pytest.raises(HamiltonianError):
        fixed_gauge_hamiltonian(lat, standard_gauge(lat), Couplings(h=(0, 0, 0.1)))


def test_dynamical_cap():
    with pytest.raises(HamiltonianError):
        dynamical_gauge_hamiltonian(build_lattice("square-octagon", 2, 2), Couplings())
    with pytest.raises(HamiltonianError):
        projector(build_lattice("square-octagon", 2, 2))


@pytest.mark.parametrize(
    "shape,sign",
    [
        (("honeycomb", 2, 2), 1),
        (("square-octagon", 2, 2), 1),
        (("honeycomb", 3, 3), -1),
        (("honeycomb", 2, 3), -1),
        (("square-octagon", 1, 1), -1),
        (("square-octagon", 2, 1), -1),
    ],
)
def test_constraint_sign(shape, sign):
    # frozen from the symbolic product of all D_s
    lat = build_lattice(*shape)
    assert constraint_sign(lat) == sign
    g = standard_gauge(lat).flip([0])
    assert physical_matter_parity(lat, g) == -sign


def test_vacuum_parity_vs_constraint():
    lat = build_lattice("square-octagon", 1, 1)
    P = projector(lat)
    # s = -1 here, so the all-zero state has no physical weight
    assert abs(expectation(P, zero_state(2 * lat.n_sites))) < 1e-15


def test_observables_in_both_layouts():
    lat = build_lattice("square-octagon", 1, 1)
    spin = spin_observables(lat)
    dyn = observables(lat)
    assert spin.m_z.is_hermitian() and dyn.m_z.is_hermitian()
    assert len(dyn.plaquettes) == len(lat.plaquettes)
    P = projector(lat)
    for W in dyn.plaquettes:
        assert commutes(W, P)
        assert len(W) == 1 and set(list(W)[0].word) <= {"I", "Z"}


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 5), max_size=8))
def test_normal_order_matches_operators(ids):
    n = 3
    from kitaev_vqe.pauli import jw_majorana

    lhs = PauliString.identity(n)
    for m in ids:
        lhs = lhs * jw_majorana(m, n)
    sign, ordered = normal_order(ids)
    rhs = PauliString.identity(n, sign)
    for m in ordered:
        rhs = rhs * jw_majorana(m, n)
    assert list(ordered) == sorted(set(ordered))
    assert lhs.key == rhs.key and lhs.coeff == rhs.coeff


def test_single_spin_not_gauge_diagonal():
    lat = build_lattice("honeycomb", 2, 2)
    assert reduce_spin_word(lat, PauliString.single(lat.n_sites, 0, "X")) is None


def test_bond_reduces_to_link_hopping():
    lat = build_lattice("honeycomb", 2, 2)
    e = lat.edges[2]
    w = ["I"] * lat.n_sites
    w[e.a] = w[e.b] = e.kind.upper()
    term = reduce_spin_word(lat, PauliString.from_label("".join(w)))
    assert term.links == (2,) and term.matter == tuple(sorted((e.a, e.b)))
    assert abs(abs(term.coeff) - 1) < 1e-12


def test_to_dynamical_on_mixed_sum():
    lat = build_lattice("square-octagon", 1, 1)
    op = spin_hamiltonian(lat, Couplings(h=(0.3, 0, 0)))
    assert to_dynamical(lat, op).is_hermitian()
