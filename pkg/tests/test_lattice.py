import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kitaev_vqe.freefermion import build_K, canonical_form
from kitaev_vqe.hamiltonians import Couplings
from kitaev_vqe.lattice import (
    EDGE_TYPES,
    GaugeConfig,
    LatticeError,
    adjacent_plaquettes,
    build_lattice,
    dual_path,
    dumps,
    flip_winding,
    fluxes,
    gauge_transform,
    insert_vortex_pair,
    loads,
    plaquette_flux,
    standard_gauge,
    winding_edges,
)

SHAPES = [
    ("honeycomb", 2, 2),
    ("honeycomb", 2, 3),
    ("honeycomb", 3, 3),
    ("square-octagon", 1, 1),
    ("square-octagon", 2, 1),
    ("square-octagon", 2, 2),
]


@pytest.mark.parametrize(
    "kind,L1,L2,sites,edges,plaqs",
    [
        ("honeycomb", 3, 3, 18, 27, 9),
        ("square-octagon", 1, 1, 4, 6, 2),
        ("square-octagon", 2, 2, 16, 24, 8),
    ],
)
def test_counts(kind, L1, L2, sites, edges, plaqs):
    lat = build_lattice(kind, L1, L2)
    assert (lat.n_sites, lat.n_edges, len(lat.plaquettes)) == (sites, edges, plaqs)


def test_square_octagon_plaquette_kinds():
    lat = build_lattice("square-octagon", 2, 2)
    kinds = [p.kind for p in lat.plaquettes]
    assert kinds.count("square") == 4 and kinds.count("octagon") == 4
    assert all(len(p.sites) == (4 if p.kind == "square" else 8) for p in lat.plaquettes)


@pytest.mark.parametrize("shape", SHAPES)
def test_trivalent_and_edge_formula(shape):
    lat = build_lattice(*shape)
    assert lat.n_edges == 3 * lat.n_sites // 2
    for s in range(lat.n_sites):
        kinds = sorted(lat.edges[lat.incident(s, t)].kind for t in EDGE_TYPES)
        assert kinds == ["x", "y", "z"]


@pytest.mark.parametrize("shape", SHAPES)
def test_plaquettes_are_closed_cycles(shape):
    lat = build_lattice(*shape)
    for p in lat.plaquettes:
        n = len(p.sites)
        for k in range(n):
            e = lat.edges[p.edges[k]]
            assert {e.a, e.b} == {p.sites[k], p.sites[(k + 1) % n]}


def test_site_order_is_cell_major():
    lat = build_lattice("square-octagon", 2, 2)
    cells = [s.cell for s in lat.sites]
    assert cells == sorted(cells)
    assert [s.basis for s in lat.sites[:4]] == [0, 1, 2, 3]


@pytest.mark.parametrize("L1,L2", [(1, 1), (2, 1), (1, 3)])
def test_small_honeycomb_rejected(L1, L2):
    with pytest.raises(LatticeError):
        build_lattice("honeycomb", L1, L2)


@pytest.mark.parametrize("bad", [(0, 2), (2, 0), (-1, 1), (1.5, 2)])
def test_bad_dimensions(bad):
    with pytest.raises(LatticeError):
        build_lattice("square-octagon", *bad)


def test_unknown_kind():
    with pytest.raises(LatticeError):
        build_lattice("kagome", 2, 2)


@pytest.mark.parametrize("shape", SHAPES)
def test_standard_gauge_is_flux_free(shape):
    lat = build_lattice(*shape)
    assert fluxes(lat, standard_gauge(lat)) == [1] * len(lat.plaquettes)


@pytest.mark.parametrize("shape", SHAPES)
def test_global_flip_keeps_fluxes(shape):
    # every plaquette has an even number of edges
    lat = build_lattice(*shape)
    g = standard_gauge(lat).flip(range(lat.n_edges))
    assert fluxes(lat, g) == [1] * len(lat.plaquettes)


def test_u_antisymmetric():
    lat = build_lattice("honeycomb", 2, 2)
    g = standard_gauge(lat)
    for k, e in enumerate(lat.edges):
        assert g.u_ij(lat, k, e.a, e.b) == -g.u_ij(lat, k, e.b, e.a)
    with pytest.raises(LatticeError):
        g.u_ij(lat, 0, lat.edges[1].a, lat.edges[1].b)


def test_one_flipped_hexagon_edge_marks_both_neighbours():
    lat = build_lattice("honeycomb", 3, 3)
    edge = lat.plaquettes[4].edges[0]
    owners = [p for p, pl in enumerate(lat.plaquettes) if edge in pl.edges]
    f = fluxes(lat, standard_gauge(lat).flip([edge]))
    assert len(owners) == 2
    assert [p for p, v in enumerate(f) if v == -1] == owners


def test_flux_index_checked():
    lat = build_lattice("honeycomb", 2, 2)
    with pytest.raises(LatticeError):
        plaquette_flux(lat, standard_gauge(lat), 4)


def test_gauge_values_checked():
    with pytest.raises(LatticeError):
        GaugeConfig((1, 0, -1))


@settings(max_examples=30, deadline=None)
@given(shape=st.sampled_from(SHAPES), data=st.data())
def test_vortex_pair_flips_exactly_two(shape, data):
    lat = build_lattice(*shape)
    n = len(lat.plaquettes)
    pa = data.draw(st.integers(0, n - 1))
    pb = data.draw(st.integers(0, n - 1).filter(lambda q: q != pa))
    g0 = standard_gauge(lat)
    g = insert_vortex_pair(lat, g0, pa, pb)
    changed = [p for p in range(n) if plaquette_flux(lat, g, p) != plaquette_flux(lat, g0, p)]
    assert changed == sorted([pa, pb])


def test_vortex_pair_errors():
    lat = build_lattice("honeycomb", 2, 2)
    with pytest.raises(LatticeError):
        insert_vortex_pair(lat, standard_gauge(lat), 1, 1)
    with pytest.raises(LatticeError):
        insert_vortex_pair(lat, standard_gauge(lat), 0, 9)


def test_adjacent_vortices_use_one_edge():
    lat = build_lattice("honeycomb", 3, 3)
    for q in adjacent_plaquettes(lat, 0):
        assert len(dual_path(lat, 0, q)) == 1


def test_vortex_energy_independent_of_path():
    # two dual paths with the same endpoints differ by a contractible loop
    lat = build_lattice("honeycomb", 3, 3)
    g0 = standard_gauge(lat)
    direct = insert_vortex_pair(lat, g0, 0, 1)
    (e,) = dual_path(lat, 0, 1)

    def ends(k):
        return {lat.edges[k].a, lat.edges[k].b}

    q = next(
        q
        for q in adjacent_plaquettes(lat, 0)
        if q != 1
        and 1 in adjacent_plaquettes(lat, q)
        and ends(e) & ends(dual_path(lat, 0, q)[0]) & ends(dual_path(lat, q, 1)[0])
    )
    detour = insert_vortex_pair(lat, insert_vortex_pair(lat, g0, 0, q), q, 1)
    assert detour != direct
    assert fluxes(lat, direct) == fluxes(lat, detour)
    c = Couplings(kappa=0.3)
    e1 = canonical_form(build_K(lat, direct, c)).eps
    e2 = canonical_form(build_K(lat, detour, c)).eps
    np.testing.assert_allclose(e1, e2, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(shape=st.sampled_from(SHAPES), sites=st.lists(st.integers(0, 10_000), max_size=6))
def test_gauge_transform_keeps_fluxes(shape, sites):
    lat = build_lattice(*shape)
    g = insert_vortex_pair(lat, standard_gauge(lat), 0, 1)
    ref = fluxes(lat, g)
    for s in sites:
        g = gauge_transform(lat, g, s % lat.n_sites)
    assert fluxes(lat, g) == ref


@pytest.mark.parametrize("shape", SHAPES)
@pytest.mark.parametrize("direction", [0, 1])
def test_winding_keeps_fluxes(shape, direction):
    lat = build_lattice(*shape)
    # one seam edge per cell row transverse to the winding direction
    assert len(winding_edges(lat, direction)) == (lat.L2, lat.L1)[direction]
    assert fluxes(lat, flip_winding(lat, standard_gauge(lat), direction)) == [1] * len(lat.plaquettes)


def test_winding_is_not_a_gauge_transform():
    # the single-particle spectrum distinguishes winding sectors on the 3x3 torus
    lat = build_lattice("honeycomb", 3, 3)
    g0 = standard_gauge(lat)
    c = Couplings(kappa=0.2)
    e0 = canonical_form(build_K(lat, g0, c)).eps
    e1 = canonical_form(build_K(lat, flip_winding(lat, g0, 0), c)).eps
    assert np.max(np.abs(e0 - e1)) > 1e-3


@pytest.mark.parametrize("shape", SHAPES)
def test_serialisation_roundtrip(shape):
    lat = build_lattice(*shape)
    g = insert_vortex_pair(lat, standard_gauge(lat), 0, 1)
    lat2, g2 = loads(dumps(lat, g))
    assert lat2 == lat and g2 == g


def test_serialisation_errors():
    lat = build_lattice("honeycomb", 2, 2)
    text = dumps(lat)
    with pytest.raises(LatticeError):
        loads("\n".join(text.splitlines()[:1]))
    broken = text.replace("edge\t0\t", "edge\t0\tx", 1)
    with pytest.raises(LatticeError):
        loads(broken)
