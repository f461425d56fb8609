"""Honeycomb and square-octagon lattices with periodic boundaries and Z2 gauge fields.

Sites are ordered cell-major, basis-minor: ``index = n_basis * (i1 * L2 + i2) + tau``.
Every edge carries an orientation ``a -> b``; the standard gauge sets
``u_ab = +1`` along that arrow, so ``u_ba = -1``.

Plaquette fluxes are evaluated as ``W_p = -prod_k u(s_k, s_{k+1})`` over the
ordered cycle.  The orientations below are chosen so the standard gauge is flux
free on both lattice families.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

HONEYCOMB = "honeycomb"
SQUARE_OCTAGON = "square-octagon"
KINDS = (HONEYCOMB, SQUARE_OCTAGON)
EDGE_TYPES = ("x", "y", "z")


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Site:
    cell: tuple[int, int]
    basis: int


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    kind: str  # x | y | z

    def other(self, site: int) -> int:
        return self.b if site == self.a else self.a


@dataclass(frozen=True)
class Plaquette:
    sites: tuple[int, ...]  # ordered cycle, sites[k] -> sites[k+1] along edges[k]
    edges: tuple[int, ...]
    kind: str  # hex | square | octagon


@dataclass(frozen=True)
class Lattice:
    kind: str
    L1: int
    L2: int
    sites: tuple[Site, ...]
    edges: tuple[Edge, ...]
    plaquettes: tuple[Plaquette, ...]

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_basis(self) -> int:
        return 2 if self.kind == HONEYCOMB else 4

    def site_index(self, cell: tuple[int, int], basis: int) -> int:
        i1, i2 = cell[0] % self.L1, cell[1] % self.L2
        return self.n_basis * (i1 * self.L2 + i2) + basis

    def incident(self, site: int, kind: str) -> int:
        """Index of the unique edge of type ``kind`` touching ``site``."""
        return self._incidence[site][EDGE_TYPES.index(kind)]

    def neighbor(self, site: int, kind: str) -> int:
        return self.edges[self.incident(site, kind)].other(site)

    def edges_of_type(self, kind: str) -> list[int]:
        return [k for k, e in enumerate(self.edges) if e.kind == kind]

    @property
    def _incidence(self) -> list[list[int]]:
        cached = self.__dict__.get("_incidence_cache")
        if cached is None:
            cached = [[-1, -1, -1] for _ in self.sites]
            for k, e in enumerate(self.edges):
                t = EDGE_TYPES.index(e.kind)
                cached[e.a][t] = k
                cached[e.b][t] = k
            object.__setattr__(self, "_incidence_cache", cached)
        return cached


def _walk(sites_edges: list[Edge], incidence, start: int, types: Iterable[str]):
    cycle, used = [start], []
    cur = start
    for t in types:
        k = incidence[cur][EDGE_TYPES.index(t)]
        used.append(k)
        cur = sites_edges[k].other(cur)
        cycle.append(cur)
    if cur != start:
        raise LatticeError("plaquette walk did not close")
    return tuple(cycle[:-1]), tuple(used)


def build_lattice(kind: str, L1: int, L2: int) -> Lattice:
    """Build a periodic lattice of ``L1 x L2`` unit cells.

    Honeycomb cells hold basis sites 0, 1 joined by the z bond, with the x and y
    bonds reaching the neighbouring cells at ``-a1`` and ``-a2``.  Square-octagon
    cells hold a square 0-1-2-3 (y, x, y, x bonds) and z bonds ``3 -> 0`` of the
    cell at ``+a2`` and ``2 -> 1`` of the cell at ``+a1``.
    """
    if kind not in KINDS:
        raise LatticeError(f"unknown lattice kind {kind!r}")
    if int(L1) != L1 or int(L2) != L2 or L1 < 1 or L2 < 1:
        raise LatticeError(f"lattice dimensions must be positive integers, got {L1}x{L2}")
    L1, L2 = int(L1), int(L2)
    nb = 2 if kind == HONEYCOMB else 4

    def idx(i1, i2, tau):
        return nb * ((i1 % L1) * L2 + (i2 % L2)) + tau

    sites = tuple(Site((i1, i2), tau) for i1 in range(L1) for i2 in range(L2) for tau in range(nb))
    edges: list[Edge] = []
    for i1 in range(L1):
        for i2 in range(L2):
            if kind == HONEYCOMB:
                a = idx(i1, i2, 0)
                edges.append(Edge(a, idx(i1 - 1, i2, 1), "x"))
                edges.append(Edge(a, idx(i1, i2 - 1, 1), "y"))
                edges.append(Edge(a, idx(i1, i2, 1), "z"))
            else:
                s = [idx(i1, i2, t) for t in range(4)]
                edges.append(Edge(s[0], s[1], "y"))
                edges.append(Edge(s[1], s[2], "x"))
                edges.append(Edge(s[2], s[3], "y"))
                edges.append(Edge(s[0], s[3], "x"))
                edges.append(Edge(s[3], idx(i1 + 1, i2, 1), "z"))
                edges.append(Edge(s[2], idx(i1, i2 + 1, 0), "z"))

    incidence = [[-1, -1, -1] for _ in sites]
    for k, e in enumerate(edges):
        t = EDGE_TYPES.index(e.kind)
        for v in (e.a, e.b):
            if incidence[v][t] != -1:
                raise LatticeError(f"site {v} has two {e.kind}-edges")
            incidence[v][t] = k

    plaquettes: list[Plaquette] = []
    for i1 in range(L1):
        for i2 in range(L2):
            if kind == HONEYCOMB:
                cyc, used = _walk(edges, incidence, idx(i1, i2, 0), "zxyzxy")
                plaquettes.append(Plaquette(cyc, used, "hex"))
            else:
                cyc, used = _walk(edges, incidence, idx(i1, i2, 0), "yxyx")
                plaquettes.append(Plaquette(cyc, used, "square"))
                cyc, used = _walk(edges, incidence, idx(i1, i2, 2), "zxzyzxzy")
                plaquettes.append(Plaquette(cyc, used, "octagon"))

    if kind == HONEYCOMB:
        for p in plaquettes:
            if len(set(p.edges)) != len(p.edges):
                raise LatticeError(
                    f"honeycomb {L1}x{L2}: hexagons revisit edges under periodic wrapping; "
                    "use L1, L2 >= 2"
                )
    return Lattice(kind, L1, L2, sites, tuple(edges), tuple(plaquettes))


# ---------------------------------------------------------------------------
# gauge configurations


@dataclass(frozen=True)
class GaugeConfig:
    """Link variables ``u`` stored on each edge's own orientation ``a -> b``."""

    u: tuple[int, ...]

    def __post_init__(self):
        if any(v not in (1, -1) for v in self.u):
            raise LatticeError("gauge values must be +1 or -1")

    def u_ij(self, lattice: Lattice, edge: int, i: int, j: int) -> int:
        """Eigenvalue of ``i b_i b_j`` for the edge joining ``i`` and ``j``."""
        e = lattice.edges[edge]
        if (e.a, e.b) == (i, j):
            return self.u[edge]
        if (e.b, e.a) == (i, j):
            return -self.u[edge]
        raise LatticeError(f"edge {edge} does not join {i} and {j}")

    def flip(self, edges: Iterable[int]) -> "GaugeConfig":
        u = list(self.u)
        for k in edges:
            u[k] = -u[k]
        return GaugeConfig(tuple(u))


def standard_gauge(lattice: Lattice) -> GaugeConfig:
    return GaugeConfig((1,) * lattice.n_edges)


def gauge_transform(lattice: Lattice, gauge: GaugeConfig, site: int) -> GaugeConfig:
    """Action of the local constraint operator at ``site``: flip its three links."""
    return gauge.flip(lattice.incident(site, t) for t in EDGE_TYPES)


def plaquette_flux(lattice: Lattice, gauge: GaugeConfig, p: int) -> int:
    if not 0 <= p < len(lattice.plaquettes):
        raise LatticeError(f"plaquette index {p} out of range")
    plaq = lattice.plaquettes[p]
    n = len(plaq.sites)
    prod = -1
    for k in range(n):
        prod *= gauge.u_ij(lattice, plaq.edges[k], plaq.sites[k], plaq.sites[(k + 1) % n])
    return prod


def fluxes(lattice: Lattice, gauge: GaugeConfig) -> list[int]:
    return [plaquette_flux(lattice, gauge, p) for p in range(len(lattice.plaquettes))]


def _dual_adjacency(lattice: Lattice) -> list[list[tuple[int, int]]]:
    owners: dict[int, list[int]] = {}
    for p, plaq in enumerate(lattice.plaquettes):
        for k in plaq.edges:
            owners.setdefault(k, []).append(p)
    adj: list[list[tuple[int, int]]] = [[] for _ in lattice.plaquettes]
    for k, ps in sorted(owners.items()):
        # an edge bounding two distinct plaquettes once each is a dual link
        if len(ps) == 2 and ps[0] != ps[1]:
            adj[ps[0]].append((ps[1], k))
            adj[ps[1]].append((ps[0], k))
    for row in adj:
        row.sort()
    return adj


def dual_path(lattice: Lattice, p_a: int, p_b: int) -> list[int]:
    """Edges crossed by the shortest dual path from ``p_a`` to ``p_b``.

    Breadth-first search visiting neighbours in (plaquette, edge) order, so ties
    resolve lexicographically.
    """
    adj = _dual_adjacency(lattice)
    prev: dict[int, tuple[int, int]] = {p_a: (-1, -1)}
    queue = deque([p_a])
    while queue:
        p = queue.popleft()
        if p == p_b:
            break
        for q, k in adj[p]:
            if q not in prev:
                prev[q] = (p, k)
                queue.append(q)
    if p_b not in prev:
        raise LatticeError(f"no dual path between plaquettes {p_a} and {p_b}")
    path = []
    p = p_b
    while p != p_a:
        p, k = prev[p]
        path.append(k)
    return path[::-1]


def insert_vortex_pair(lattice: Lattice, gauge: GaugeConfig, p_a: int, p_b: int) -> GaugeConfig:
    """Flip the links along a dual path so that fluxes on ``p_a`` and ``p_b`` change sign."""
    n = len(lattice.plaquettes)
    if not (0 <= p_a < n and 0 <= p_b < n):
        raise LatticeError("plaquette index out of range")
    if p_a == p_b:
        raise LatticeError("vortex pair needs two distinct plaquettes")
    return gauge.flip(dual_path(lattice, p_a, p_b))


def winding_edges(lattice: Lattice, direction: int) -> list[int]:
    """Edges crossing the periodic seam along ``a1`` (direction 0) or ``a2`` (direction 1).

    Together they form a non-contractible dual loop, so flipping them keeps every
    flux and moves the gauge to another winding sector.
    """
    if direction not in (0, 1):
        raise LatticeError("direction must be 0 or 1")
    out = []
    for k, e in enumerate(lattice.edges):
        site = lattice.sites[e.a]
        if lattice.kind == HONEYCOMB:
            hit = e.kind == "xy"[direction] and site.cell[direction] == 0
        else:
            last = (lattice.L1, lattice.L2)[direction] - 1
            hit = e.kind == "z" and site.basis == (3, 2)[direction] and site.cell[direction] == last
        if hit:
            out.append(k)
    return out


def flip_winding(lattice: Lattice, gauge: GaugeConfig, direction: int) -> GaugeConfig:
    return gauge.flip(winding_edges(lattice, direction))


def adjacent_plaquettes(lattice: Lattice, p: int) -> list[int]:
    return sorted({q for q, _ in _dual_adjacency(lattice)[p]})


# ---------------------------------------------------------------------------
# plain-text serialization, one tab-separated record per line

_HEADER = "# kitaev-lattice v1"


def dumps(lattice: Lattice, gauge: GaugeConfig | None = None) -> str:
    lines = [_HEADER, f"lattice\t{lattice.kind}\t{lattice.L1}\t{lattice.L2}"]
    for k, s in enumerate(lattice.sites):
        lines.append(f"site\t{k}\t{s.cell[0]}\t{s.cell[1]}\t{s.basis}")
    for k, e in enumerate(lattice.edges):
        u = gauge.u[k] if gauge is not None else 1
        lines.append(f"edge\t{k}\t{e.a}\t{e.b}\t{e.kind}\t{u:+d}")
    for k, p in enumerate(lattice.plaquettes):
        lines.append(
            f"plaquette\t{k}\t{p.kind}\t{','.join(map(str, p.sites))}\t{','.join(map(str, p.edges))}"
        )
    return "\n".join(lines) + "\n"


def loads(text: str) -> tuple[Lattice, GaugeConfig]:
    """Parse :func:`dumps` output; the geometry is rebuilt and checked against the file."""
    lattice = None
    u: dict[int, int] = {}
    edges: dict[int, tuple[int, int, str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        rec = line.split("\t")
        try:
            if rec[0] == "lattice":
                lattice = build_lattice(rec[1], int(rec[2]), int(rec[3]))
            elif rec[0] == "edge":
                edges[int(rec[1])] = (int(rec[2]), int(rec[3]), rec[4])
                u[int(rec[1])] = int(rec[5])
        except (IndexError, ValueError) as exc:
            raise LatticeError(f"line {lineno}: malformed record {line!r}") from exc
    if lattice is None:
        raise LatticeError("missing lattice record")
    for k, e in enumerate(lattice.edges):
        if edges.get(k) != (e.a, e.b, e.kind):
            raise LatticeError(f"edge {k} does not match the {lattice.kind} geometry")
    return lattice, GaugeConfig(tuple(u[k] for k in range(lattice.n_edges)))
