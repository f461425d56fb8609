"""Operators of the Kitaev models as Pauli sums.

Three qubit layouts are used:

* spin: one qubit per site, qubit ``s`` is site ``s``;
* fixed gauge: ``N/2`` qubits, matter Majoranas ``c_{2n}, c_{2n+1}`` on qubit ``n``;
* dynamical gauge: ``2N`` qubits, the ``N/2`` matter qubits followed by one
  gauge qubit per edge (qubit ``N/2 + nu``).  The edge ``a -> b`` uses
  ``b_a = b^2_nu`` and ``b_b = b^1_nu``, so its link operator ``i b_a b_b`` is
  ``Z`` on the gauge qubit and ``|0...0>`` is the standard gauge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

from .lattice import EDGE_TYPES, GaugeConfig, Lattice
from .majorana import MajoranaTerm, normal_order, reduce_spin_word, spin_word_ids
from .pauli import PauliString, PauliSum, jw_bond, jw_majorana, z_parity

PROJECTOR_MAX_SPINS = 12


class HamiltonianError(ValueError):
    pass


@dataclass(frozen=True)
class Couplings:
    J: tuple[float, float, float] = (1.0, 1.0, 1.0)
    kappa: float = 0.0
    kappa_int: float = 0.0
    h: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        vals = [*self.J, self.kappa, self.kappa_int, *self.h]
        if len(self.J) != 3 or len(self.h) != 3 or not all(math.isfinite(v) for v in vals):
            raise HamiltonianError(f"couplings must be finite with 3-component J and h: {self}")
        object.__setattr__(self, "J", tuple(float(v) for v in self.J))
        object.__setattr__(self, "h", tuple(float(v) for v in self.h))

    @property
    def has_field(self) -> bool:
        return any(v != 0 for v in self.h)


@dataclass(frozen=True)
class Triple:
    """Neighbours ``i, j, k`` of ``l`` across its x, y and z edges."""

    i: int
    j: int
    k: int
    l: int
    n: int = field(default=1)


def _word(n: int, letters: dict[int, str], coeff: complex = 1.0) -> PauliString:
    p = PauliString.identity(n, coeff)
    for s, a in letters.items():
        p = p * PauliString.single(n, s, a)
    return p


def triples(lattice: Lattice) -> list[Triple]:
    """One triple per site, with the sign ``n`` of its four-fermion image.

    ``-x_i y_j z_k`` reduces to ``n * u_il u_jl u_kl * c_i c_j c_k c_l`` with the
    links read as ``u_sl = i b_s b_l``; that identity defines ``n``.
    """
    out = []
    N = lattice.n_sites
    for l in range(N):
        i, j, k = (lattice.neighbor(l, t) for t in EDGE_TYPES)
        term = reduce_spin_word(lattice, _word(N, {i: "X", j: "Y", k: "Z"}))
        sign, _ = normal_order([i, j, k, l])
        # express each link as u_{s l}: flip when l is the edge's tail
        for s, t in ((i, "x"), (j, "y"), (k, "z")):
            e = lattice.edges[lattice.incident(l, t)]
            if e.a == l:
                sign = -sign
        value = -term.coeff * sign
        n_ijk = int(round(value.real))
        if abs(value - n_ijk) > 1e-12 or abs(n_ijk) != 1:
            raise HamiltonianError(f"unexpected triple coefficient {value} at site {l}")
        out.append(Triple(i, j, k, l, n_ijk))
    return out


def spin_terms(lattice: Lattice, c: Couplings) -> list[PauliString]:
    N = lattice.n_sites
    terms = []
    for e in lattice.edges:
        a = EDGE_TYPES.index(e.kind)
        if c.J[a]:
            L = e.kind.upper()
            terms.append(_word(N, {e.a: L, e.b: L}, -c.J[a]))
    for t in triples(lattice):
        if c.kappa:
            terms.append(_word(N, {t.i: "X", t.j: "Y", t.l: "Z"}, -c.kappa))
            terms.append(_word(N, {t.i: "X", t.l: "Y", t.k: "Z"}, -c.kappa))
            terms.append(_word(N, {t.l: "X", t.j: "Y", t.k: "Z"}, -c.kappa))
        if c.kappa_int:
            terms.append(_word(N, {t.i: "X", t.j: "Y", t.k: "Z"}, -c.kappa_int))
    for a, ha in enumerate(c.h):
        if ha:
            terms += [PauliString.single(N, s, "XYZ"[a], -ha) for s in range(N)]
    return terms


def spin_hamiltonian(lattice: Lattice, c: Couplings) -> PauliSum:
    return PauliSum(lattice.n_sites, spin_terms(lattice, c)).real()


def plaquette_operator(lattice: Lattice, p: int) -> PauliSum:
    """Spin-language plaquette operator, normalised so that its eigenvalue in a
    gauge sector equals :func:`lattice.plaquette_flux`."""
    N = lattice.n_sites
    plaq = lattice.plaquettes[p]
    L = len(plaq.sites)
    prod = PauliString.identity(N)
    target = -1
    for k in range(L):
        s, r = plaq.sites[k], plaq.sites[(k + 1) % L]
        letter = lattice.edges[plaq.edges[k]].kind.upper()
        prod = prod * _word(N, {s: letter, r: letter}) if s != r else prod
        e = lattice.edges[plaq.edges[k]]
        target *= 1 if (e.a, e.b) == (s, r) else -1
    support = [q for q in range(N) if (prod.x | prod.z) >> q & 1]
    term = reduce_spin_word(lattice, prod, dsites=support)
    if term is None or term.matter:
        raise HamiltonianError(f"plaquette {p} does not reduce to link variables")
    scale = target / term.coeff
    if abs(abs(scale) - 1) > 1e-12 or abs(scale.imag) > 1e-12:
        raise HamiltonianError(f"plaquette {p} normalisation {scale} is not a sign")
    return PauliSum(N, [prod.scaled(scale.real)]).real()


# ---------------------------------------------------------------------------
# fermionic images


def majorana_image(lattice: Lattice, mid: int, n_qubits: int) -> PauliString:
    """Jordan-Wigner image of Majorana ``mid`` in the dynamical layout."""
    N = lattice.n_sites
    if mid < N:
        return jw_majorana(mid, n_qubits)
    nu, end = divmod(mid - N, 2)
    return jw_bond(nu, 2 if end == 0 else 1, N, n_qubits)


def _monomial(lattice: Lattice, coeff: complex, ids, n_qubits: int) -> PauliString:
    p = PauliString.identity(n_qubits, coeff)
    for m in ids:
        p = p * majorana_image(lattice, m, n_qubits)
    return p


def link_operator(lattice: Lattice, nu: int) -> PauliString:
    N = lattice.n_sites
    return PauliString.single(2 * N, N // 2 + nu, "Z")


def to_dynamical(lattice: Lattice, op: PauliSum | PauliString) -> PauliSum:
    """Map a spin operator to the ``2N``-qubit layout.

    Gauge-diagonal words use their link-paired form; other words use
    ``sigma^a = i b^a c`` site by site.  Both agree on the physical subspace.
    """
    n_q = 2 * lattice.n_sites
    words = [op] if isinstance(op, PauliString) else list(op)
    out = []
    for w in words:
        coeff, ids, _ = spin_word_ids(lattice, w, gauge_diagonal=True)
        out.append(_monomial(lattice, coeff, ids, n_q))
    return PauliSum(n_q, out)


def fixed_gauge_terms(lattice: Lattice, c: Couplings) -> list[MajoranaTerm]:
    if c.has_field:
        raise HamiltonianError("a magnetic field mixes gauge sectors; use the dynamical-gauge layout")
    out = []
    for w in spin_terms(lattice, c):
        term = reduce_spin_word(lattice, w)
        if term is None:
            raise HamiltonianError(f"term {w} is not gauge diagonal")
        out.append(term)
    return out


def fixed_gauge_hamiltonian(lattice: Lattice, gauge: GaugeConfig, c: Couplings) -> PauliSum:
    N = lattice.n_sites
    if N % 2:
        raise HamiltonianError("odd number of sites")
    nq = N // 2
    strings = []
    for t in fixed_gauge_terms(lattice, c):
        value = t.coeff
        for nu in t.links:
            value *= gauge.u[nu]
        p = PauliString.identity(nq, value)
        for m in t.matter:
            p = p * jw_majorana(m, nq)
        strings.append(p)
    H = PauliSum(nq, strings)
    if not H.is_hermitian():
        raise HamiltonianError("fixed-gauge Hamiltonian came out non-Hermitian")
    return H.real()


def dynamical_gauge_hamiltonian(lattice: Lattice, c: Couplings) -> PauliSum:
    if lattice.n_sites > PROJECTOR_MAX_SPINS:
        raise HamiltonianError(f"dynamical-gauge layout capped at {PROJECTOR_MAX_SPINS} spins")
    H = to_dynamical(lattice, spin_hamiltonian(lattice, c))
    if not H.is_hermitian():
        raise HamiltonianError("dynamical-gauge Hamiltonian came out non-Hermitian")
    return H.real()


def constraint_operator(lattice: Lattice, s: int) -> PauliString:
    """``D_s = b^x_s b^y_s b^z_s c_s`` in the dynamical layout."""
    from .majorana import bond_id

    ids = [bond_id(lattice, s, 0), bond_id(lattice, s, 1), bond_id(lattice, s, 2), s]
    return _monomial(lattice, 1.0, ids, 2 * lattice.n_sites)


def projector(lattice: Lattice) -> PauliSum:
    """Expanded ``prod_s (1 + D_s) / 2`` on ``2N`` qubits."""
    N = lattice.n_sites
    if N > PROJECTOR_MAX_SPINS:
        raise HamiltonianError(f"projector expansion capped at {PROJECTOR_MAX_SPINS} spins, got {N}")
    nq = 2 * N
    factors = [
        PauliSum(nq, [PauliString.identity(nq, 0.5), constraint_operator(lattice, s).scaled(0.5)])
        for s in range(N)
    ]
    return reduce(lambda a, b: a * b, factors).real()


def physical_matter_parity(lattice: Lattice, gauge: GaugeConfig) -> int:
    """Eigenvalue of ``prod_n Z_n`` on the matter qubits required for a physical state."""
    N = lattice.n_sites
    total = reduce(lambda a, b: a * b, (constraint_operator(lattice, s) for s in range(N)))
    full = z_parity(2 * N)
    if total.key != full.key:
        raise HamiltonianError("product of constraints is not a total parity")
    sign = total.coeff
    if abs(sign.imag) > 1e-12:
        raise HamiltonianError("product of constraints has a complex phase")
    out = int(round(sign.real))
    for u in gauge.u:
        out *= u
    return out


@dataclass
class Observables:
    m_z: PauliSum
    plaquettes: list[PauliSum]
    sigma: dict[tuple[int, str], PauliSum]

    @property
    def w(self) -> PauliSum:
        return reduce(lambda a, b: a + b, self.plaquettes) * (1.0 / len(self.plaquettes))


def spin_observables(lattice: Lattice) -> Observables:
    N = lattice.n_sites
    sigma = {(s, a): PauliSum(N, [PauliString.single(N, s, a.upper())]) for s in range(N) for a in "xyz"}
    m_z = PauliSum(N, [PauliString.single(N, s, "Z", 1.0 / N) for s in range(N)])
    W = [plaquette_operator(lattice, p) for p in range(len(lattice.plaquettes))]
    return Observables(m_z, W, sigma)


def observables(lattice: Lattice) -> Observables:
    """Magnetisation, plaquette and site-spin operators in the dynamical layout."""
    spin = spin_observables(lattice)
    return Observables(
        to_dynamical(lattice, spin.m_z).real(),
        [to_dynamical(lattice, W).real() for W in spin.plaquettes],
        {k: to_dynamical(lattice, v) for k, v in spin.sigma.items()},
    )


def constraint_sign(lattice: Lattice) -> int:
    """Sign ``s`` in ``prod_s D_s = s * Z^{(x) 2N}`` for the dynamical layout.

    A physical state has total ``Z`` parity ``s``; ``|0...0>`` is physical only
    when ``s = +1``.
    """
    return physical_matter_parity(lattice, GaugeConfig((1,) * lattice.n_edges))
