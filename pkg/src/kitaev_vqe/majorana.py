"""Spin words rewritten as Majorana monomials of the four-Majorana representation.

Each site ``s`` carries ``b^x_s, b^y_s, b^z_s, c_s`` with ``sigma^a_s = i b^a_s c_s``
and the constraint ``D_s = b^x_s b^y_s b^z_s c_s = 1`` on physical states.

Majoranas get integer ids: ``c_s -> s`` for the N matter Majoranas, and the
two bond Majoranas of edge ``nu`` (oriented ``a -> b``) get ``N + 2 nu`` (the
``a`` end) and ``N + 2 nu + 1`` (the ``b`` end).  The link operator of the edge
is ``u_nu = i b_a b_b``.

A spin word is *gauge diagonal* when multiplying it by a set of ``D_s`` pairs up
every bond Majorana with its edge partner; the word then reduces to
``coeff * prod(u_nu) * c_{m1} c_{m2} ...``.  Whether such a set exists is a
parity condition on each edge, solved by propagation over the lattice graph.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .lattice import EDGE_TYPES, Lattice
from .pauli import PauliString


@dataclass(frozen=True)
class MajoranaTerm:
    coeff: complex
    links: tuple[int, ...]
    matter: tuple[int, ...]


def bond_id(lattice: Lattice, site: int, axis: int) -> int:
    edge = lattice.incident(site, EDGE_TYPES[axis])
    end = 0 if lattice.edges[edge].a == site else 1
    return lattice.n_sites + 2 * edge + end


def normal_order(ids: list[int]) -> tuple[int, tuple[int, ...]]:
    """Sort a Majorana product, returning ``(sign, ids)`` with squares removed."""
    arr = list(ids)
    sign = 1
    # insertion sort; every adjacent swap of distinct Majoranas flips the sign
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j - 1] > arr[j]:
            arr[j - 1], arr[j] = arr[j], arr[j - 1]
            sign = -sign
            j -= 1
    out: list[int] = []
    for m in arr:
        if out and out[-1] == m:
            out.pop()
        else:
            out.append(m)
    return sign, tuple(out)


def _site_letters(word: PauliString) -> dict[int, int]:
    letters = {}
    for q in range(word.n):
        bx, bz = (word.x >> q) & 1, (word.z >> q) & 1
        if bx or bz:
            letters[q] = {(1, 0): 0, (1, 1): 1, (0, 1): 2}[(bx, bz)]
    return letters


def _constraint_choice(lattice: Lattice, letters: dict[int, int]) -> list[int] | None:
    """Sites that must carry a ``D_s`` factor, or ``None`` if the word is not gauge diagonal."""
    n = lattice.n_sites
    occupied = [[0, 0, 0] for _ in range(n)]
    for s, a in letters.items():
        occupied[s][a] = 1
    d = [-1] * n
    for root in range(n):
        if d[root] != -1:
            continue
        d[root] = 0
        queue = deque([root])
        component = [root]
        while queue:
            s = queue.popleft()
            for axis, t in enumerate(EDGE_TYPES):
                r = lattice.neighbor(s, t)
                want = d[s] ^ occupied[s][axis] ^ occupied[r][axis]
                if d[r] == -1:
                    d[r] = want
                    component.append(r)
                    queue.append(r)
                elif d[r] != want:
                    return None
        # the complement of a solution also solves the component; keep the smaller set
        ones = [s for s in component if d[s]]
        if 2 * len(ones) > len(component):
            for s in component:
                d[s] ^= 1
    return [s for s in range(n) if d[s] == 1]


def _pairs_up(lattice: Lattice, letters: dict[int, int], dsites) -> bool:
    occ = {}
    for s, a in letters.items():
        occ[(s, a)] = 1
    for s in dsites:
        for a in range(3):
            occ[(s, a)] = occ.get((s, a), 0) ^ 1
    for e in lattice.edges:
        a = EDGE_TYPES.index(e.kind)
        if occ.get((e.a, a), 0) != occ.get((e.b, a), 0):
            return False
    return True


def spin_word_ids(lattice: Lattice, word: PauliString, gauge_diagonal: bool = True, dsites=None):
    """Majorana ids and coefficient of ``word`` (``coeff`` included).

    With ``gauge_diagonal`` the word is first multiplied by the ``D_s`` factors
    that pair its bond Majoranas: ``dsites`` if given, else the smallest such
    set.  If no set exists (or the flag is off) the direct substitution
    ``sigma^a = i b^a c`` is used.  The third return value reports whether the
    ids are link-paired.
    """
    letters = _site_letters(word)
    coeff = complex(word.coeff)
    ids: list[int] = []
    for s, a in sorted(letters.items()):
        coeff *= 1j
        ids += [bond_id(lattice, s, a), s]
    if not gauge_diagonal:
        dsites = None
    elif dsites is not None:
        dsites = sorted(dsites) if _pairs_up(lattice, letters, dsites) else None
    else:
        dsites = _constraint_choice(lattice, letters)
    for s in dsites or ():
        ids += [bond_id(lattice, s, 0), bond_id(lattice, s, 1), bond_id(lattice, s, 2), s]
    return coeff, ids, dsites is not None


def reduce_spin_word(lattice: Lattice, word: PauliString, dsites=None) -> MajoranaTerm | None:
    """Gauge-diagonal form ``coeff * prod u_nu * c...`` of a spin word, or ``None``."""
    coeff, ids, ok = spin_word_ids(lattice, word, gauge_diagonal=True, dsites=dsites)
    if not ok:
        return None
    sign, ordered = normal_order(ids)
    n = lattice.n_sites
    matter = tuple(m for m in ordered if m < n)
    bonds = [m for m in ordered if m >= n]
    links = []
    for k in range(0, len(bonds), 2):
        first, second = bonds[k], bonds[k + 1]
        assert (first - n) % 2 == 0 and second == first + 1, "unpaired bond Majorana"
        links.append((first - n) // 2)
    # b_a b_b = -i u_ab for every link
    return MajoranaTerm(coeff * sign * (-1j) ** len(links), tuple(links), matter)
