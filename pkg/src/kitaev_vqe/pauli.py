"""Pauli strings and sums in packed symplectic form, plus Jordan-Wigner Majoranas.

A word on ``n`` qubits is a pair of integer bitmasks ``(x, z)``; qubit ``q`` holds
``I`` (0, 0), ``X`` (1, 0), ``Z`` (0, 1) or ``Y`` (1, 1).  The operator is
``coeff * prod_q sigma_q`` with ``Y = i X Z`` on each qubit.  Text rendering puts
qubit 0 first: ``XIZY`` is X on qubit 0 and Y on qubit 3.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

TOL = 1e-12

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTERS.items()}
_IPOW = (1, 1j, -1, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


def _product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Power of ``i`` picked up by ``sigma(x1,z1) * sigma(x2,z2)``."""
    x3, z3 = x1 ^ x2, z1 ^ z2
    return (_popcount(x1 & z1) + _popcount(x2 & z2) + 2 * _popcount(z1 & x2) - _popcount(x3 & z3)) % 4


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int
    z: int
    coeff: complex = 1.0

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliString":
        x = z = 0
        for q, ch in enumerate(label):
            try:
                bx, bz = _BITS[ch]
            except KeyError:
                raise ValueError(f"bad Pauli letter {ch!r} in {label!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(len(label), x, z, complex(coeff))

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "PauliString":
        return cls(n, 0, 0, complex(coeff))

    @classmethod
    def single(cls, n: int, q: int, letter: str, coeff: complex = 1.0) -> "PauliString":
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
        bx, bz = _BITS[letter]
        return cls(n, bx << q, bz << q, complex(coeff))

    @property
    def word(self) -> str:
        return "".join(_LETTERS[((self.x >> q) & 1, (self.z >> q) & 1)] for q in range(self.n))

    @property
    def key(self) -> tuple[int, int]:
        return (self.x, self.z)

    @property
    def support(self) -> int:
        return self.x | self.z

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def scaled(self, c: complex) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.coeff * c)

    def commutes_with(self, other: "PauliString") -> bool:
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def adjoint(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.coeff.conjugate())

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return multiply(self, other)
        if isinstance(other, (int, float, complex)):
            return self.scaled(other)
        return NotImplemented

    __rmul__ = scaled

    def __neg__(self):
        return self.scaled(-1)

    def __str__(self) -> str:
        return f"{_fmt_coeff(self.coeff)} {self.word}"


def multiply(a: PauliString, b: PauliString) -> PauliString:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")
    ph = _IPOW[_product_phase(a.x, a.z, b.x, b.z)]
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, a.coeff * b.coeff * ph)


def _fmt_coeff(c: complex) -> str:
    re = 0.0 if c.real == 0 else c.real
    im = 0.0 if c.imag == 0 else c.imag
    return f"({re:+.17g}{im:+.17g}i)"


class PauliSum:
    """Linear combination of Pauli words on a common number of qubits.

    Instances are treated as immutable; arithmetic returns new sums and keeps
    terms merged by word, dropping coefficients below ``TOL``.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[tuple[int, int], complex] | Iterable[PauliString] = ()):
        self.n = n
        merged: dict[tuple[int, int], complex] = {}
        if isinstance(terms, Mapping):
            merged = dict(terms)
        else:
            for t in terms:
                if t.n != n:
                    raise ValueError(f"qubit count mismatch: {t.n} vs {n}")
                merged[t.key] = merged.get(t.key, 0) + t.coeff
        self._terms = {k: complex(v) for k, v in merged.items() if abs(v) > TOL}

    @classmethod
    def from_labels(cls, pairs: Iterable[tuple[complex, str]]) -> "PauliSum":
        strings = [PauliString.from_label(lbl, c) for c, lbl in pairs]
        if not strings:
            raise ValueError("need at least one term to infer the qubit count")
        return cls(strings[0].n, strings)

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n, {(0, 0): coeff})

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[PauliString]:
        for (x, z), c in sorted(self._terms.items(), key=lambda kv: _word_order(kv[0], self.n)):
            yield PauliString(self.n, x, z, c)

    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    def coeff(self, label: str) -> complex:
        p = PauliString.from_label(label)
        return self._terms.get(p.key, 0j)

    def __add__(self, other):
        other = _as_sum(other, self.n)
        if other.n != self.n:
            raise ValueError(f"qubit count mismatch: {self.n} vs {other.n}")
        merged = dict(self._terms)
        for k, v in other._terms.items():
            merged[k] = merged.get(k, 0) + v
        return PauliSum(self.n, merged)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * _as_sum(other, self.n)

    def __rsub__(self, other):
        return _as_sum(other, self.n) - self

    def __neg__(self):
        return self * -1

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return PauliSum(self.n, {k: v * other for k, v in self._terms.items()})
        other = _as_sum(other, self.n)
        if other.n != self.n:
            raise ValueError(f"qubit count mismatch: {self.n} vs {other.n}")
        out: dict[tuple[int, int], complex] = {}
        for (x1, z1), c1 in self._terms.items():
            for (x2, z2), c2 in other._terms.items():
                key = (x1 ^ x2, z1 ^ z2)
                out[key] = out.get(key, 0) + c1 * c2 * _IPOW[_product_phase(x1, z1, x2, z2)]
        return PauliSum(self.n, out)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return _as_sum(other, self.n) * self

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n, {k: v.conjugate() for k, v in self._terms.items()})

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def is_zero(self) -> bool:
        return not self._terms

    def real(self) -> "PauliSum":
        """Drop imaginary coefficient parts (float dust on Hermitian sums)."""
        return PauliSum(self.n, {k: v.real for k, v in self._terms.items()})

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n == other.n and (self - other).is_zero()

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"PauliSum(n={self.n}, terms={len(self)})"


def _word_order(key: tuple[int, int], n: int) -> str:
    x, z = key
    return "".join(_LETTERS[((x >> q) & 1, (z >> q) & 1)] for q in range(n))


def _as_sum(obj, n: int) -> PauliSum:
    if isinstance(obj, PauliSum):
        return obj
    if isinstance(obj, PauliString):
        return PauliSum(obj.n, [obj])
    if isinstance(obj, (int, float, complex)):
        return PauliSum.identity(n, obj)
    raise TypeError(f"cannot combine PauliSum with {type(obj).__name__}")


def simplify(s: PauliSum | Iterable[PauliString], n: int | None = None) -> PauliSum:
    """Merge equal words, drop negligible terms; iteration order is lexicographic by word."""
    if isinstance(s, PauliSum):
        return PauliSum(s.n, s.terms)
    strings = list(s)
    if n is None:
        if not strings:
            raise ValueError("empty input needs an explicit qubit count")
        n = strings[0].n
    return PauliSum(n, strings)


def commutator(a, b) -> PauliSum:
    a, b = _as_sum(a, getattr(b, "n", 0)), _as_sum(b, getattr(a, "n", 0))
    return a * b - b * a


def anticommutator(a, b) -> PauliSum:
    a, b = _as_sum(a, getattr(b, "n", 0)), _as_sum(b, getattr(a, "n", 0))
    return a * b + b * a


def commutes(a, b) -> bool:
    return commutator(a, b).is_zero()


def render(s: PauliSum) -> str:
    return "\n".join(str(t) for t in s)


def parse(text: str) -> PauliSum:
    """Inverse of :func:`render`."""
    strings = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        coeff, word = line.rsplit(" ", 1)
        strings.append(PauliString.from_label(word, complex(coeff.replace("i", "j"))))
    if not strings:
        raise ValueError("no terms to parse")
    return PauliSum(strings[0].n, strings)


# ---------------------------------------------------------------------------
# Jordan-Wigner images


def _jw(q: int, letter: str, n_qubits: int) -> PauliString:
    if not 0 <= q < n_qubits:
        raise IndexError(f"mode {q} out of range for {n_qubits} qubits")
    bx, bz = _BITS[letter]
    string = (1 << q) - 1
    return PauliString(n_qubits, bx << q, (bz << q) | string)


def jw_majorana(m: int, n_qubits: int) -> PauliString:
    """Majorana ``m``: X (even) or Y (odd) on qubit ``m // 2`` behind a Z string."""
    return _jw(m // 2, "X" if m % 2 == 0 else "Y", n_qubits)


def jw_matter(n: int, parity: int, n_qubits: int, n_matter: int | None = None) -> PauliString:
    """Matter Majorana ``c_{2n + parity}``."""
    if parity not in (0, 1):
        raise ValueError("parity must be 0 or 1")
    if n_matter is not None and not 0 <= n < n_matter:
        raise IndexError(f"matter mode {n} out of range ({n_matter} modes)")
    return jw_majorana(2 * n + parity, n_qubits)


def jw_bond(nu: int, which: int, n_spins: int, n_qubits: int) -> PauliString:
    """Bond Majorana ``b^1_nu`` (X) or ``b^2_nu`` (Y) on gauge qubit ``nu + N/2``."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    n_edges = 3 * n_spins // 2
    if not 0 <= nu < n_edges:
        raise IndexError(f"edge {nu} out of range ({n_edges} edges)")
    return _jw(nu + n_spins // 2, "X" if which == 1 else "Y", n_qubits)


def z_parity(n_qubits: int, qubits: Iterable[int] | None = None) -> PauliString:
    mask = 0
    for q in range(n_qubits) if qubits is None else qubits:
        mask |= 1 << q
    return PauliString(n_qubits, 0, mask)
