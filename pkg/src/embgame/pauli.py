"""Signed Pauli words in binary symplectic form, magic-square groups, GHZ stabilizers."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .qcore import I2, X, Y, Z, DenseOperator, DimensionError

DENSE_LIMIT = 14

_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTER.items()}
_MATS = {"I": I2, "X": X, "Y": Y, "Z": Z}
_SIGN = {0: "+", 1: "+i*", 2: "-", 3: "-i*"}


def _g(x1: int, z1: int, x2: int, z2: int) -> int:
    # exponent of i in sigma(x1,z1) sigma(x2,z2) = i^g sigma(x1^x2, z1^z2)
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@dataclass(frozen=True)
class PauliWord:
    """``i^phase * sigma(x_0, z_0) (x) ... (x) sigma(x_{n-1}, z_{n-1})`` with ``sigma(1,1) = Y``."""

    xbits: tuple[int, ...]
    zbits: tuple[int, ...]
    phase: int = 0

    def __post_init__(self):
        if len(self.xbits) != len(self.zbits):
            raise ValueError("xbits and zbits differ in length")
        object.__setattr__(self, "xbits", tuple(int(b) & 1 for b in self.xbits))
        object.__setattr__(self, "zbits", tuple(int(b) & 1 for b in self.zbits))
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def from_string(cls, text: str) -> "PauliWord":
        """Parse ``"-YYX"``, ``"+i*XZ"`` or lowercase square entries such as ``"xi"``."""
        s = text.replace(" ", "")
        phase = 0
        for prefix, ph in (("+i*", 1), ("-i*", 3), ("i*", 1), ("+", 0), ("-", 2)):
            if s.startswith(prefix):
                phase, s = ph, s[len(prefix):]
                break
        try:
            bits = [_BITS[ch.upper()] for ch in s]
        except KeyError:
            raise ValueError(f"cannot parse Pauli word {text!r}") from None
        return cls(tuple(b[0] for b in bits), tuple(b[1] for b in bits), phase)

    @classmethod
    def identity(cls, n: int) -> "PauliWord":
        return cls((0,) * n, (0,) * n, 0)

    @property
    def n(self) -> int:
        return len(self.xbits)

    @property
    def letters(self) -> str:
        return "".join(_LETTER[b] for b in zip(self.xbits, self.zbits))

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        if not self.is_hermitian:
            raise ValueError("non-Hermitian word has no real sign")
        return 1 if self.phase == 0 else -1

    def unsigned(self) -> "PauliWord":
        return PauliWord(self.xbits, self.zbits, 0)

    def negate(self) -> "PauliWord":
        return PauliWord(self.xbits, self.zbits, self.phase + 2)

    def __str__(self) -> str:
        return _SIGN[self.phase] + self.letters

    def __mul__(self, other: "PauliWord") -> "PauliWord":
        return mul(self, other)

    def __matmul__(self, other: "PauliWord") -> "PauliWord":
        """Tensor product (concatenation of qubits)."""
        return PauliWord(self.xbits + other.xbits, self.zbits + other.zbits,
                         self.phase + other.phase)


def mul(p: PauliWord, q: PauliWord) -> PauliWord:
    if p.n != q.n:
        raise ValueError(f"size mismatch: {p.n} vs {q.n}")
    phase = p.phase + q.phase
    for x1, z1, x2, z2 in zip(p.xbits, p.zbits, q.xbits, q.zbits):
        phase += _g(x1, z1, x2, z2)
    xs = tuple(a ^ b for a, b in zip(p.xbits, q.xbits))
    zs = tuple(a ^ b for a, b in zip(p.zbits, q.zbits))
    return PauliWord(xs, zs, phase)


def commutes(p: PauliWord, q: PauliWord) -> bool:
    if p.n != q.n:
        raise ValueError(f"size mismatch: {p.n} vs {q.n}")
    s = sum(a * d + b * c for a, b, c, d in zip(p.xbits, p.zbits, q.xbits, q.zbits))
    return s % 2 == 0


def to_matrix(word: PauliWord, dense_limit: int = DENSE_LIMIT) -> DenseOperator:
    if word.n > dense_limit:
        raise DimensionError(f"{word.n} qubits exceeds dense limit {dense_limit}")
    m = np.ones((1, 1), dtype=complex)
    for ch in word.letters:
        m = np.kron(m, _MATS[ch])
    return DenseOperator((1j) ** word.phase * m)


MAGIC_SQUARE = (
    ("xi", "ix", "xx"),
    ("iz", "zi", "zz"),
    ("xz", "zx", "yy"),
)
MS_QUESTIONS = ("r1", "r2", "r3", "c1", "c2", "c3")


def square_entries(q: str) -> tuple[PauliWord, PauliWord, PauliWord]:
    """The three unsigned entries of row/column ``q`` in left-to-right / top-to-bottom order."""
    kind, idx = q[0], int(q[1]) - 1
    if kind == "r":
        cells = MAGIC_SQUARE[idx]
    elif kind == "c":
        cells = tuple(row[idx] for row in MAGIC_SQUARE)
    else:
        raise ValueError(f"unknown magic-square question {q!r}")
    return tuple(PauliWord.from_string(c) for c in cells)


@lru_cache(maxsize=None)
def square_group(q: str) -> tuple[PauliWord, PauliWord, PauliWord, PauliWord]:
    """``(+II, E1, E2, E1*E2)`` for row/column ``q``; the last is ``-yy`` for ``c3``."""
    e1, e2, _ = square_entries(q)
    return (PauliWord.identity(2), e1, e2, mul(e1, e2))


@dataclass(frozen=True)
class StabilizerGroup:
    n: int
    elements: tuple[PauliWord, ...]

    def __post_init__(self):
        lookup = {}
        for w in self.elements:
            if w.n != self.n or not w.is_hermitian:
                raise ValueError(f"bad stabilizer element {w}")
            lookup[(w.xbits, w.zbits)] = w.phase
        object.__setattr__(self, "_lookup", lookup)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, word: PauliWord) -> bool:
        return self._lookup.get((word.xbits, word.zbits)) == word.phase

    def phase_of(self, word: PauliWord) -> int | None:
        return self._lookup.get((word.xbits, word.zbits))


def generate_group(generators: Iterable[PauliWord]) -> StabilizerGroup:
    gens = list(generators)
    n = gens[0].n
    elems = {PauliWord.identity(n)}
    frontier = list(elems)
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                p = mul(e, g)
                if p not in elems:
                    elems.add(p)
                    nxt.append(p)
        frontier = nxt
    ordered = sorted(elems, key=lambda w: (w.xbits, w.zbits, w.phase))
    if any(not w.is_hermitian for w in ordered):
        raise ValueError("generators do not define a stabilizer group")
    if PauliWord.identity(n).negate() in elems:
        raise ValueError("generated group contains -I")
    return StabilizerGroup(n, tuple(ordered))


def _interleave(words: tuple[PauliWord, ...]) -> PauliWord:
    # copies c of a 3-qubit word -> qubit order (V_c1, V_c2, A_c1, A_c2, B_c1, B_c2)
    xs, zs = [], []
    for party in range(3):
        for w in words:
            xs.append(w.xbits[party])
            zs.append(w.zbits[party])
    return PauliWord(tuple(xs), tuple(zs), sum(w.phase for w in words))


@lru_cache(maxsize=None)
def ghz_stabilizers(copies: int = 1) -> StabilizerGroup:
    """Stabilizer group of ``|GHZ>^{(x) copies}``, party-major qubit order."""
    if copies not in (1, 2):
        raise ValueError("copies must be 1 or 2")
    base = generate_group(PauliWord.from_string(s) for s in ("+XXX", "+ZZI", "+IZZ"))
    if copies == 1:
        return base
    elems = [_interleave((a, b)) for a in base for b in base]
    ordered = sorted(elems, key=lambda w: (w.xbits, w.zbits, w.phase))
    return StabilizerGroup(6, tuple(ordered))


def stab_membership(word: PauliWord, group: StabilizerGroup) -> int | None:
    """+1 if ``word`` is in the group, -1 if ``-word`` is, otherwise None."""
    if word.n != group.n:
        raise ValueError("size mismatch")
    ph = group.phase_of(word)
    if ph is None:
        return None
    diff = (word.phase - ph) % 4
    if diff == 0:
        return 1
    if diff == 2:
        return -1
    return None
