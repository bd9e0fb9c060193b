"""Referee logic for the GHZ test, the magic-square variant, the Pauli test and the main game.

Query distributions use exact :class:`fractions.Fraction` weights.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .pauli import MS_QUESTIONS, ghz_stabilizers, square_group, stab_membership

PM = (1, -1)
PAIR_ANSWERS = tuple(itertools.product(PM, PM))
V_ANSWERS = tuple((u, v) for u in (0, 1) for v in PAIR_ANSWERS)


class MainQuestion(NamedTuple):
    pi: int
    q: str

    def __str__(self) -> str:
        return f"{self.pi}:{self.q}"

    @classmethod
    def parse(cls, text: str) -> "MainQuestion":
        pi, q = text.split(":")
        if q not in MS_QUESTIONS or pi not in ("0", "1"):
            raise ValueError(f"bad main-game question {text!r}")
        return cls(int(pi), q)


MAIN_QUESTIONS = tuple(MainQuestion(pi, q) for pi in (0, 1) for q in MS_QUESTIONS)


@dataclass(frozen=True)
class Query:
    questions: tuple
    part: str = ""

    def __str__(self) -> str:
        body = ",".join(str(q) for q in self.questions)
        return f"{self.part}|{body}" if self.part else body


@dataclass(frozen=True)
class Game:
    name: str
    questions: tuple[tuple, ...]
    answers: tuple[tuple, ...]
    distribution: tuple[tuple[Query, Fraction], ...]
    predicate: Callable[[Query, tuple], bool] = field(compare=False)
    _tables: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.distribution:
            raise ValueError("empty game")
        total = sum(p for _, p in self.distribution)
        if total != 1 or any(p <= 0 for _, p in self.distribution):
            raise ValueError(f"query probabilities must be positive and sum to 1, got {total}")
        if len(self.questions) != len(self.answers):
            raise ValueError("question and answer alphabets differ in player count")

    @property
    def n_players(self) -> int:
        return len(self.answers)

    def accept(self, query: Query, answers: tuple) -> bool:
        return bool(self.predicate(query, answers))

    def accept_table(self, query: Query) -> np.ndarray:
        """Boolean array indexed by answer positions in each player's alphabet."""
        tab = self._tables.get(query)
        if tab is None:
            shape = tuple(len(a) for a in self.answers)
            tab = np.zeros(shape, dtype=bool)
            for idx in itertools.product(*(range(n) for n in shape)):
                ans = tuple(self.answers[i][k] for i, k in enumerate(idx))
                tab[idx] = self.predicate(query, ans)
            tab.setflags(write=False)
            self._tables[query] = tab
        return tab

    def parts(self) -> tuple[str, ...]:
        seen = []
        for q, _ in self.distribution:
            tag = q.part or "all"
            if tag not in seen:
                seen.append(tag)
        return tuple(seen)


def query_table(game: Game) -> list[tuple[Query, Fraction]]:
    return list(game.distribution)


# --- GHZ test ---------------------------------------------------------------

GHZ_QUERIES = (("x", "x", "x"), ("y", "y", "x"), ("y", "x", "y"), ("x", "y", "y"))


def _ghz_predicate(query: Query, answers: tuple) -> bool:
    target = 1 if query.questions == ("x", "x", "x") else -1
    return answers[0] * answers[1] * answers[2] == target


def ghz_game() -> Game:
    dist = tuple((Query(q), Fraction(1, 4)) for q in GHZ_QUERIES)
    return Game("ghz", (("x", "y"),) * 3, (PM,) * 3, dist, _ghz_predicate)


# --- magic square variant ---------------------------------------------------

def square_valuation(q: str, bits: tuple[int, int]) -> tuple[int, int, int]:
    """Values of the three entries of ``q``; the third is negated for ``c3``."""
    b1, b2 = bits
    third = b1 * b2 * (-1 if q == "c3" else 1)
    return (b1, b2, third)


def _ms_predicate(query: Query, answers: tuple) -> bool:
    q1, q2 = query.questions
    a1, a2 = answers
    if q1 == q2:
        return tuple(a1) == tuple(a2)
    if q1[0] == q2[0]:
        return True
    row, col = (q1, q2) if q1[0] == "r" else (q2, q1)
    ra, ca = (a1, a2) if q1[0] == "r" else (a2, a1)
    i, j = int(row[1]) - 1, int(col[1]) - 1
    return square_valuation(row, ra)[j] == square_valuation(col, ca)[i]


def ms_game() -> Game:
    w = Fraction(1, 36)
    dist = tuple((Query(q), w) for q in itertools.product(MS_QUESTIONS, repeat=2))
    return Game("ms", (MS_QUESTIONS,) * 2, (PAIR_ANSWERS,) * 2, dist, _ms_predicate)


# --- three-player Pauli test ------------------------------------------------

@lru_cache(maxsize=None)
def pauli_constraints(q1: str, q2: str, q3: str) -> tuple[tuple[int, int, int, int], ...]:
    """Constraints ``(k1, k2, k3, m)``: the product of signed valuations of the
    ``k``-th elements of each player's group must equal ``m``.

    ``m`` is the stabilizer membership of the signed 6-qubit word; a word that is
    a (negated) stabilizer forces the honest eigenvalue product to ``m``.
    """
    stab = ghz_stabilizers(2)
    groups = [square_group(q) for q in (q1, q2, q3)]
    out = []
    for ks in itertools.product(range(4), repeat=3):
        word = groups[0][ks[0]] @ groups[1][ks[1]] @ groups[2][ks[2]]
        m = stab_membership(word, stab)
        if m is not None:
            out.append((*ks, m))
    return tuple(out)


def _valuation(bits: tuple[int, int]) -> tuple[int, int, int, int]:
    return (1, bits[0], bits[1], bits[0] * bits[1])


def pauli_check(questions: tuple[str, str, str], answers: tuple) -> bool:
    vals = [_valuation(a) for a in answers]
    for k1, k2, k3, m in pauli_constraints(*questions):
        if vals[0][k1] * vals[1][k2] * vals[2][k3] != m:
            return False
    return True


def _pauli_predicate(query: Query, answers: tuple) -> bool:
    return pauli_check(query.questions, answers)


def pauli_test_game() -> Game:
    w = Fraction(1, 216)
    dist = tuple((Query(q), w) for q in itertools.product(MS_QUESTIONS, repeat=3))
    return Game("pauli", (MS_QUESTIONS,) * 3, (PAIR_ANSWERS,) * 3, dist, _pauli_predicate)


# --- main game --------------------------------------------------------------

def _main_predicate(query: Query, answers: tuple) -> bool:
    (u, v), a, b = answers
    a1, a2 = a
    b1, _ = b
    part = query.part
    if part == "a":
        return pauli_check(tuple(q.q for q in query.questions), (v, a, b))
    if part == "b_i":
        return not (a1 == 1 and ((u == 0 and a2 == -1) or (u == 1 and a2 == 1)))
    if part == "b_ii":
        return not (a2 == -1 and ((u == 0 and a1 * b1 == -1) or (u == 1 and a1 * b1 == 1)))
    if part == "c":
        return a1 == v[1] and b1 == v[1]
    if part == "d":
        return u == 1 or pauli_check(tuple(q.q for q in query.questions), (v, a, b))
    raise ValueError(f"unknown part tag {part!r}")


def main_game() -> Game:
    quarter = Fraction(1, 4)
    dist = []
    for qs in itertools.product(MS_QUESTIONS, repeat=3):
        dist.append((Query(tuple(MainQuestion(0, q) for q in qs), "a"), quarter / 216))
    for sub, q in (("b_i", "r2"), ("b_ii", "c1")):
        for w in MS_QUESTIONS:
            qs = (MainQuestion(1, w), MainQuestion(0, q), MainQuestion(0, q))
            dist.append((Query(qs, sub), quarter / 12))
    dist.append((Query((MainQuestion(1, "r2"), MainQuestion(0, "r2"), MainQuestion(0, "r2")), "c"),
                 quarter))
    for qs in itertools.product(MS_QUESTIONS, repeat=3):
        dist.append((Query(tuple(MainQuestion(1, q) for q in qs), "d"), quarter / 216))
    return Game("main", (MAIN_QUESTIONS,) * 3, (V_ANSWERS, PAIR_ANSWERS, PAIR_ANSWERS),
                tuple(dist), _main_predicate)


def accept_all_game(n_players: int = 2) -> Game:
    """Two-question, two-answer game that accepts every answer tuple."""
    dist = tuple((Query(q), Fraction(1, 2**n_players))
                 for q in itertools.product((0, 1), repeat=n_players))
    return Game("accept_all", ((0, 1),) * n_players, (PM,) * n_players, dist,
                lambda q, a: True)


GAMES = {"ghz": ghz_game, "ms": ms_game, "pauli": pauli_test_game, "main": main_game}


@lru_cache(maxsize=None)
def get_game(name: str) -> Game:
    try:
        return GAMES[name]()
    except KeyError:
        raise ValueError(f"unknown game {name!r}; choose from {sorted(GAMES)}") from None
