import itertools
from fractions import Fraction

import pytest

from embgame.games import (
    PAIR_ANSWERS, MainQuestion, Query, accept_all_game, get_game, ghz_game, main_game, ms_game,
    pauli_check, pauli_constraints, pauli_test_game, square_valuation,
)
from embgame.pauli import MS_QUESTIONS


def q(*names, part=""):
    return Query(tuple(names), part)


def main_q(part, *qs):
    return Query(tuple(MainQuestion.parse(s) for s in qs), part)


def test_ghz_predicate():
    g = ghz_game()
    assert g.accept(q("x", "x", "x"), (1, 1, 1))
    assert not g.accept(q("y", "y", "x"), (1, 1, 1))
    assert g.accept(q("x", "y", "y"), (1, 1, -1))
    assert [p for _, p in g.distribution] == [Fraction(1, 4)] * 4


def test_ms_predicate():
    g = ms_game()
    assert g.accept(q("r1", "r1"), ((1, -1), (1, -1)))
    assert not g.accept(q("r1", "r1"), ((1, -1), (1, 1)))
    for a, b in itertools.product(PAIR_ANSWERS, repeat=2):
        assert g.accept(q("r1", "r2"), (a, b))
    # xi is the shared entry of r1 and c1
    assert not g.accept(q("r1", "c1"), ((1, 1), (-1, 1)))
    assert g.accept(q("c1", "r1"), ((1, 1), (1, 1)))


def test_square_valuation_parity():
    for qn in MS_QUESTIONS:
        for bits in PAIR_ANSWERS:
            v = square_valuation(qn, bits)
            assert v[0] * v[1] * v[2] == (-1 if qn == "c3" else 1)


def test_pauli_examples():
    ok = ((1, 1),) * 3
    assert pauli_check(("r1", "r1", "r1"), ok)
    # a1 b1 v1 = 1 is among the constraints for (r1, r1, r1)
    assert not pauli_check(("r1", "r1", "r1"), ((-1, 1), (1, 1), (1, 1)))
    assert pauli_check(("r1", "r3", "c3"), ((1, -1), (1, 1), (1, 1)))
    assert not pauli_check(("r1", "r3", "c3"), ((1, 1), (1, 1), (1, 1)))


def test_identity_triple_never_rejects():
    for qs in itertools.product(MS_QUESTIONS, repeat=3):
        cons = pauli_constraints(*qs)
        assert (0, 0, 0, 1) in cons
        assert all(m in (1, -1) for *_, m in cons)


def test_pauli_distribution():
    g = pauli_test_game()
    assert len(g.distribution) == 216
    assert sum(p for _, p in g.distribution) == 1


def test_main_parts():
    g = main_game()
    pm = {tag: sum(p for qq, p in g.distribution if qq.part == tag) for tag in g.parts()}
    assert pm == {"a": Fraction(1, 4), "b_i": Fraction(1, 8), "b_ii": Fraction(1, 8),
                  "c": Fraction(1, 4), "d": Fraction(1, 4)}
    c_rows = [qq for qq, _ in g.distribution if qq.part == "c"]
    assert len(c_rows) == 1


def test_main_predicate_examples():
    g = main_game()
    bi = main_q("b_i", "1:r1", "0:r2", "0:r2")
    assert not g.accept(bi, ((0, (1, 1)), (1, -1), (1, 1)))
    assert g.accept(bi, ((0, (1, 1)), (1, 1), (1, 1)))
    assert not g.accept(bi, ((1, (1, 1)), (1, 1), (1, 1)))
    bii = main_q("b_ii", "1:r1", "0:c1", "0:c1")
    assert not g.accept(bii, ((0, (1, 1)), (1, -1), (-1, 1)))
    assert not g.accept(bii, ((1, (1, 1)), (1, -1), (1, 1)))
    c = main_q("c", "1:r2", "0:r2", "0:r2")
    assert not g.accept(c, ((0, (1, 1)), (1, 1), (-1, 1)))
    assert g.accept(c, ((0, (1, -1)), (-1, 1), (-1, 1)))
    d = main_q("d", "1:r1", "1:c3", "1:r2")
    for v, a, b in itertools.product(PAIR_ANSWERS, repeat=3):
        assert g.accept(d, ((1, v), a, b))


def test_question_text_roundtrip():
    for mq in main_game().questions[0]:
        assert MainQuestion.parse(str(mq)) == mq
    with pytest.raises(ValueError):
        MainQuestion.parse("2:r1")


def test_accept_table_shape_and_cache():
    g = main_game()
    qq = g.distribution[0][0]
    t = g.accept_table(qq)
    assert t.shape == (8, 4, 4)
    assert g.accept_table(qq) is t


def test_registry_and_validation():
    assert get_game("ghz").name == "ghz"
    with pytest.raises(ValueError):
        get_game("chsh")
    assert accept_all_game(3).n_players == 3
