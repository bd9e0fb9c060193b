"""Strategy container, the honest strategies and the embezzlement family."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from . import qcore
from .games import MAIN_QUESTIONS, PAIR_ANSWERS, V_ANSWERS, Game, MainQuestion
from .pauli import MS_QUESTIONS, PauliWord, square_group, to_matrix
from .qcore import (
    KET_MINUS, KET_PLUS, P0, P1, DenseOperator, ProjectiveMeasurement, StateVector,
    canonical_order, controlled, ghz, tensor,
)

DENSE_LIMIT = 14
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Strategy:
    state: StateVector
    owners: tuple[tuple[str, ...], ...]
    measurements: tuple[Mapping, ...]

    def __post_init__(self):
        owners = tuple(tuple(o) for o in self.owners)
        if len(owners) != len(self.measurements):
            raise ValueError("one register set and one measurement map per player")
        flat = [r for o in owners for r in o]
        if sorted(flat) != sorted(self.state.registers):
            raise ValueError("player registers must partition the state's registers")
        for player, meas in enumerate(self.measurements):
            own = set(owners[player])
            for q, m in meas.items():
                if not set(m.registers) <= own:
                    raise ValueError(f"player {player} measurement on {q!r} touches "
                                     f"{sorted(set(m.registers) - own)}")
        object.__setattr__(self, "owners", owners)
        object.__setattr__(self, "measurements", tuple(dict(m) for m in self.measurements))

    @property
    def n_players(self) -> int:
        return len(self.owners)

    def check_alphabet(self, game: Game) -> None:
        if game.n_players != self.n_players:
            raise ValueError(f"strategy has {self.n_players} players, game has {game.n_players}")
        for player, (qs, ans) in enumerate(zip(game.questions, game.answers)):
            meas = self.measurements[player]
            for q in qs:
                if q not in meas:
                    raise ValueError(f"player {player} has no measurement for question {q!r}")
                if set(meas[q].labels) != set(ans):
                    raise ValueError(f"player {player} question {q!r}: outcome labels do not "
                                     "match the answer alphabet")


def with_measurement(strategy: Strategy, player: int, question, m: ProjectiveMeasurement) -> Strategy:
    meas = list(strategy.measurements)
    meas[player] = {**meas[player], question: m}
    return replace(strategy, measurements=tuple(meas))


# --- Pauli measurements ----------------------------------------------------

def pauli_measurement(words: Sequence[PauliWord], targets: Sequence[str],
                      label=lambda e: e) -> ProjectiveMeasurement:
    """Joint eigenbasis measurement of commuting Hermitian words; outcome labels
    ``label(eigenvalues)``."""
    mats = [to_matrix(w).matrix for w in words]
    d = mats[0].shape[0]
    eye = np.eye(d)
    outcomes = []
    for eig in _sign_tuples(len(words)):
        p = eye.astype(complex)
        for e, m in zip(eig, mats):
            p = p @ (eye + e * m) / 2
        outcomes.append((label(eig), p))
    return ProjectiveMeasurement(tuple(targets), tuple(outcomes))


def _sign_tuples(k: int):
    if k == 1:
        return [(1,), (-1,)]
    return PAIR_ANSWERS if k == 2 else None


def square_measurement(q: str, targets: Sequence[str], label=lambda e: e) -> ProjectiveMeasurement:
    """Measure the first two entries of row/column ``q`` on the two ``targets``."""
    _, e1, e2, _ = square_group(q)
    return pauli_measurement([e1, e2], targets, label)


def _pm_measurement(word: str, target: str) -> ProjectiveMeasurement:
    return pauli_measurement([PauliWord.from_string(word)], [target], lambda e: e[0])


# --- honest strategies for the building-block tests -------------------------

def honest_ghz() -> Strategy:
    regs = ("V1", "A1", "B1")
    state = ghz(*regs)
    meas = tuple({"x": _pm_measurement("X", r), "y": _pm_measurement("Y", r)} for r in regs)
    return Strategy(state, tuple((r,) for r in regs), meas)


def honest_ms() -> Strategy:
    state = tensor([qcore.epr("A1", "B1"), qcore.epr("A2", "B2")]).reorder(("A1", "A2", "B1", "B2"))
    owners = (("A1", "A2"), ("B1", "B2"))
    meas = tuple({q: square_measurement(q, o) for q in MS_QUESTIONS} for o in owners)
    return Strategy(state, owners, meas)


def ghz_pair_state() -> StateVector:
    s = tensor([ghz("V1", "A1", "B1"), ghz("V2", "A2", "B2")])
    return s.reorder(canonical_order(s.registers))


def honest_pauli() -> Strategy:
    owners = (("V1", "V2"), ("A1", "A2"), ("B1", "B2"))
    meas = tuple({q: square_measurement(q, o) for q in MS_QUESTIONS} for o in owners)
    return Strategy(ghz_pair_state(), owners, meas)


# --- operators from the rigidity statements ---------------------------------

def _check_binary(op: np.ndarray, name: str) -> None:
    eye = np.eye(op.shape[0])
    if not np.allclose(op, op.conj().T, atol=1e-10) or not np.allclose(op @ op, eye, atol=1e-10):
        raise ValueError(f"{name} is not a binary observable (Hermitian involution)")


def ghz_operator(Xo, Yo) -> DenseOperator:
    """``(XXX - YYX - XYY - YXY) / 4`` with the same local observables for each player."""
    x = np.asarray(getattr(Xo, "matrix", Xo), dtype=complex)
    y = np.asarray(getattr(Yo, "matrix", Yo), dtype=complex)
    if x.shape != y.shape:
        raise ValueError("X and Y must have the same dimension")
    _check_binary(x, "X")
    _check_binary(y, "Y")
    k = qcore.kron
    return DenseOperator((k(x, x, x) - k(y, y, x) - k(x, y, y) - k(y, x, y)) / 4)


def ms_operator(Xs, Zs) -> DenseOperator:
    """``(X^1_1 X^2_1 + Z^1_1 Z^2_1)/2 * (X^1_2 X^2_2 + Z^1_2 Z^2_2)/2``.

    ``Xs[i][j]`` is player ``i``'s observable for logical qubit ``j`` on that
    player's whole local space.
    """
    mats = {}
    for name, ops in (("X", Xs), ("Z", Zs)):
        for i in range(2):
            for j in range(2):
                m = np.asarray(getattr(ops[i][j], "matrix", ops[i][j]), dtype=complex)
                _check_binary(m, f"{name}^{i + 1}_{j + 1}")
                mats[name, i, j] = m
    k = qcore.kron
    f1 = (k(mats["X", 0, 0], mats["X", 1, 0]) + k(mats["Z", 0, 0], mats["Z", 1, 0])) / 2
    f2 = (k(mats["X", 0, 1], mats["X", 1, 1]) + k(mats["Z", 0, 1], mats["Z", 1, 1])) / 2
    return DenseOperator(f1 @ f2)


# --- embezzlement family ----------------------------------------------------

def normalization(d: int) -> float:
    """``sum_{j,k=1..d} 2^{-|j-k|/2}``, summed by difference."""
    if d < 1:
        raise ValueError("d must be a positive integer")
    r = 2 ** -0.5
    m = np.arange(1, d)
    return float(d + 2 * np.sum((d - m) * r**m))


@dataclass(frozen=True)
class EmbezzlementFamily:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")

    @property
    def norm_const(self) -> float:
        return normalization(self.d)

    @property
    def coefficient(self) -> float:
        return 1 / math.sqrt(self.norm_const)

    def state(self) -> StateVector:
        return gamma_state(self.d)

    def shift(self) -> DenseOperator:
        return shift_unitary(self.d)


def ancilla_registers(party: str, d: int) -> tuple[str, ...]:
    return tuple(f"{party}'{k}" for k in range(1, d + 1))


def gamma_state(d: int, dense_limit: int = DENSE_LIMIT) -> StateVector:
    """``N_d^{-1/2} sum_j |11>^{(x) j} |EPR>^{(x)(d-j)}`` on registers ``A'`` then ``B'``."""
    if d < 1 or d > dense_limit:
        raise ValueError(f"d must lie in [1, {dense_limit}]")
    one_one = np.array([0, 0, 0, 1], dtype=complex)
    pair_epr = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    amps = np.zeros(4**d, dtype=complex)
    for j in range(1, d + 1):
        term = np.ones(1, dtype=complex)
        for k in range(d):
            term = np.kron(term, one_one if k < j else pair_epr)
        amps += term
    amps /= math.sqrt(normalization(d))
    paired = tuple(r for k in range(1, d + 1) for r in (f"A'{k}", f"B'{k}"))
    state = StateVector(paired, amps / np.linalg.norm(amps))
    return state.reorder(ancilla_registers("A", d) + ancilla_registers("B", d))


def shift_unitary(d: int, dense_limit: int = DENSE_LIMIT) -> DenseOperator:
    """Cyclic left rotation ``|b0 b1 .. bd> -> |b1 .. bd b0>`` on ``d + 1`` qubits."""
    n = d + 1
    if d < 1 or n > dense_limit:
        raise ValueError(f"d + 1 must lie in [2, {dense_limit}]")
    idx = np.arange(2**n)
    top = idx >> (n - 1)
    rotated = ((idx << 1) & (2**n - 1)) | top
    m = np.zeros((2**n, 2**n))
    m[rotated, idx] = 1
    return DenseOperator(m, "unitary")


def overlap_closed_form(d: int) -> float:
    """``|<11|<Gamma_d| (W (x) W) |EPR>|Gamma_d>|`` from the term Gram entries.

    The double sum differs from ``N_d`` by exactly ``1 - 2^{-d/2}``.
    """
    n = normalization(d)
    return 1.0 - (1.0 - 2.0 ** (-d / 2)) / n


def infidelity_closed_form(d: int) -> float:
    """``1 - overlap(d)`` without cancellation."""
    return (1.0 - 2.0 ** (-d / 2)) / normalization(d)


def pv_measurement() -> ProjectiveMeasurement:
    """Two-outcome measurement on ``(V1, V2)`` labelled ``u = 0, 1``."""
    plus = np.outer(KET_PLUS, KET_PLUS.conj())
    minus = np.outer(KET_MINUS, KET_MINUS.conj())
    pi0 = np.kron(P0, P0) + np.kron(plus, P1)
    pi1 = np.kron(P1, P0) + np.kron(minus, P1)
    return ProjectiveMeasurement(("V1", "V2"), ((0, pi0), (1, pi1)))


CH = controlled(qcore.H)
CNOT = controlled(qcore.X)


def _pv_questions(controlled_hadamard: bool) -> dict:
    meas = {}
    zero = np.zeros((4, 4))
    for q in MS_QUESTIONS:
        base = square_measurement(q, ("V1", "V2"))
        outs = [((0, lab), p) for lab, p in base.outcomes] + [((1, v), zero) for v in PAIR_ANSWERS]
        meas[MainQuestion(0, q)] = ProjectiveMeasurement(("V1", "V2"), tuple(outs))
        logical = square_measurement(q, ("V2", "V3"))
        outs = []
        for u, pu in ((0, P0), (1, P1)):
            for lab, p in logical.outcomes:
                outs.append(((u, lab), np.kron(pu, p)))
        pre = ((CH, ("V2", "V1")),) if controlled_hadamard else ()
        meas[MainQuestion(1, q)] = ProjectiveMeasurement(("V1", "V2", "V3"), tuple(outs), pre)
    return meas


def _pab_questions(party: str, d: int) -> dict:
    r1, r2, r3 = (f"{party}{k}" for k in (1, 2, 3))
    cw = controlled(shift_unitary(d))
    pre = ((cw, (r2, r1) + ancilla_registers(party, d)), (CNOT, (r2, r1)))
    meas = {}
    for q in MS_QUESTIONS:
        meas[MainQuestion(0, q)] = square_measurement(q, (r1, r2))
        m = square_measurement(q, (r2, r3))
        meas[MainQuestion(1, q)] = ProjectiveMeasurement(m.targets, m.outcomes, pre)
    return meas


def emb_registers(d: int) -> tuple[tuple[str, ...], ...]:
    return (
        ("V1", "V2", "V3"),
        ("A1", "A2", "A3") + ancilla_registers("A", d),
        ("B1", "B2", "B3") + ancilla_registers("B", d),
    )


def emb_state(d: int) -> StateVector:
    s = tensor([ghz("V1", "A1", "B1"), ghz("V2", "A2", "B2"), ghz("V3", "A3", "B3"),
                gamma_state(d)])
    return s.reorder(canonical_order(s.registers))


def emb_strategy(d: int, dense_limit: int = 26, controlled_hadamard: bool = True) -> Strategy:
    """Honest main-game strategy with a ``d``-pair embezzlement ancilla.

    ``controlled_hadamard=False`` replaces P_V's two-outcome measurement by a
    plain computational-basis measurement of ``V1`` (a deliberately wrong
    strategy used for rigidity diagnostics).
    """
    if d < 1 or 9 + 2 * d > dense_limit:
        raise ValueError(f"d = {d} needs {9 + 2 * d} qubits, above dense limit {dense_limit}")
    meas = (_pv_questions(controlled_hadamard), _pab_questions("A", d), _pab_questions("B", d))
    return Strategy(emb_state(d), emb_registers(d), meas)


# --- serialization -----------------------------------------------------------

def _enc_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _dec_matrix(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def _enc_label(lab):
    if isinstance(lab, tuple):
        return [_enc_label(x) for x in lab]
    return lab


def _dec_label(lab):
    if isinstance(lab, list):
        return tuple(_dec_label(x) for x in lab)
    return lab


def _enc_question(q) -> str:
    return str(q)


def _dec_question(text: str, game_questions: Sequence | None):
    if game_questions is not None:
        for q in game_questions:
            if str(q) == text:
                return q
        raise ValueError(f"question {text!r} not in game alphabet")
    return MainQuestion.parse(text) if ":" in text else text


def strategy_to_dict(strategy: Strategy) -> dict:
    players = []
    for own, meas in zip(strategy.owners, strategy.measurements):
        qs = {}
        for q, m in meas.items():
            qs[_enc_question(q)] = {
                "pre": [{"registers": list(r), "matrix": _enc_matrix(u.matrix)} for u, r in m.pre],
                "targets": list(m.targets),
                "outcomes": [{"label": _enc_label(lab), "projector": _enc_matrix(p)}
                             for lab, p in m.outcomes],
            }
        players.append({"registers": list(own), "questions": qs})
    amps = strategy.state.amplitudes
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "strategy",
        "registers": list(strategy.state.registers),
        "dimension": int(amps.shape[0]),
        "state": [[float(z.real), float(z.imag)] for z in amps],
        "players": players,
    }


def strategy_from_dict(data: dict, game: Game | None = None) -> Strategy:
    if data.get("schema_version") != SCHEMA_VERSION or data.get("kind") != "strategy":
        raise ValueError("not a strategy file of a supported schema version")
    state = StateVector(tuple(data["registers"]),
                        np.array([complex(re, im) for re, im in data["state"]]))
    owners, meas = [], []
    for i, pl in enumerate(data["players"]):
        owners.append(tuple(pl["registers"]))
        alphabet = game.questions[i] if game is not None else None
        mm = {}
        for qtext, spec in pl["questions"].items():
            pre = tuple((DenseOperator(_dec_matrix(g["matrix"]), "unitary"), tuple(g["registers"]))
                        for g in spec["pre"])
            outs = tuple((_dec_label(o["label"]), _dec_matrix(o["projector"]))
                         for o in spec["outcomes"])
            mm[_dec_question(qtext, alphabet)] = ProjectiveMeasurement(tuple(spec["targets"]), outs, pre)
        meas.append(mm)
    return Strategy(state, tuple(owners), tuple(meas))


def save_strategy(strategy: Strategy, path) -> None:
    with open(path, "w") as fh:
        json.dump(strategy_to_dict(strategy), fh)


def load_strategy(path, game: Game | None = None) -> Strategy:
    with open(path) as fh:
        return strategy_from_dict(json.load(fh), game)


HONEST = {"ghz": honest_ghz, "ms": honest_ms, "pauli": honest_pauli}

__all__ = [
    "Strategy", "EmbezzlementFamily", "gamma_state", "shift_unitary", "overlap_closed_form",
    "pv_measurement", "honest_ghz", "honest_ms", "honest_pauli", "emb_strategy",
    "ghz_operator", "ms_operator", "MAIN_QUESTIONS", "V_ANSWERS",
]
