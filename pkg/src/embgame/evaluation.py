"""Winning-probability engines.

``value_dense`` is the general Born-rule oracle.  ``value_structured`` is
specific to the embezzlement strategy on the main game and never builds the
ancilla.  ``classical_value`` brute-forces deterministic strategies.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .games import Game, Query, get_game
from .qcore import (
    DimensionError, NumericalError, apply_array, reduced_density_array,
)
from .strategies import Strategy, honest_pauli, infidelity_closed_form

DENSE_LIMIT = 26
THREADS_ENV = "EMBGAME_THREADS"


@dataclass(frozen=True)
class ValueReport:
    total: float
    per_part: dict
    per_query: tuple | None = None
    schema_version: int = field(default=1, repr=False)

    def __post_init__(self):
        recon = sum(mass * cond for mass, cond in self.per_part.values())
        if abs(recon - self.total) > 1e-12:
            raise NumericalError(f"part decomposition {recon} disagrees with total {self.total}")

    def conditional(self, part: str) -> float:
        """Success conditioned on ``part``; ``"b"`` pools ``b_i`` and ``b_ii``."""
        keys = [k for k in self.per_part if k == part or k.startswith(part + "_")]
        if not keys:
            raise KeyError(part)
        mass = sum(self.per_part[k][0] for k in keys)
        return sum(self.per_part[k][0] * self.per_part[k][1] for k in keys) / mass

    def min_query(self, part: str | None = None) -> float:
        if self.per_query is None:
            raise ValueError("report has no per-query data")
        vals = [p for q, p in self.per_query if part is None or (q.part or "all") == part]
        return min(vals)

    def to_dict(self) -> dict:
        out = {
            "schema_version": self.schema_version,
            "total": self.total,
            "parts": {k: {"mass": float(m), "success": c} for k, (m, c) in self.per_part.items()},
        }
        if self.per_query is not None:
            out["queries"] = [{"part": q.part or "all", "query": str(q), "probability": p}
                              for q, p in self.per_query]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["part,query,probability"]
        rows = self.per_query or ()
        for q, p in rows:
            lines.append(f"{q.part or 'all'},\"{q}\",{p:.12g}")
        return "\n".join(lines) + "\n"


def pairwise_sum(values: Sequence[float]) -> float:
    """Fixed-order tree reduction."""
    vals = list(values)
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _outcome_stack(game: Game, player: int, meas) -> np.ndarray:
    d = 2 ** len(meas.targets)
    stack = np.zeros((len(game.answers[player]), d, d), dtype=complex)
    for i, ans in enumerate(game.answers[player]):
        stack[i] = meas.projector(ans)
    return stack


def joint_distribution(rho: np.ndarray, stacks: Sequence[np.ndarray]) -> np.ndarray:
    """``p[o_1..o_k] = Tr(rho (P^1_{o_1} (x) ... (x) P^k_{o_k}))``.

    ``rho`` is indexed by the concatenation of each player's measured qubits.
    """
    k = len(stacks)
    dims = [s.shape[1] for s in stacks]
    t = rho.reshape(dims + dims)
    letters = "abcdefghijklmnop"
    row, col, out = letters[:k], letters[k:2 * k], "uvwxyz"[:k]
    subs = [f"{out[i]}{col[i]}{row[i]}" for i in range(k)]
    expr = f"{row}{col}," + ",".join(subs) + f"->{out}"
    return np.einsum(expr, t, *stacks, optimize=True).real


class _DenseContext:
    """Caches post-unitary states and reduced densities across queries."""

    def __init__(self, game: Game, strategy: Strategy):
        self.game = game
        self.strategy = strategy
        self.state = strategy.state
        self.n = strategy.state.n_qubits
        self._psi: dict = {}
        self._rho: dict = {}
        self._stacks: dict = {}

    def _pre_key(self, meas) -> tuple:
        return tuple((id(u), r) for u, r in meas.pre)

    def psi(self, measurements) -> np.ndarray:
        key = tuple(self._pre_key(m) for m in measurements)
        out = self._psi.get(key)
        if out is None:
            out = self.state.amplitudes
            for m in measurements:
                for u, regs in m.pre:
                    out = apply_array(out, self.n, u, self.state.positions(regs))
            self._psi[key] = out
        return out

    def rho(self, measurements) -> np.ndarray:
        key = (tuple(self._pre_key(m) for m in measurements),
               tuple(m.targets for m in measurements))
        out = self._rho.get(key)
        if out is None:
            keep = [r for m in measurements for r in m.targets]
            psi = self.psi(measurements)
            if len(keep) == self.n:
                pos = self.state.positions(keep)
                t = np.transpose(psi.reshape((2,) * self.n), pos).reshape(-1)
                out = np.outer(t, t.conj())
            else:
                out = reduced_density_array(psi, self.n, self.state.positions(keep))
            self._rho[key] = out
        return out

    def stack(self, player: int, question) -> np.ndarray:
        key = (player, question)
        out = self._stacks.get(key)
        if out is None:
            out = _outcome_stack(self.game, player, self.strategy.measurements[player][question])
            self._stacks[key] = out
        return out

    def distribution(self, query: Query) -> np.ndarray:
        meas = [self.strategy.measurements[i][q] for i, q in enumerate(query.questions)]
        rho = self.rho(meas)
        stacks = [self.stack(i, q) for i, q in enumerate(query.questions)]
        probs = joint_distribution(rho, stacks)
        total = probs.sum()
        if abs(total - 1.0) > 1e-9:
            raise NumericalError(f"Born weights for {query} sum to {total}")
        if probs.min() < -1e-10:
            raise NumericalError(f"negative Born weight {probs.min()} for {query}")
        return probs


def _selected(game: Game, parts) -> list[tuple[Query, Fraction]]:
    rows = list(game.distribution)
    if parts is None:
        return rows
    wanted = set(parts)
    return [(q, p) for q, p in rows
            if (q.part or "all") in wanted or (q.part or "all").split("_")[0] in wanted]


def _report(rows: list[tuple[Query, Fraction]], values: list[float], with_queries: bool) -> ValueReport:
    groups: dict[str, list[int]] = {}
    for i, (q, _) in enumerate(rows):
        groups.setdefault(q.part or "all", []).append(i)
    selected = sum(p for _, p in rows)
    per_part = {}
    for tag, idx in groups.items():
        mass = sum(rows[i][1] for i in idx)
        contrib = pairwise_sum([float(rows[i][1]) * values[i] for i in idx])
        cond = min(max(contrib / float(mass), 0.0), 1.0)
        # masses are renormalised over the selected parts
        per_part[tag] = (mass / selected, cond)
    total = pairwise_sum([float(m) * c for m, c in per_part.values()])
    per_query = tuple((q, values[i]) for i, (q, _) in enumerate(rows)) if with_queries else None
    return ValueReport(total, per_part, per_query)


def value_dense(game: Game, strategy: Strategy, parts: Sequence[str] | None = None,
                dense_limit: int = DENSE_LIMIT, per_query: bool = False) -> ValueReport:
    """Exact Born-rule value of ``strategy`` on ``game``.

    With ``parts`` given, only those parts are evaluated and masses are
    renormalised over them.
    """
    if strategy.state.n_qubits > dense_limit:
        raise DimensionError(f"{strategy.state.n_qubits} qubits above dense limit {dense_limit}")
    strategy.check_alphabet(game)
    ctx = _DenseContext(game, strategy)
    rows = _selected(game, parts)
    if not rows:
        raise ValueError(f"no queries in parts {parts}")
    # warm the state/density caches sequentially; per-query work is independent
    for q, _ in rows:
        ctx.rho([strategy.measurements[i][x] for i, x in enumerate(q.questions)])

    def one(row):
        q, _ = row
        probs = ctx.distribution(q)
        return float(np.sum(probs[game.accept_table(q)]))

    threads = _threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            values = list(pool.map(one, rows))
    else:
        values = [one(r) for r in rows]
    values = [min(max(v, 0.0), 1.0) for v in values]
    return _report(rows, values, per_query)


def per_query_report(game: Game, strategy: Strategy, **kw) -> ValueReport:
    return value_dense(game, strategy, per_query=True, **kw)


# --- structured engine -------------------------------------------------------

def _ghz_copy_density(gram: np.ndarray) -> np.ndarray:
    """Density of ``(|000>|e0> + |111>|e1>)/sqrt2`` on the three qubits, given
    ``gram[a, b] = <e_a|e_b>``."""
    rho = np.zeros((8, 8), dtype=complex)
    for a, ia in ((0, 0), (1, 7)):
        for b, ib in ((0, 0), (1, 7)):
            rho[ia, ib] = 0.5 * gram[b, a]
    return rho


def _party_major(rho_copy2: np.ndarray, rho_copy3: np.ndarray) -> np.ndarray:
    # (V2 A2 B2) (x) (V3 A3 B3) -> (V2 V3)(A2 A3)(B2 B3)
    t = np.kron(rho_copy2, rho_copy3).reshape((2,) * 12)
    order = [0, 3, 1, 4, 2, 5]
    return np.transpose(t, order + [o + 6 for o in order]).reshape(64, 64)


def _part_d_direct(overlap: float) -> dict:
    gram = np.array([[1.0, overlap], [overlap, 1.0]])
    ghz_rho = _ghz_copy_density(np.ones((2, 2)))
    rho = _party_major(_ghz_copy_density(gram), ghz_rho)
    pauli = get_game("pauli")
    honest = honest_pauli()
    out = {}
    for q, _ in pauli.distribution:
        stacks = [_outcome_stack(pauli, i, honest.measurements[i][x])
                  for i, x in enumerate(q.questions)]
        probs = joint_distribution(rho, stacks)
        out[q.questions] = float(np.sum(probs[pauli.accept_table(q)]))
    return out


@lru_cache(maxsize=None)
def _part_d_affine() -> tuple:
    # the copy-2 density is affine in the overlap, so each acceptance is too
    at0, at1 = _part_d_direct(0.0), _part_d_direct(1.0)
    return tuple((q, at0[q], at1[q] - at0[q]) for q in at0)


def part_d_conditionals(overlap: float) -> dict:
    """Per-inner-query acceptance after P_V reports ``u = 0``."""
    return {q: c0 + overlap * c1 for q, c0, c1 in _part_d_affine()}


def value_structured(d: int, per_query: bool = False) -> ValueReport:
    """Value of the embezzlement strategy on the main game; O(d) in the ancilla."""
    if d < 1:
        raise ValueError("d must be a positive integer")
    game = get_game("main")
    overlap = 1.0 - infidelity_closed_form(d)
    cond = part_d_conditionals(overlap)
    rows = list(game.distribution)
    values = []
    for q, _ in rows:
        if q.part == "d":
            # u = 1 with probability 1/2 and is always accepted
            values.append(0.5 + 0.5 * cond[tuple(x.q for x in q.questions)])
        else:
            values.append(1.0)
    return _report(rows, values, per_query)


# --- classical value ---------------------------------------------------------

class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ClassicalResult:
    value: Fraction
    exact: bool
    tables: tuple

    def __float__(self) -> float:
        return float(self.value)


def _weight_tensor(game: Game) -> tuple[np.ndarray, int]:
    denom = math.lcm(*(p.denominator for _, p in game.distribution))
    qidx = [{q: i for i, q in enumerate(qs)} for qs in game.questions]
    shape = tuple(len(q) for q in game.questions) + tuple(len(a) for a in game.answers)
    w = np.zeros(shape, dtype=np.int64)
    for q, p in game.distribution:
        pos = tuple(qidx[i][x] for i, x in enumerate(q.questions))
        w[pos] += int(p * denom) * game.accept_table(q).astype(np.int64)
    return w, denom


def classical_value(game: Game, mode: str = "exact", budget: float = 1e10,
                    seed: int = 0, restarts: int = 32) -> ClassicalResult:
    """Best deterministic-strategy value.

    Exact mode enumerates all but one player's answer tables and optimises the
    remaining player question by question.  Heuristic mode is steepest ascent
    from random tables and returns a lower bound.
    """
    w, denom = _weight_tensor(game)
    if mode == "exact":
        return _classical_exact(game, w, denom, budget)
    if mode == "heuristic":
        return _classical_heuristic(game, w, denom, seed, restarts)
    raise ValueError(f"unknown mode {mode!r}")


def _classical_exact(game: Game, w: np.ndarray, denom: int, budget: float) -> ClassicalResult:
    k = game.n_players
    nq = [len(q) for q in game.questions]
    na = [len(a) for a in game.answers]
    counts = [na[i] ** nq[i] for i in range(k)]
    last = int(np.argmax(counts))
    enum = math.prod(counts) // counts[last]
    if enum > budget:
        raise BudgetExceeded(f"exact mode needs {enum:.3g} strategies, budget {budget:.3g}")
    # move the optimised player to the end
    order = [i for i in range(k) if i != last] + [last]
    w = np.transpose(w, order + [k + i for i in order])
    nq = [nq[i] for i in order]
    na = [na[i] for i in order]
    if k == 1:
        best = int(w.max(axis=1).sum())
        tables = (tuple(int(a) for a in w.argmax(axis=1)),)
        return ClassicalResult(Fraction(best, denom), True, tables)
    # vectorise over the second-to-last player's tables, loop over the rest
    inner = np.array(list(itertools.product(range(na[k - 2]), repeat=nq[k - 2])), dtype=np.intp)
    best, best_tables = -1, None
    for outer in itertools.product(*(itertools.product(range(na[i]), repeat=nq[i])
                                     for i in range(k - 2))):
        t = w
        for i, table in enumerate(outer):
            t = sum(_fix(t, qi, table[qi], k - i) for qi in range(nq[i]))
        # t: (q_{k-2}, q_{k-1}, a_{k-2}, a_{k-1})
        acc = np.zeros((len(inner), nq[k - 1], na[k - 1]), dtype=np.int64)
        for qi in range(nq[k - 2]):
            acc += t[qi][:, inner[:, qi], :].transpose(1, 0, 2)
        vals = acc.max(axis=2).sum(axis=1)
        j = int(np.argmax(vals))
        if vals[j] > best:
            best = int(vals[j])
            last_table = tuple(int(a) for a in acc[j].argmax(axis=1))
            best_tables = tuple(outer) + (tuple(int(a) for a in inner[j]), last_table)
    inv = [0] * k
    for pos, player in enumerate(order):
        inv[player] = best_tables[pos]
    tables = tuple(tuple(game.answers[p][a] for a in inv[p]) for p in range(k))
    return ClassicalResult(Fraction(best, denom), True, tables)


def _fix(t: np.ndarray, qi: int, ai: int, remaining: int) -> np.ndarray:
    """Fix the leading player's question ``qi`` and answer ``ai``.

    ``t`` has ``remaining`` question axes followed by ``remaining`` answer axes.
    """
    sub = t[qi]
    return np.take(sub, ai, axis=remaining - 1)


def _strategy_value(w: np.ndarray, tables: list[np.ndarray]) -> int:
    k = len(tables)
    grids = np.meshgrid(*[np.arange(len(t)) for t in tables], indexing="ij")
    idx = tuple(grids) + tuple(tables[i][grids[i]] for i in range(k))
    return int(w[idx].sum())


def _classical_heuristic(game: Game, w: np.ndarray, denom: int, seed: int,
                         restarts: int) -> ClassicalResult:
    k = game.n_players
    nq = [len(q) for q in game.questions]
    na = [len(a) for a in game.answers]
    seqs = np.random.SeedSequence(seed).spawn(restarts)
    best, best_tables = -1, None
    for ss in seqs:
        rng = np.random.Generator(np.random.Philox(ss))
        tables = [rng.integers(0, na[i], size=nq[i]) for i in range(k)]
        cur = _strategy_value(w, tables)
        while True:
            move, gain = None, 0
            for i in range(k):
                for qi in range(nq[i]):
                    old = tables[i][qi]
                    for a in range(na[i]):
                        if a == old:
                            continue
                        tables[i][qi] = a
                        g = _strategy_value(w, tables) - cur
                        if g > gain:
                            move, gain = (i, qi, a), g
                    tables[i][qi] = old
            if move is None:
                break
            i, qi, a = move
            tables[i][qi] = a
            cur += gain
        if cur > best:
            best, best_tables = cur, [t.copy() for t in tables]
    out = tuple(tuple(game.answers[p][a] for a in best_tables[p]) for p in range(k))
    return ClassicalResult(Fraction(best, denom), False, out)
