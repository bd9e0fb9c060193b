"""See-saw search for good strategies at fixed local dimension.

Each sweep sets the state to the principal eigenvector of the game operator,
then improves one (player, question) measurement at a time.  Every step is
exact for its sub-problem or keeps the incumbent, so sweep values never drop.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from .games import Game
from .qcore import NumericalError, ProjectiveMeasurement, StateVector
from .strategies import Strategy

DENSE_LIMIT = 14
EIGH_LIMIT = 2**12
MONOTONE_TOL = 1e-12
THREADS_ENV = "EMBGAME_THREADS"
_PARTIES = {1: ("A",), 2: ("A", "B"), 3: ("V", "A", "B")}


@dataclass(frozen=True)
class SeesawConfig:
    qubits: tuple[int, ...]
    restarts: int = 20
    max_sweeps: int = 200
    tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if any(q < 0 for q in self.qubits):
            raise ValueError("qubit counts must be >= 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class SeesawResult:
    best: float
    strategy: Strategy
    trace: tuple[float, ...]
    seed: int
    restart: int
    traces: tuple[tuple[float, ...], ...]

    def __iter__(self):
        return iter((self.best, self.strategy, self.trace))


class _Problem:
    """Game weights grouped by question tuple, as dense float tensors."""

    def __init__(self, game: Game, qubits: tuple[int, ...]):
        self.k = game.n_players
        self.dims = tuple(2**q for q in qubits)
        self.nans = tuple(len(a) for a in game.answers)
        self.qindex = [{q: i for i, q in enumerate(qs)} for qs in game.questions]
        weights: dict = {}
        for query, p in game.distribution:
            key = tuple(self.qindex[i][q] for i, q in enumerate(query.questions))
            w = float(p) * game.accept_table(query)
            weights[key] = weights[key] + w if key in weights else w
        self.weights = sorted(weights.items())
        self.by_player = [
            {x: [(key, w) for key, w in self.weights if key[i] == x]
             for x in range(len(game.questions[i]))}
            for i in range(self.k)
        ]

    def omega(self, meas) -> np.ndarray:
        k = self.k
        o, s, t = "abcdef"[:k], "ghijkl"[:k], "mnopqr"[:k]
        expr = f"{o}," + ",".join(f"{o[j]}{s[j]}{t[j]}" for j in range(k)) + f"->{s}{t}"
        dim = int(np.prod(self.dims))
        out = np.zeros((dim, dim), dtype=complex)
        for key, w in self.weights:
            stacks = [meas[j][key[j]] for j in range(k)]
            out += np.einsum(expr, w, *stacks, optimize=True).reshape(dim, dim)
        return (out + out.conj().T) / 2

    def rewards(self, rho_t: np.ndarray, meas, i: int, x: int) -> np.ndarray:
        """``R[a]`` with ``Tr(P_a R[a])`` summing to the part of the objective at ``(i, x)``."""
        k = self.k
        o, s, t = "abcdef"[:k], "ghijkl"[:k], "mnopqr"[:k]
        others = [j for j in range(k) if j != i]
        expr = (f"{o},{s}{t}," + ",".join(f"{o[j]}{t[j]}{s[j]}" for j in others)
                + f"->{o[i]}{s[i]}{t[i]}")
        out = np.zeros((self.nans[i], self.dims[i], self.dims[i]), dtype=complex)
        for key, w in self.by_player[i][x]:
            stacks = [meas[j][key[j]] for j in others]
            out += np.einsum(expr, w, rho_t, *stacks, optimize=True)
        return (out + np.conj(np.swapaxes(out, 1, 2))) / 2


def _principal(omega: np.ndarray) -> tuple[float, np.ndarray]:
    if omega.shape[0] <= EIGH_LIMIT:
        vals, vecs = np.linalg.eigh(omega)
        return float(vals[-1]), vecs[:, -1]
    vals, vecs = scipy.sparse.linalg.eigsh(omega, k=1, which="LA", v0=np.ones(omega.shape[0]))
    return float(vals[0]), vecs[:, 0]


def _projectors(basis: np.ndarray, labels: np.ndarray, n_out: int) -> np.ndarray:
    out = np.zeros((n_out,) + basis.shape, dtype=complex)
    for a in range(n_out):
        cols = basis[:, labels == a]
        out[a] = cols @ cols.conj().T
    return out


def _score(basis: np.ndarray, labels: np.ndarray, R: np.ndarray) -> float:
    # sum_a <b|R_a|b> over columns b labelled a
    diag = np.einsum("ik,aij,jk->ak", basis.conj(), R, basis).real
    return float(diag[labels, np.arange(len(labels))].sum())


def _improve(basis: np.ndarray, labels: np.ndarray, R: np.ndarray):
    """Best of the incumbent and eigenbasis assignments, then exact pair moves."""
    best = (_score(basis, labels, R), basis, labels)
    for a_star in range(R.shape[0]):
        _, vecs = np.linalg.eigh(R[a_star])
        diag = np.einsum("ik,aij,jk->ak", vecs.conj(), R, vecs).real
        cand = np.argmax(diag, axis=0)
        sc = _score(vecs, cand, R)
        if sc > best[0] + MONOTONE_TOL:
            best = (sc, vecs, cand)
    score, basis, labels = best
    basis, labels = basis.copy(), labels.copy()
    for _ in range(8):
        moved = False
        for a in range(R.shape[0]):
            for b in range(a + 1, R.shape[0]):
                cols = np.flatnonzero((labels == a) | (labels == b))
                if len(cols) == 0:
                    continue
                v = basis[:, cols]
                m = v.conj().T @ (R[a] - R[b]) @ v
                lam, w = np.linalg.eigh((m + m.conj().T) / 2)
                new_basis = basis.copy()
                new_basis[:, cols] = v @ w
                new_labels = labels.copy()
                new_labels[cols] = np.where(lam > 0, a, b)
                sc = _score(new_basis, new_labels, R)
                if sc > score + MONOTONE_TOL:
                    score, basis, labels, moved = sc, new_basis, new_labels, True
        if not moved:
            break
    return basis, labels


def _random_measurement(rng: np.random.Generator, dim: int, n_out: int):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q, rng.integers(0, n_out, size=dim)


def _run(prob: _Problem, config: SeesawConfig, ss: np.random.SeedSequence):
    rng = np.random.Generator(np.random.Philox(ss))
    k = prob.k
    nq = [len(prob.qindex[i]) for i in range(k)]
    bases = [[_random_measurement(rng, prob.dims[i], prob.nans[i]) for _ in range(nq[i])]
             for i in range(k)]
    meas = [[_projectors(b, l, prob.nans[i]) for b, l in bases[i]] for i in range(k)]
    trace = []
    psi = None
    for _ in range(config.max_sweeps):
        value, psi = _principal(prob.omega(meas))
        if not trace:
            trace.append(value)
        rho_t = np.outer(psi, psi.conj()).reshape(prob.dims * 2)
        for i in range(k):
            for x in range(nq[i]):
                R = prob.rewards(rho_t, meas, i, x)
                b, l = _improve(*bases[i][x], R)
                bases[i][x] = (b, l)
                meas[i][x] = _projectors(b, l, prob.nans[i])
        omega = prob.omega(meas)
        value = float(np.real(psi.conj() @ omega @ psi))
        if value < trace[-1] - 1e-9:
            raise NumericalError(f"see-saw value dropped from {trace[-1]} to {value}")
        trace.append(value)
        if trace[-1] - trace[-2] < config.tol:
            break
    return trace, psi, meas


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _to_strategy(game: Game, qubits, psi: np.ndarray, meas) -> Strategy:
    parties = _PARTIES[game.n_players]
    owners = tuple(tuple(f"{p}{j}" for j in range(1, n + 1)) for p, n in zip(parties, qubits))
    state = StateVector(tuple(r for o in owners for r in o), psi / np.linalg.norm(psi))
    maps = []
    for i, qs in enumerate(game.questions):
        maps.append({q: ProjectiveMeasurement(owners[i], tuple(zip(game.answers[i], meas[i][x])))
                     for x, q in enumerate(qs)})
    return Strategy(state, owners, tuple(maps))


def seesaw_optimize(game: Game, config: SeesawConfig, dense_limit: int = DENSE_LIMIT) -> SeesawResult:
    """Best strategy found over ``config.restarts`` seeded restarts."""
    if len(config.qubits) != game.n_players:
        raise ValueError(f"need {game.n_players} qubit counts, got {len(config.qubits)}")
    if game.n_players not in _PARTIES:
        raise ValueError("see-saw supports one to three players")
    if sum(config.qubits) > dense_limit:
        raise ValueError(f"{sum(config.qubits)} qubits exceeds dense limit {dense_limit}")
    prob = _Problem(game, config.qubits)
    seqs = np.random.SeedSequence(config.seed).spawn(config.restarts)
    n = _threads()
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            runs = list(pool.map(lambda ss: _run(prob, config, ss), seqs))
    else:
        runs = [_run(prob, config, ss) for ss in seqs]
    # first restart wins ties, whatever order the threads finished in
    best = max(range(len(runs)), key=lambda r: (runs[r][0][-1], -r))
    trace, psi, meas = runs[best]
    strategy = _to_strategy(game, config.qubits, psi, meas)
    return SeesawResult(trace[-1], strategy, tuple(trace), config.seed, best,
                        tuple(tuple(r[0]) for r in runs))
