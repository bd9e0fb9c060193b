"""Entropy/dimension bound for approximate embezzlement and rigidity diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .games import MainQuestion
from .pauli import MS_QUESTIONS
from .qcore import DenseOperator, P0, P1, X, Z, apply_array, kron
from .strategies import Strategy

CAP = 1 / (4 * math.e**2)
MAX_EXPONENT_DIGITS = 4000


@dataclass(frozen=True)
class BoundInput:
    S: float
    t: int
    base: float = 2.0

    def __post_init__(self):
        if not self.S >= 1:
            raise ValueError(f"entropy S = {self.S} is below 1")
        if int(self.t) != self.t or self.t < 2:
            raise ValueError(f"ancilla dimension t = {self.t} must be an integer >= 2")
        if not self.base > 1:
            raise ValueError("log base must exceed 1")


def _log(x: int, base: float) -> float:
    if base == 2:
        return math.log2(x)
    return math.log(x) / math.log(base)


def emb_bound(inp: BoundInput | float, t: int | None = None, base: float = 2.0) -> float:
    """``min(1/(4e^2), S^2 / (16 log^2(3t)))``.

    Accepts a :class:`BoundInput` or the pair ``S, t``.
    """
    if not isinstance(inp, BoundInput):
        inp = BoundInput(float(inp), t, base)
    lg = _log(3 * int(inp.t), inp.base)
    return min(CAP, inp.S**2 / (16 * lg**2))


def dim_lower_bound(delta: float, S: float = 1.0, base: float = 2.0) -> int:
    """Smallest ``t`` with ``S^2 / (16 log^2(3t)) <= delta``."""
    if not 0 < delta < CAP:
        raise ValueError(f"delta must lie in (0, 1/(4e^2)) = (0, {CAP:.6f})")
    if S < 1:
        raise ValueError(f"entropy S = {S} is below 1")
    # base^e overflows floats quickly; work with enough digits for an exact ceiling
    d, s = mpmath.mpf(repr(delta)), mpmath.mpf(repr(S))
    b = mpmath.e if base == math.e else mpmath.mpf(repr(base))
    with mpmath.workdps(30):
        digits = float(s / (4 * mpmath.sqrt(d)) * mpmath.log10(b))
    if digits > MAX_EXPONENT_DIGITS:
        raise OverflowError(f"t_min is about 10^{digits:.0f}")
    with mpmath.workdps(int(digits) + 40):
        target = b ** (s / (4 * mpmath.sqrt(d)))
        t = int(mpmath.ceil(target / 3))
        while 3 * t < target:
            t += 1
        while t > 1 and 3 * (t - 1) >= target:
            t -= 1
    return t


def qubits_for(t: int) -> int:
    """``ceil(log2 t)``."""
    return (int(t) - 1).bit_length()


def soundness_observables() -> tuple[DenseOperator, DenseOperator]:
    """``R_AB`` on ``(A1, A2, B1)`` and ``Pi'_V`` on ``(V1, V2)``."""
    r_ab = kron(Z, P0, np.eye(2)) + kron(X, P1, X)
    pi_v = kron(Z, P0) + kron(X, P1)
    return DenseOperator(r_ab, "observable"), DenseOperator(pi_v, "observable")


def _residual(state, terms) -> float:
    """``|| sum_k c_k O_k psi ||`` for ``terms = [(c, [(op, regs), ...]), ...]``."""
    amps, n = state.amplitudes, state.n_qubits
    out = np.zeros_like(amps)
    for c, ops in terms:
        v = amps
        for op, regs in ops:
            v = apply_array(v, n, op, state.positions(regs))
        out = out + c * v
    return float(np.linalg.norm(out))


def _u_observable(strategy: Strategy, w: str):
    m = strategy.measurements[0][MainQuestion(1, w)]
    regs = m.registers
    return m.observable(lambda lab: (-1) ** lab[0], regs), regs


def rigidity_diagnostics(strategy: Strategy) -> dict[str, float]:
    """Raw state-dependent distances for a main-game strategy.

    ``Pi_w`` is the +-1 observable of P_V's ``u`` bit on question ``(1, w)``
    and ``Z1`` the observable of its second ``v`` bit on ``(1, r2)``.
    """
    state = strategy.state
    r_ab, pi_v = soundness_observables()
    ab = ("A1", "A2", "B1")
    out = {}
    pis = {w: _u_observable(strategy, w) for w in MS_QUESTIONS}
    for w, (op, regs) in pis.items():
        out[f"pi_rab[{w}]"] = _residual(state, [(1, [(op, regs), (r_ab, ab)]), (-1, [])])
    z1 = strategy.measurements[0][MainQuestion(1, "r2")]
    z_op = z1.observable(lambda lab: lab[1][1], z1.registers)
    sz = DenseOperator(Z, "observable")
    out["z1_vs_zv2"] = _residual(state, [(1, [(z_op, z1.registers)]), (-1, [(sz, ("V2",))])])
    for i, w in enumerate(MS_QUESTIONS):
        for w2 in MS_QUESTIONS[i + 1:]:
            (a, ra), (b, rb) = pis[w], pis[w2]
            out[f"pi_diff[{w},{w2}]"] = _residual(state, [(1, [(a, ra)]), (-1, [(b, rb)])])
    out["pi_v_rab"] = _residual(state, [(1, [(pi_v, ("V1", "V2")), (r_ab, ab)]), (-1, [])])
    return out
