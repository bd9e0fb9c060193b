"""Dense finite-dimensional quantum mechanics on named qubit registers.

Qubit index 0 of an amplitude vector is the most significant bit; register
order in a :class:`StateVector` fixes the tensor layout.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

NORM_TOL = 1e-12
OP_TOL = 1e-10
ENTROPY_CUTOFF = 1e-14


class DimensionError(ValueError):
    """Operator/state sizes do not match, or a dense limit is exceeded."""


class NumericalError(RuntimeError):
    """A numerical invariant was breached beyond tolerance."""


_REG_RE = re.compile(r"^([VAB])('?)(\d+)$")
_PARTY_RANK = {"V": 0, "A": 1, "B": 2}


def register_sort_key(reg: str):
    """Canonical order: V, A, B; numeric label order; primed ancilla block last."""
    m = _REG_RE.match(reg)
    if m is None:
        return (3, 0, 0, reg)
    party, prime, num = m.groups()
    return (_PARTY_RANK[party], 1 if prime else 0, int(num), reg)


def canonical_order(registers: Sequence[str]) -> tuple[str, ...]:
    return tuple(sorted(registers, key=register_sort_key))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateVector:
    registers: tuple[str, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        regs = tuple(self.registers)
        if len(set(regs)) != len(regs):
            raise ValueError(f"duplicate register identifier in {regs}")
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape[0] != 2 ** len(regs):
            raise DimensionError(
                f"{len(regs)} registers need {2 ** len(regs)} amplitudes, got {amps.shape[0]}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise NumericalError(f"state norm {norm!r} differs from 1")
        object.__setattr__(self, "registers", regs)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return len(self.registers)

    def positions(self, targets: Sequence[str]) -> list[int]:
        index = {r: i for i, r in enumerate(self.registers)}
        try:
            return [index[t] for t in targets]
        except KeyError as exc:
            raise KeyError(f"unknown register {exc.args[0]!r}") from None

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def reorder(self, registers: Sequence[str]) -> "StateVector":
        registers = tuple(registers)
        if sorted(registers) != sorted(self.registers):
            raise ValueError("reorder needs a permutation of the state's registers")
        if registers == self.registers:
            return self
        perm = self.positions(registers)
        amps = np.transpose(self.tensor_view(), perm).reshape(-1)
        return StateVector(registers, amps)


@dataclass(frozen=True)
class DenseOperator:
    """Complex matrix on ``log2(dim)`` qubits.

    ``kind`` may flag the operator as ``"unitary"``, ``"projector"`` or
    ``"observable"`` (Hermitian involution); the flag is checked on construction.
    """

    matrix: np.ndarray
    kind: str | None = None
    _perm: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        dim = m.shape[0]
        if dim & (dim - 1):
            raise DimensionError(f"operator dimension {dim} is not a power of two")
        object.__setattr__(self, "matrix", m)
        eye = np.eye(dim)
        if self.kind == "unitary":
            if not np.allclose(m.conj().T @ m, eye, rtol=0, atol=OP_TOL):
                raise ValueError("operator flagged unitary is not unitary")
        elif self.kind == "projector":
            if not (
                np.allclose(m, m.conj().T, rtol=0, atol=OP_TOL)
                and np.allclose(m @ m, m, rtol=0, atol=OP_TOL)
            ):
                raise ValueError("operator flagged projector is not a projector")
        elif self.kind == "observable":
            if not (
                np.allclose(m, m.conj().T, rtol=0, atol=OP_TOL)
                and np.allclose(m @ m, eye, rtol=0, atol=OP_TOL)
            ):
                raise ValueError("operator flagged observable is not a binary observable")
        elif self.kind is not None:
            raise ValueError(f"unknown operator kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @property
    def permutation(self) -> np.ndarray | None:
        """``p`` with ``U|i> = |p[i]>`` if the matrix is a 0/1 permutation, else None."""
        if self._perm is None:
            m = self.matrix
            cols = np.argmax(np.abs(m), axis=0)
            ok = (
                np.array_equal(np.sort(cols), np.arange(self.dim))
                and np.count_nonzero(m) == self.dim
                and np.all(m[cols, np.arange(self.dim)] == 1)
            )
            object.__setattr__(self, "_perm", cols if ok else False)
        return self._perm if self._perm is not False else None

    def dagger(self) -> "DenseOperator":
        kind = self.kind if self.kind in ("unitary", "projector", "observable") else None
        return DenseOperator(self.matrix.conj().T, kind)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.matrix @ other.matrix)


def kron(*mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m.matrix if isinstance(m, DenseOperator) else m)
    return out


I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


def controlled(op, kind: str | None = "unitary") -> DenseOperator:
    """Block-diagonal ``|0><0| (x) I + |1><1| (x) op``; the control is the first target."""
    m = op.matrix if isinstance(op, DenseOperator) else np.asarray(op, dtype=complex)
    d = m.shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    out[:d, :d] = np.eye(d)
    out[d:, d:] = m
    return DenseOperator(out, kind)


def basis_state(registers: Sequence[str], bits: Sequence[int]) -> StateVector:
    n = len(registers)
    amps = np.zeros(2**n, dtype=complex)
    amps[int("".join(str(b) for b in bits) or "0", 2)] = 1.0
    return StateVector(tuple(registers), amps)


def epr(r1: str, r2: str) -> StateVector:
    return StateVector((r1, r2), np.array([1, 0, 0, 1]) / np.sqrt(2))


def ghz(r1: str, r2: str, r3: str) -> StateVector:
    amps = np.zeros(8)
    amps[0] = amps[7] = 1 / np.sqrt(2)
    return StateVector((r1, r2, r3), amps)


def tensor(states: Sequence[StateVector]) -> StateVector:
    regs: list[str] = []
    amps = np.ones(1, dtype=complex)
    for s in states:
        regs.extend(s.registers)
        amps = np.kron(amps, s.amplitudes)
    if len(set(regs)) != len(regs):
        raise ValueError("duplicate register identifier across tensor factors")
    return StateVector(tuple(regs), amps)


def apply_array(amplitudes: np.ndarray, n_qubits: int, op: DenseOperator,
                positions: Sequence[int]) -> np.ndarray:
    """Apply ``op`` to the qubits at ``positions`` of a raw amplitude vector."""
    k = len(positions)
    if op.dim != 2**k:
        raise DimensionError(f"operator on {op.n_qubits} qubits applied to {k} targets")
    if len(set(positions)) != k:
        raise ValueError("repeated target qubit")
    psi = np.moveaxis(np.asarray(amplitudes).reshape((2,) * n_qubits), list(positions),
                      list(range(k)))
    shape = psi.shape
    flat = psi.reshape(2**k, -1)
    perm = op.permutation
    if perm is not None:
        out = np.empty_like(flat)
        out[perm] = flat
    else:
        out = op.matrix @ flat
    out = np.moveaxis(out.reshape(shape), list(range(k)), list(positions))
    return out.reshape(-1)


def apply(state: StateVector, op: DenseOperator, targets: Sequence[str]) -> StateVector:
    """Apply a norm-preserving operator; use :func:`apply_array` for anything else."""
    amps = apply_array(state.amplitudes, state.n_qubits, op, state.positions(targets))
    return StateVector(state.registers, amps)


def expectation(state: StateVector, op: DenseOperator, targets: Sequence[str]) -> complex:
    out = apply_array(state.amplitudes, state.n_qubits, op, state.positions(targets))
    return complex(np.vdot(state.amplitudes, out))


def born_probability(state: StateVector, projector: DenseOperator,
                     targets: Sequence[str]) -> float:
    if projector.kind != "projector":
        projector = DenseOperator(projector.matrix, "projector")
    p = expectation(state, projector, targets).real
    if p < -NORM_TOL or p > 1 + NORM_TOL:
        raise NumericalError(f"Born probability {p} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def reduced_density(state: StateVector, keep: Sequence[str]) -> np.ndarray:
    """Partial trace onto ``keep``; the result is indexed in the order of ``keep``."""
    keep = list(keep)
    if not keep or len(keep) >= state.n_qubits:
        raise ValueError("keep must be a nonempty proper subset of the registers")
    return reduced_density_array(state.amplitudes, state.n_qubits, state.positions(keep))


def reduced_density_array(amplitudes: np.ndarray, n_qubits: int,
                          positions: Sequence[int]) -> np.ndarray:
    k = len(positions)
    psi = np.moveaxis(np.asarray(amplitudes).reshape((2,) * n_qubits), list(positions),
                      list(range(k)))
    m = psi.reshape(2**k, -1)
    return m @ m.conj().T


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits."""
    rho = np.asarray(rho)
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise ValueError("density matrix must have unit trace")
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if evals.min() < -1e-8:
        raise ValueError(f"density matrix has negative eigenvalue {evals.min()}")
    ev = evals[evals > ENTROPY_CUTOFF]
    return max(float(-np.sum(ev * np.log2(ev))), 0.0)


def embed(op: DenseOperator, op_targets: Sequence[str], targets: Sequence[str]) -> DenseOperator:
    """Express ``op`` (acting on ``op_targets``) as an operator on the larger ``targets``."""
    targets = list(targets)
    missing = set(op_targets) - set(targets)
    if missing:
        raise DimensionError(f"targets lack {sorted(missing)}")
    n = len(targets)
    eye = np.eye(2**n, dtype=complex)
    pos = [targets.index(t) for t in op_targets]
    cols = [apply_array(eye[:, i], n, op, pos) for i in range(2**n)]
    return DenseOperator(np.stack(cols, axis=1))


def state_dependent_distance(R: DenseOperator, S: DenseOperator, state: StateVector,
                             targets: Sequence[str]) -> float:
    """``|| (R - S) (x) I |psi> ||``."""
    if R.dim != S.dim:
        raise DimensionError("R and S have different dimensions")
    diff = DenseOperator(R.matrix - S.matrix)
    out = apply_array(state.amplitudes, state.n_qubits, diff, state.positions(targets))
    return float(np.linalg.norm(out))


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Labelled projectors on ``targets``, optionally preceded by unitaries.

    ``pre`` is a sequence of ``(unitary, registers)`` gates applied before the
    projectors; the effective measurement is ``U^dag P U``.
    """

    targets: tuple[str, ...]
    outcomes: tuple[tuple[object, np.ndarray], ...]
    pre: tuple[tuple[DenseOperator, tuple[str, ...]], ...] = ()

    def __post_init__(self):
        targets = tuple(self.targets)
        d = 2 ** len(targets)
        outs = []
        for label, proj in self.outcomes:
            p = _frozen(proj.matrix if isinstance(proj, DenseOperator) else proj)
            if p.shape != (d, d):
                raise DimensionError(f"projector for {label!r} has shape {p.shape}, need {(d, d)}")
            outs.append((label, p))
        labels = [lab for lab, _ in outs]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate outcome label")
        total = sum((p for _, p in outs), np.zeros((d, d), dtype=complex))
        if not np.allclose(total, np.eye(d), rtol=0, atol=OP_TOL):
            raise ValueError("projectors do not sum to the identity")
        for i, (_, p) in enumerate(outs):
            if not np.allclose(p, p.conj().T, rtol=0, atol=OP_TOL):
                raise ValueError("projector is not self-adjoint")
            for _, q in outs[i:]:
                target = p if q is p else np.zeros_like(p)
                if not np.allclose(p @ q, target, rtol=0, atol=OP_TOL):
                    raise ValueError("projectors are not orthogonal idempotents")
        pre = tuple((u, tuple(r)) for u, r in self.pre)
        for u, regs in pre:
            if u.dim != 2 ** len(regs):
                raise DimensionError("pre-measurement unitary does not match its registers")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "outcomes", tuple(outs))
        object.__setattr__(self, "pre", pre)

    @property
    def labels(self) -> tuple:
        return tuple(lab for lab, _ in self.outcomes)

    @property
    def registers(self) -> tuple[str, ...]:
        """Every register the measurement touches (pre-unitaries included)."""
        regs = list(self.targets)
        for _, r in self.pre:
            regs.extend(x for x in r if x not in regs)
        return canonical_order(set(regs))

    def projector(self, label) -> np.ndarray:
        for lab, p in self.outcomes:
            if lab == label:
                return p
        raise KeyError(label)

    def compiled(self, registers: Sequence[str] | None = None) -> dict:
        """Effective projectors ``U^dag P U`` on ``registers`` (default: all touched)."""
        regs = list(registers or self.registers)
        n = len(regs)
        u = np.eye(2**n, dtype=complex)
        for gate, gregs in self.pre:
            g = embed(gate, gregs, regs).matrix
            u = g @ u
        out = {}
        for label, p in self.outcomes:
            pe = embed(DenseOperator(p), self.targets, regs).matrix
            out[label] = u.conj().T @ pe @ u
        return out

    def observable(self, weight, registers: Sequence[str] | None = None) -> DenseOperator:
        """``sum_label weight(label) * P_label`` as a compiled operator."""
        comp = self.compiled(registers)
        m = sum(weight(lab) * p for lab, p in comp.items())
        return DenseOperator(m)
