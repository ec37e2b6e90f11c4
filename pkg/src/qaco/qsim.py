"""Dense statevector simulation of the reversible gate set used by the ant colony circuits.

Basis convention: qubit ``k`` contributes bit ``k`` of the basis index, so qubit 0 is the
least significant bit.  A ket written ``|10>`` therefore means qubit 1 = 1, qubit 0 = 0.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

X = "X"
H = "H"
CNOT = "CNOT"
CCNOT = "CCNOT"
MCT = "MCT"
CPHASE = "CPHASE"
RESET = "RESET"
MEASURE = "MEASURE"

GATE_KINDS = (X, H, CNOT, CCNOT, MCT, CPHASE, RESET, MEASURE)
_CONTROLLED_NOT = {CNOT: 1, CCNOT: 2}

ZERO_TOL = 1e-12
MAX_QUBITS = 26


class CircuitError(ValueError):
    """Invalid gate or circuit (bad indices, wrong control count, size mismatch)."""


class ResetError(RuntimeError):
    """Branchwise reset found a qubit that is genuinely superposed within a branch."""

    def __init__(self, qubit: int, index0: int, index1: int):
        super().__init__(
            f"cannot reset qubit {qubit}: basis indices {index0} and {index1} "
            "both carry amplitude"
        )
        self.qubit = qubit
        self.indices = (index0, index1)


class SimulatorLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class GateOp:
    kind: str
    target: int
    controls: tuple[int, ...] = ()
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        n_ctrl = len(self.controls)
        if self.kind in _CONTROLLED_NOT and n_ctrl != _CONTROLLED_NOT[self.kind]:
            raise CircuitError(f"{self.kind} needs {_CONTROLLED_NOT[self.kind]} controls, got {n_ctrl}")
        if self.kind == MCT and n_ctrl < 1:
            raise CircuitError("MCT needs at least one control")
        if self.kind == CPHASE:
            if n_ctrl != 1:
                raise CircuitError("CPHASE takes exactly one control")
            if self.angle is None:
                raise CircuitError("CPHASE needs an angle")
        if self.kind in (X, H, RESET, MEASURE) and n_ctrl:
            raise CircuitError(f"{self.kind} takes no controls")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + (self.target,)

    def validate(self, qubit_count: int) -> None:
        qs = self.qubits
        if len(set(qs)) != len(qs):
            raise CircuitError(f"duplicate qubit indices in {self}")
        for q in qs:
            if not 0 <= q < qubit_count:
                raise CircuitError(f"qubit index {q} out of range for {qubit_count} qubits")


def controlled_not(controls: Sequence[int], target: int) -> GateOp:
    """X on ``target`` conditioned on all ``controls``; the kind follows the control count."""
    controls = tuple(controls)
    kind = {0: X, 1: CNOT, 2: CCNOT}.get(len(controls), MCT)
    return GateOp(kind, target, controls)


@dataclass
class Circuit:
    qubit_count: int
    ops: list[GateOp] = field(default_factory=list)

    def __post_init__(self):
        for op in self.ops:
            op.validate(self.qubit_count)

    def append(self, op: GateOp) -> "Circuit":
        op.validate(self.qubit_count)
        self.ops.append(op)
        return self

    def extend(self, ops: Iterable[GateOp] | "Circuit") -> "Circuit":
        if isinstance(ops, Circuit):
            if ops.qubit_count > self.qubit_count:
                raise CircuitError("cannot extend with a wider circuit")
            ops = ops.ops
        for op in ops:
            self.append(op)
        return self

    def x(self, *qubits: int) -> "Circuit":
        for q in qubits:
            self.append(GateOp(X, q))
        return self

    def h(self, *qubits: int) -> "Circuit":
        for q in qubits:
            self.append(GateOp(H, q))
        return self

    def mct(self, controls: Sequence[int], target: int) -> "Circuit":
        return self.append(controlled_not(controls, target))

    def cx(self, control: int, target: int) -> "Circuit":
        return self.append(GateOp(CNOT, target, (control,)))

    def ccx(self, c0: int, c1: int, target: int) -> "Circuit":
        return self.append(GateOp(CCNOT, target, (c0, c1)))

    def cphase(self, control: int, target: int, angle: float) -> "Circuit":
        return self.append(GateOp(CPHASE, target, (control,), float(angle)))

    def reset(self, *qubits: int) -> "Circuit":
        for q in qubits:
            self.append(GateOp(RESET, q))
        return self

    def measure(self, *qubits: int) -> "Circuit":
        for q in qubits:
            self.append(GateOp(MEASURE, q))
        return self

    def __len__(self):
        return len(self.ops)


class QuantumState:
    """Normalised amplitude vector over ``2**qubit_count`` basis states."""

    def __init__(self, qubit_count: int, amplitudes: np.ndarray | None = None):
        if qubit_count < 1:
            raise CircuitError("need at least one qubit")
        if qubit_count > MAX_QUBITS:
            raise SimulatorLimitError(f"{qubit_count} qubits exceeds the {MAX_QUBITS}-qubit limit")
        self.qubit_count = qubit_count
        if amplitudes is None:
            amplitudes = np.zeros(2**qubit_count, dtype=np.complex128)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.array(amplitudes, dtype=np.complex128)
            if amplitudes.shape != (2**qubit_count,):
                raise CircuitError(
                    f"expected {2**qubit_count} amplitudes, got shape {amplitudes.shape}"
                )
        self.amplitudes = amplitudes

    @classmethod
    def basis(cls, qubit_count: int, index: int) -> "QuantumState":
        amps = np.zeros(2**qubit_count, dtype=np.complex128)
        amps[index] = 1.0
        return cls(qubit_count, amps)

    def copy(self) -> "QuantumState":
        return QuantumState(self.qubit_count, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def nonzero(self, tol: float = ZERO_TOL) -> np.ndarray:
        return np.flatnonzero(np.abs(self.amplitudes) > tol)

    def _tensor(self) -> np.ndarray:
        # C-order reshape: axis 0 is the most significant bit, i.e. the highest qubit
        return self.amplitudes.reshape((2,) * self.qubit_count)

    def _axis(self, qubit: int) -> int:
        return self.qubit_count - 1 - qubit

    def __repr__(self):
        return f"QuantumState(qubit_count={self.qubit_count}, nonzero={len(self.nonzero())})"


def _check_state_op(state: QuantumState, op: GateOp) -> None:
    op.validate(state.qubit_count)


def _slices(state: QuantumState, fixed: dict[int, int]) -> list:
    sl = [slice(None)] * state.qubit_count
    for q, v in fixed.items():
        sl[state._axis(q)] = v
    return sl


def _apply_inplace(state: QuantumState, op: GateOp) -> None:
    psi = state._tensor()
    kind = op.kind
    if kind == H:
        s0 = tuple(_slices(state, {op.target: 0}))
        s1 = tuple(_slices(state, {op.target: 1}))
        a, b = psi[s0].copy(), psi[s1].copy()
        psi[s0] = (a + b) / np.sqrt(2.0)
        psi[s1] = (a - b) / np.sqrt(2.0)
    elif kind in (X, CNOT, CCNOT, MCT):
        fixed = {c: 1 for c in op.controls}
        s0 = tuple(_slices(state, {**fixed, op.target: 0}))
        s1 = tuple(_slices(state, {**fixed, op.target: 1}))
        tmp = psi[s0].copy()
        psi[s0] = psi[s1]
        psi[s1] = tmp
    elif kind == CPHASE:
        s11 = tuple(_slices(state, {op.controls[0]: 1, op.target: 1}))
        psi[s11] *= np.exp(1j * op.angle)
    else:
        raise CircuitError(f"{kind} is not a unitary gate; use branchwise_reset or measurement")


def apply_gate(state: QuantumState, op: GateOp) -> QuantumState:
    """Return a new state with ``op`` applied.  RESET and MEASURE are rejected here."""
    _check_state_op(state, op)
    out = state.copy()
    _apply_inplace(out, op)
    return out


def _reset_inplace(state: QuantumState, qubit: int, tol: float = ZERO_TOL) -> None:
    psi = state._tensor()
    s0 = tuple(_slices(state, {qubit: 0}))
    s1 = tuple(_slices(state, {qubit: 1}))
    zero, one = psi[s0], psi[s1]
    clash = (np.abs(zero) > tol) & (np.abs(one) > tol)
    if clash.any():
        amps = np.abs(state.amplitudes) > tol
        lows = np.flatnonzero(amps & ((np.arange(amps.size) >> qubit) & 1 == 0))
        i0 = int(next(i for i in lows if amps[i | (1 << qubit)]))
        raise ResetError(qubit, i0, i0 | (1 << qubit))
    psi[s0] = zero + one
    psi[s1] = 0.0


def branchwise_reset(state: QuantumState, qubit: int) -> QuantumState:
    """Move every branch to ``qubit = 0`` without changing its amplitude.

    Valid only when the qubit's value is a function of the remaining qubits in every
    nonzero branch; otherwise two branches would merge and :class:`ResetError` is raised.
    """
    GateOp(RESET, qubit).validate(state.qubit_count)
    out = state.copy()
    _reset_inplace(out, qubit)
    return out


def apply_circuit(state: QuantumState, circuit: Circuit) -> QuantumState:
    """Apply ``circuit`` in order.  MEASURE ops are terminal markers and leave the state alone."""
    if circuit.qubit_count != state.qubit_count:
        raise CircuitError(
            f"circuit has {circuit.qubit_count} qubits, state has {state.qubit_count}"
        )
    out = state.copy()
    for op in circuit.ops:
        _check_state_op(out, op)
        if op.kind == RESET:
            _reset_inplace(out, op.target)
        elif op.kind == MEASURE:
            continue
        else:
            _apply_inplace(out, op)
    return out


def _check_qubit_list(state: QuantumState, qubits: Sequence[int]) -> list[int]:
    qubits = [int(q) for q in qubits]
    if len(set(qubits)) != len(qubits):
        raise CircuitError("duplicate qubit indices")
    for q in qubits:
        if not 0 <= q < state.qubit_count:
            raise CircuitError(f"qubit index {q} out of range")
    return qubits


def outcome_probabilities(state: QuantumState, qubits: Sequence[int]) -> np.ndarray:
    """Marginal distribution over ``qubits``.

    Entry ``m`` is the probability of the pattern in which ``qubits[j]`` reads bit ``j`` of
    ``m``.  For the path register ``[p0, ..., p_{x-1}]`` the pattern index is the path id.
    """
    qubits = _check_qubit_list(state, qubits)
    probs = state.probabilities()
    idx = np.arange(probs.size)
    pattern = np.zeros(probs.size, dtype=np.int64)
    for j, q in enumerate(qubits):
        pattern |= ((idx >> q) & 1) << j
    return np.bincount(pattern, weights=probs, minlength=2 ** len(qubits))


def sample(state: QuantumState, qubits: Sequence[int], shots: int, seed: int) -> np.ndarray:
    """Measurement counts per pattern (same indexing as :func:`outcome_probabilities`)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = outcome_probabilities(state, qubits)
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    return rng.multinomial(shots, probs)


def pattern_bits(pattern: int, width: int) -> str:
    """Most-significant-first bit string, e.g. path 5 on 3 qubits -> ``'101'``."""
    return format(pattern, f"0{width}b")


@dataclass(frozen=True)
class GateMetrics:
    counts: dict[str, int]
    total_gates: int
    depth: int


def gate_metrics(circuit: Circuit) -> GateMetrics:
    """Gate counts and ASAP depth; ops share a layer only when their qubit sets are disjoint."""
    counts = Counter(op.kind for op in circuit.ops)
    frontier: dict[int, int] = {}
    depth = 0
    for op in circuit.ops:
        layer = 1 + max((frontier.get(q, 0) for q in op.qubits), default=0)
        for q in op.qubits:
            frontier[q] = layer
        depth = max(depth, layer)
    return GateMetrics(dict(sorted(counts.items())), sum(counts.values()), depth)


def decompose_mct(controls: Sequence[int], target: int, ancillas: Sequence[int]) -> list[GateOp]:
    """Toffoli ladder for a k-controlled NOT: compute the AND chain, copy, uncompute.

    Uses ``k - 1`` ancillas for ``k >= 3`` (assumed to start in |0>; they end in |0>).
    One and two controls map to a single CNOT / CCNOT.
    """
    controls = [int(c) for c in controls]
    ancillas = [int(a) for a in ancillas]
    k = len(controls)
    if k < 1:
        raise CircuitError("need at least one control")
    if len(set(controls + [target])) != k + 1:
        raise CircuitError("controls and target must be distinct")
    if k <= 2:
        return [controlled_not(controls, target)]
    if len(ancillas) < k - 1:
        raise CircuitError(f"{k} controls need {k - 1} ancillas, got {len(ancillas)}")
    anc = ancillas[: k - 1]
    if set(anc) & set(controls + [target]) or len(set(anc)) != len(anc):
        raise CircuitError("ancillas overlap controls/target")
    compute = [GateOp(CCNOT, anc[0], (controls[0], controls[1]))]
    for i in range(2, k):
        compute.append(GateOp(CCNOT, anc[i - 1], (anc[i - 2], controls[i])))
    return compute + [GateOp(CNOT, target, (anc[-1],))] + compute[::-1]


def ancillas_needed(circuit: Circuit) -> int:
    return max((len(op.controls) - 1 for op in circuit.ops if op.kind == MCT), default=0)


def decompose_circuit(circuit: Circuit) -> Circuit:
    """Widen ``circuit`` with an ancilla pool appended after its qubits and expand every MCT."""
    n_anc = ancillas_needed(circuit)
    pool = list(range(circuit.qubit_count, circuit.qubit_count + n_anc))
    out = Circuit(circuit.qubit_count + n_anc)
    for op in circuit.ops:
        if op.kind == MCT:
            out.extend(decompose_mct(op.controls, op.target, pool))
        else:
            out.append(op)
    return out
