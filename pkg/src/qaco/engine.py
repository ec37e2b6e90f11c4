"""Quantum ant colony circuits: initialisation, path selection, guarded pheromone updates,
trace extraction, marking and amplitude amplification.

Register order follows the algorithm's listing: path qubits p0..p_{x-1}, ancillas a1 and
a2, box qubits ph0..ph_{d-1}, the marking target, and (corrected guard only) one extra
guard ancilla.  Path ids read p_{x-1} as the most significant bit, which coincides with
the low ``x`` bits of the simulator's basis index.  Box values read ph0 as the MSB.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from . import qsim
from .oracle import box_bits_string, box_order
from .qsim import Circuit, QuantumState

INF = math.inf

EVAPORATION_POLICIES = ("verbatim", "period", "none")
GUARD_MODES = ("verbatim", "corrected")
MARKING_MODES = ("verbatim_msb", "flag_z")
STOP_RULES = ("fixed_k", "first_full")


class InstanceError(ValueError):
    pass


class TraceError(RuntimeError):
    """The state no longer carries exactly one box value per path."""


@dataclass(frozen=True)
class EngineModes:
    evaporation_policy: str = "none"
    evaporation_period: int = 1
    guard_mode: str = "corrected"
    marking_mode: str = "flag_z"
    stop_rule: str = "first_full"
    grover_iterations: int = 1

    def __post_init__(self):
        if self.evaporation_policy not in EVAPORATION_POLICIES:
            raise InstanceError(f"unknown evaporation policy {self.evaporation_policy!r}")
        if self.evaporation_policy == "period" and self.evaporation_period < 1:
            raise InstanceError("evaporation period must be >= 1")
        if self.guard_mode not in GUARD_MODES:
            raise InstanceError(f"unknown guard mode {self.guard_mode!r}")
        if self.marking_mode not in MARKING_MODES:
            raise InstanceError(f"unknown marking mode {self.marking_mode!r}")
        if self.stop_rule not in STOP_RULES:
            raise InstanceError(f"unknown stop rule {self.stop_rule!r}")
        if self.grover_iterations < 0:
            raise InstanceError("grover_iterations must be >= 0")

    def evaporates_at(self, t: int) -> bool:
        if self.evaporation_policy == "verbatim":
            return True
        if self.evaporation_policy == "period":
            return t % self.evaporation_period == 0
        return False

    @property
    def policy_label(self) -> str:
        if self.evaporation_policy == "period":
            return f"period:{self.evaporation_period}"
        return self.evaporation_policy


def parse_policy(text: str) -> tuple[str, int]:
    """``'verbatim' | 'none' | 'period:<E>'`` -> (policy, period)."""
    text = text.strip()
    if text in ("verbatim", "none"):
        return text, 1
    if text.startswith("period:"):
        try:
            period = int(text.split(":", 1)[1])
        except ValueError:
            raise InstanceError(f"bad evaporation period in {text!r}") from None
        if period < 1:
            raise InstanceError("evaporation period must be >= 1")
        return "period", period
    raise InstanceError(f"unknown evaporation policy {text!r}")


@dataclass(frozen=True)
class ProblemInstance:
    n: int
    weights: tuple[float, ...]
    K: int
    d: int = 4
    modes: EngineModes = field(default_factory=EngineModes)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(_as_weight(w) for w in self.weights))
        if self.n < 2:
            raise InstanceError("need at least 2 paths")
        if len(self.weights) != self.n:
            raise InstanceError(f"{len(self.weights)} weights given for n={self.n}")
        if self.K < 1:
            raise InstanceError("iteration budget K must be >= 1")
        if self.d < 2:
            raise InstanceError("pheromone box needs d >= 2")

    @property
    def x(self) -> int:
        return max(1, math.ceil(math.log2(self.n)))

    @property
    def padded_weights(self) -> tuple[float, ...]:
        return self.weights + (INF,) * (2**self.x - self.n)


def _as_weight(w) -> float:
    if isinstance(w, str) and w.strip().lower() in ("inf", "infinity", "∞"):
        return INF
    w = float(w)
    if math.isinf(w) and w > 0:
        return INF
    if not (w >= 1 and w == int(w)):
        raise InstanceError(f"weights must be integers >= 1 or inf, got {w}")
    return int(w)


def set_weight(instance: ProblemInstance, path_id: int, weight: float) -> ProblemInstance:
    """Replace one weight; ``inf`` removes the path from all later selections.

    Ids in the padding range ``n <= path_id < 2**x`` turn a dummy into a real path.
    """
    if not 0 <= path_id < 2**instance.x:
        raise InstanceError(f"path id {path_id} out of range")
    weights = list(instance.padded_weights)
    weights[path_id] = weight
    n = max(instance.n, path_id + 1)
    return replace(instance, n=n, weights=tuple(weights[:n]))


@dataclass(frozen=True)
class RegisterLayout:
    x: int
    d: int
    guard_ancilla: bool = False

    @property
    def path_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.x))

    @property
    def a1(self) -> int:
        return self.x

    @property
    def a2(self) -> int:
        return self.x + 1

    @property
    def box_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.x + 2, self.x + 2 + self.d))

    @property
    def target(self) -> int:
        return self.x + self.d + 2

    @property
    def guard(self) -> int:
        if not self.guard_ancilla:
            raise InstanceError("corrected guard needs the extra guard ancilla in the layout")
        return self.x + self.d + 3

    @property
    def qubit_count(self) -> int:
        return self.x + self.d + 3 + int(self.guard_ancilla)

    @property
    def ancillas(self) -> tuple[int, ...]:
        extra = (self.guard,) if self.guard_ancilla else ()
        return (self.a1, self.a2, self.target) + extra

    def path_of(self, index):
        return index & ((1 << self.x) - 1)

    def box_of(self, index):
        value = 0
        for q in self.box_qubits:
            value = (value << 1) | ((index >> q) & 1)
        return value


def layout_for(instance: ProblemInstance) -> RegisterLayout:
    return RegisterLayout(instance.x, instance.d, instance.modes.guard_mode == "corrected")


# --- circuit fragments -----------------------------------------------------------------


def init_circuit(layout: RegisterLayout) -> Circuit:
    return Circuit(layout.qubit_count).h(*layout.path_qubits)


def init_ant(instance: ProblemInstance) -> tuple[QuantumState, RegisterLayout]:
    layout = layout_for(instance)
    state = QuantumState(layout.qubit_count)
    return qsim.apply_circuit(state, init_circuit(layout)), layout


def select_paths(t: int, weights: Sequence[float]) -> set[int]:
    if t < 1:
        raise InstanceError("iterations start at t=1")
    return {i for i, w in enumerate(weights) if math.isfinite(w) and t % int(w) == 0}


def path_selector_fragment(path_id: int, layout: RegisterLayout) -> Circuit:
    """Raise a1 and a2 on the branch of ``path_id``; X gates mark its 0 bits."""
    if not 0 <= path_id < 2**layout.x:
        raise InstanceError(f"path id {path_id} needs more than {layout.x} path qubits")
    zeros = [q for q in layout.path_qubits if not (path_id >> q) & 1]
    c = Circuit(layout.qubit_count)
    c.x(*zeros)
    c.mct(layout.path_qubits, layout.a1)
    c.mct(layout.path_qubits, layout.a2)
    c.x(*zeros)
    return c


def pheromone_deposition_fragment(layout: RegisterLayout) -> Circuit:
    ph, a1 = layout.box_qubits, layout.a1
    c = Circuit(layout.qubit_count)
    for m in range(layout.d - 2, -1, -1):
        c.ccx(a1, ph[m], ph[m + 1])
    c.cx(a1, ph[0])
    return c


def pheromone_evaporation_fragment(layout: RegisterLayout) -> Circuit:
    ph, a2 = layout.box_qubits, layout.a2
    c = Circuit(layout.qubit_count)
    c.cx(a2, ph[0])
    for m in range(layout.d - 1):
        c.ccx(a2, ph[m], ph[m + 1])
    return c


def _empty_box_guard(c: Circuit, layout: RegisterLayout) -> None:
    c.x(*layout.box_qubits)
    c.mct(layout.box_qubits, layout.a2)
    c.x(*layout.box_qubits)


def update_pheromone_fragment(
    layout: RegisterLayout, guard_mode: str = "corrected", evaporate: bool = True
) -> Circuit:
    """Guarded deposition (on a1) followed by guarded evaporation (on a2).

    ``verbatim`` is the listed gate sequence.  ``corrected`` uses the guard ancilla g:

    * g = a1 AND full-box, then a1 ^= g, so a full selected box is not deposited on;
    * a2 is cleared on full boxes only where the path is unselected (a1 = g = 0), so a box
      that this very deposition filled is never evaporated;
    * the empty-box check is the same as in the listing.

    g remains a function of (path, box) and is cleared by the branchwise reset at the end
    of the iteration.  ``evaporate=False`` drops only the evaporation cascade.
    """
    ph = layout.box_qubits
    c = Circuit(layout.qubit_count)
    if guard_mode == "verbatim":
        c.mct(ph, layout.a1)
        c.extend(pheromone_deposition_fragment(layout))
        c.mct(ph, layout.a2)
        _empty_box_guard(c, layout)
    elif guard_mode == "corrected":
        g = layout.guard
        c.mct(ph + (layout.a1,), g)
        c.cx(g, layout.a1)
        c.extend(pheromone_deposition_fragment(layout))
        c.x(layout.a1, g)
        c.mct(ph + (layout.a1, g), layout.a2)
        c.x(layout.a1, g)
        _empty_box_guard(c, layout)
    else:
        raise InstanceError(f"unknown guard mode {guard_mode!r}")
    if evaporate:
        c.extend(pheromone_evaporation_fragment(layout))
    return c


def iteration_circuit(t: int, instance: ProblemInstance, layout: RegisterLayout | None = None) -> Circuit:
    """One ``ant_execute(t)`` step as a circuit, ending with the ancilla resets."""
    layout = layout or layout_for(instance)
    c = Circuit(layout.qubit_count)
    for i in sorted(select_paths(t, instance.padded_weights)):
        c.extend(path_selector_fragment(i, layout))
    c.x(layout.a2)
    c.extend(
        update_pheromone_fragment(
            layout, instance.modes.guard_mode, evaporate=instance.modes.evaporates_at(t)
        )
    )
    c.reset(layout.a1, layout.a2)
    if layout.guard_ancilla:
        c.reset(layout.guard)
    return c


def ant_execute(state: QuantumState, t: int, instance: ProblemInstance, layout: RegisterLayout) -> QuantumState:
    return qsim.apply_circuit(state, iteration_circuit(t, instance, layout))


def diffusion_circuit(layout: RegisterLayout) -> Circuit:
    """Inversion about the mean on the path register: H X (multi-controlled Z) X H."""
    p = layout.path_qubits
    c = Circuit(layout.qubit_count)
    c.h(*p).x(*p)
    *controls, last = p
    c.h(last)
    c.mct(controls, last)
    c.h(last)
    c.x(*p).h(*p)
    return c


def marking_circuit(layout: RegisterLayout, modes: EngineModes) -> Circuit:
    c = Circuit(layout.qubit_count)
    c.mct(layout.box_qubits, layout.target)
    if modes.marking_mode == "verbatim_msb":
        c.cphase(layout.target, layout.path_qubits[-1], math.pi)
    else:
        # Z on the flag qubit
        c.h(layout.target).x(layout.target).h(layout.target)
    return c


def amplification_circuit(layout: RegisterLayout, modes: EngineModes) -> Circuit:
    c = marking_circuit(layout, modes)
    for _ in range(modes.grover_iterations):
        c.extend(diffusion_circuit(layout))
    return c


def mark_and_amplify(state: QuantumState, layout: RegisterLayout, modes: EngineModes) -> QuantumState:
    return qsim.apply_circuit(state, amplification_circuit(layout, modes))


# --- trace -----------------------------------------------------------------------------


def box_values(state: QuantumState, layout: RegisterLayout) -> dict[int, int]:
    """Path id -> box value for a post-iteration state (ancillas reset)."""
    idx = state.nonzero()
    paths = layout.path_of(idx)
    if len(np.unique(paths)) != len(paths):
        dup = int(paths[np.argmax(np.bincount(paths))])
        raise TraceError(f"path {dup} carries more than one box value")
    mags = np.abs(state.amplitudes[idx])
    expected = 1.0 / math.sqrt(2**layout.x)
    if not np.allclose(mags, expected, atol=1e-9, rtol=0):
        raise TraceError("branch amplitudes are no longer uniform")
    return {int(p): int(layout.box_of(int(i))) for p, i in zip(paths, idx)}


def extract_trace(state: QuantumState, layout: RegisterLayout, t: int, n: int) -> list[tuple[int, int, int, str]]:
    boxes = box_values(state, layout)
    return [(t, i, boxes[i], box_bits_string(boxes[i], layout.d)) for i in range(n)]


def classical_trace(instance: ProblemInstance, t_max: int, events=None, stop_first_full=None):
    """Oracle trace for ``instance``; independent of the statevector."""
    from .oracle import classical_box_oracle

    if stop_first_full is None:
        stop_first_full = instance.modes.stop_rule == "first_full"
    return classical_box_oracle(
        instance.padded_weights,
        instance.d,
        t_max,
        guard_mode=instance.modes.guard_mode,
        evaporates_at=instance.modes.evaporates_at,
        n_real=instance.n,
        events=events,
        stop_first_full=stop_first_full,
    )


# --- full run --------------------------------------------------------------------------


@dataclass
class RunResult:
    converged_path: int | None
    convergence_iteration: int | None
    histogram: dict[str, float]
    trace: list[tuple[int, int, int, str]]
    metrics: qsim.GateMetrics | None
    counts: dict[str, int] = field(default_factory=dict)
    full_paths: tuple[int, ...] = ()
    iterations_run: int = 0
    probabilities: np.ndarray | None = None
    n: int = 0

    def argmax_patterns(self, tol: float = 1e-9) -> list[str]:
        """All patterns within ``tol`` of the maximal probability."""
        top = max(self.histogram.values())
        return [b for b, p in self.histogram.items() if p >= top - tol]


def _apply_events(instance, events, t):
    for path, w in (events or {}).get(t, ()):
        instance = set_weight(instance, path, w)
    return instance


def run_iterations(
    instance: ProblemInstance,
    events: Mapping[int, Sequence[tuple[int, float]]] | None = None,
    keep_circuits: bool = False,
):
    """Initialise and iterate up to K (or the first single full box).

    Returns ``(state, layout, trace, info)`` where ``info`` holds the convergence data and
    optionally the per-iteration circuits.
    """
    state, layout = init_ant(instance)
    full = 2**instance.d - 1
    n_report = instance.n
    trace = extract_trace(state, layout, 0, n_report)
    circuits = []
    first_t, first_full = None, ()
    t_done = 0
    for t in range(1, instance.K + 1):
        instance = _apply_events(instance, events, t)
        circ = iteration_circuit(t, instance, layout)
        if keep_circuits:
            circuits.append(circ)
        state = qsim.apply_circuit(state, circ)
        boxes = box_values(state, layout)
        trace.extend((t, i, boxes[i], box_bits_string(boxes[i], instance.d)) for i in range(n_report))
        t_done = t
        full_now = tuple(sorted(p for p, v in boxes.items() if v == full))
        if full_now and first_t is None:
            first_t, first_full = t, full_now
        if instance.modes.stop_rule == "first_full" and len(full_now) == 1:
            break
    info = {
        "convergence_iteration": first_t,
        "full_paths": first_full,
        "iterations_run": t_done,
        "circuits": circuits,
        "instance": instance,
    }
    return state, layout, trace, info


def full_program(instance: ProblemInstance, iterations: int | None = None, events=None) -> Circuit:
    """Init, ``iterations`` ant_execute steps, marking, amplification and path measurement."""
    layout = layout_for(instance)
    T = instance.K if iterations is None else iterations
    c = init_circuit(layout)
    for t in range(1, T + 1):
        instance = _apply_events(instance, events, t)
        c.extend(iteration_circuit(t, instance, layout))
    c.extend(amplification_circuit(layout, instance.modes))
    c.measure(*layout.path_qubits)
    return c


def run_mndas(
    instance: ProblemInstance,
    shots: int = 8192,
    seed: int = 0,
    events: Mapping[int, Sequence[tuple[int, float]]] | None = None,
    with_metrics: bool = True,
) -> RunResult:
    state, layout, trace, info = run_iterations(instance, events)
    state = mark_and_amplify(state, layout, instance.modes)
    probs = qsim.outcome_probabilities(state, layout.path_qubits)
    counts = qsim.sample(state, layout.path_qubits, shots, seed)
    bits = [qsim.pattern_bits(p, layout.x) for p in range(2**layout.x)]
    metrics = None
    if with_metrics:
        prog = full_program(instance, info["iterations_run"], events)
        metrics = qsim.gate_metrics(qsim.decompose_circuit(prog))
    full_paths = info["full_paths"]
    return RunResult(
        converged_path=full_paths[0] if len(full_paths) == 1 else None,
        convergence_iteration=info["convergence_iteration"],
        histogram=dict(zip(bits, (float(p) for p in probs))),
        counts=dict(zip(bits, (int(c) for c in counts))),
        trace=trace,
        metrics=metrics,
        full_paths=full_paths,
        iterations_run=info["iterations_run"],
        probabilities=probs,
        n=info["instance"].n,
    )
