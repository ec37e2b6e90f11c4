"""Pure-integer model of the pheromone box, used as an independent check on the circuits.

Nothing here touches the statevector.  The box is advanced by running the deposition
cascade on a list of classical bits, and the per-path dynamics are expressed as moves
along the resulting order of box values.
"""
from __future__ import annotations

import math
from typing import Mapping, Sequence


def deposit_bits(bits: list[int]) -> list[int]:
    """One deposition step on classical bits ``[ph0, ..., ph_{d-1}]`` (control assumed on)."""
    bits = list(bits)
    for m in range(len(bits) - 2, -1, -1):
        if bits[m]:
            bits[m + 1] ^= 1
    bits[0] ^= 1
    return bits


def evaporate_bits(bits: list[int]) -> list[int]:
    bits = list(bits)
    bits[0] ^= 1
    for m in range(len(bits) - 1):
        if bits[m]:
            bits[m + 1] ^= 1
    return bits


def bits_to_value(bits: Sequence[int]) -> int:
    """Box value with ph0 as the most significant bit."""
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def value_to_bits(value: int, d: int) -> list[int]:
    return [(value >> (d - 1 - k)) & 1 for k in range(d)]


def box_bits_string(value: int, d: int) -> str:
    return format(value, f"0{d}b")


def box_order(d: int) -> list[int]:
    """Box values visited by repeated deposition from the empty box up to the full box."""
    if d < 2:
        raise ValueError("box needs at least 2 qubits")
    full = 2**d - 1
    bits = [0] * d
    order = [0]
    while order[-1] != full:
        bits = deposit_bits(bits)
        v = bits_to_value(bits)
        if v in order:
            raise RuntimeError(f"deposition cycle for d={d} never reaches the full box")
        order.append(v)
    return order


def max_deposits(d: int) -> int:
    """Closed-form deposits-to-full: 2**(floor(log2 d) + 1) - 1."""
    return 2 ** (int(math.floor(math.log2(d))) + 1) - 1


def _step_corrected(pos: int, last: int, selected: bool, evaporate: bool) -> int:
    if selected:
        return min(pos + 1, last)
    if evaporate and 0 < pos < last:
        return pos - 1
    return pos


def _step_verbatim(pos: int, last: int, selected: bool, evaporate: bool) -> int:
    # Literal gate order: the full-box check on a1 fires before deposition, the full-box
    # check on a2 after it.  Consequences, in position terms:
    #   selected, one short of full -> fills, then is evaporated straight back
    #   selected, already full      -> no deposit, but evaporated
    #   unselected, full            -> a1 is raised, deposition wraps the box to empty
    if selected:
        if pos >= last - 1:
            return last - 1 if evaporate else last
        return pos + 1
    if pos == last:
        return 0
    if evaporate and pos > 0:
        return pos - 1
    return pos


def classical_box_oracle(
    weights: Sequence[float],
    d: int,
    t_max: int,
    guard_mode: str = "corrected",
    evaporates_at=lambda t: False,
    n_real: int | None = None,
    events: Mapping[int, Sequence[tuple[int, float]]] | None = None,
    stop_first_full: bool = False,
) -> list[tuple[int, int, int, str]]:
    """Trace rows ``(t, path_id, box_value, box_bits)`` for t = 0..t_max.

    ``weights`` must already be padded to a power of two; only the first ``n_real``
    paths are reported.  ``events`` maps an iteration to weight changes applied before it.
    """
    order = box_order(d)
    last = len(order) - 1
    step = {"corrected": _step_corrected, "verbatim": _step_verbatim}[guard_mode]
    weights = list(weights)
    n_real = len(weights) if n_real is None else n_real
    pos = [0] * len(weights)
    rows = [(0, i, 0, box_bits_string(0, d)) for i in range(n_real)]
    for t in range(1, t_max + 1):
        for path, w in (events or {}).get(t, ()):
            weights[path] = w
        evap = evaporates_at(t)
        for i, w in enumerate(weights):
            sel = math.isfinite(w) and t % int(w) == 0
            pos[i] = step(pos[i], last, sel, evap)
        rows.extend((t, i, order[pos[i]], box_bits_string(order[pos[i]], d)) for i in range(n_real))
        if stop_first_full and sum(p == last for p in pos) == 1:
            break
    return rows
