"""OpenQASM 2.0 export of :class:`~qaco.qsim.Circuit` and a parser for the same dialect.

Registers: ``q`` holds the circuit's qubits, ``anc`` (only when needed) the ancilla pool
for decomposed multi-controlled Toffolis, ``c`` one bit per measured qubit.
"""
from __future__ import annotations

import math
import re

from .qsim import (
    CCNOT,
    CNOT,
    CPHASE,
    H,
    MCT,
    MEASURE,
    RESET,
    X,
    Circuit,
    CircuitError,
    GateOp,
    ancillas_needed,
    decompose_mct,
)

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";'

_NAMES = {X: "x", H: "h", CNOT: "cx", CCNOT: "ccx", RESET: "reset"}
_KINDS = {v: k for k, v in _NAMES.items()}


class QasmError(ValueError):
    pass


def to_qasm(circuit: Circuit) -> str:
    n_anc = ancillas_needed(circuit)
    n = circuit.qubit_count

    def ref(i: int) -> str:
        return f"q[{i}]" if i < n else f"anc[{i - n}]"

    measured = [op.target for op in circuit.ops if op.kind == MEASURE]
    lines = [HEADER, f"qreg q[{n}];"]
    if n_anc:
        lines.append(f"qreg anc[{n_anc}];")
    if measured:
        lines.append(f"creg c[{len(measured)}];")
    pool = list(range(n, n + n_anc))
    clbit = 0
    for op in circuit.ops:
        ops = decompose_mct(op.controls, op.target, pool) if op.kind == MCT else [op]
        for g in ops:
            if g.kind == MEASURE:
                lines.append(f"measure {ref(g.target)} -> c[{clbit}];")
                clbit += 1
            elif g.kind == CPHASE:
                lines.append(f"cu1({g.angle!r}) {ref(g.controls[0])},{ref(g.target)};")
            else:
                args = ",".join(ref(i) for i in g.qubits)
                lines.append(f"{_NAMES[g.kind]} {args};")
    return "\n".join(lines) + "\n"


_REG = re.compile(r"^(qreg|creg)\s+(\w+)\[(\d+)\]$")
_ARG = re.compile(r"^(\w+)\[(\d+)\]$")
_GATE = re.compile(r"^(\w+)(?:\(([^)]*)\))?\s+(.+)$")


def _angle(text: str) -> float:
    expr = text.strip().replace(" ", "")
    if not re.fullmatch(r"[-+*/.0-9epi]+", expr):
        raise QasmError(f"unsupported angle expression {text!r}")
    return float(eval(expr, {"__builtins__": {}}, {"pi": math.pi}))


def from_qasm(text: str) -> tuple[Circuit, list[int]]:
    """Parse the exporter's dialect.

    Returns the circuit (``anc`` qubits appended after ``q``) and, for each classical bit,
    the qubit measured into it.
    """
    qregs: dict[str, int] = {}
    offsets: dict[str, int] = {}
    cregs: dict[str, int] = {}
    ops: list[GateOp] = []
    clmap: dict[int, int] = {}
    statements = [s.strip() for s in re.sub(r"//[^\n]*", "", text).split(";")]
    for lineno, stmt in enumerate(statements, 1):
        if not stmt:
            continue
        if stmt.startswith("OPENQASM"):
            if stmt.split()[1] != "2.0":
                raise QasmError(f"unsupported version in {stmt!r}")
            continue
        if stmt.startswith("include"):
            continue
        m = _REG.match(stmt)
        if m:
            kind, name, size = m.group(1), m.group(2), int(m.group(3))
            if kind == "qreg":
                offsets[name] = sum(qregs.values())
                qregs[name] = size
            else:
                cregs[name] = size
            continue

        def qubit(arg: str) -> int:
            a = _ARG.match(arg.strip())
            if not a or a.group(1) not in qregs:
                raise QasmError(f"statement {lineno}: bad qubit reference {arg!r}")
            idx = int(a.group(2))
            if idx >= qregs[a.group(1)]:
                raise QasmError(f"statement {lineno}: index out of range in {arg!r}")
            return offsets[a.group(1)] + idx

        if stmt.startswith("measure"):
            src, _, dst = stmt[len("measure"):].partition("->")
            c = _ARG.match(dst.strip())
            if not c or c.group(1) not in cregs:
                raise QasmError(f"statement {lineno}: bad classical target {dst!r}")
            q = qubit(src)
            clmap[int(c.group(2))] = q
            ops.append(GateOp(MEASURE, q))
            continue
        m = _GATE.match(stmt)
        if not m:
            raise QasmError(f"statement {lineno}: cannot parse {stmt!r}")
        name, param, args = m.group(1), m.group(2), [qubit(a) for a in m.group(3).split(",")]
        try:
            if name == "cu1":
                ops.append(GateOp(CPHASE, args[1], (args[0],), _angle(param or "")))
            elif name in _KINDS:
                *controls, target = args
                ops.append(GateOp(_KINDS[name], target, tuple(controls)))
            else:
                raise QasmError(f"statement {lineno}: unsupported gate {name!r}")
        except CircuitError as exc:
            raise QasmError(f"statement {lineno}: {exc}") from None
    try:
        circuit = Circuit(sum(qregs.values()), ops)
    except CircuitError as exc:
        raise QasmError(str(exc)) from None
    return circuit, [clmap[i] for i in sorted(clmap)]
