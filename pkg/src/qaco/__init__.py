"""Quantum ant colony optimisation (MNDAS circuits) on a dense statevector simulator."""
from .classical import AcoParams, brute_force_argmin, run_simple_aco
from .engine import EngineModes, ProblemInstance, RunResult, run_mndas, set_weight
from .oracle import box_order, classical_box_oracle
from .qsim import Circuit, GateOp, QuantumState

__all__ = [
    "AcoParams",
    "Circuit",
    "EngineModes",
    "GateOp",
    "ProblemInstance",
    "QuantumState",
    "RunResult",
    "box_order",
    "brute_force_argmin",
    "classical_box_oracle",
    "run_mndas",
    "run_simple_aco",
    "set_weight",
]
