"""Command line front end: ``qaco {run,trace,qasm,classical,order,bench}``."""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import qsim
from .classical import brute_force_argmin, run_simple_aco
from .config import ConfigError, ExperimentConfig, load_config, preset_path
from .engine import (
    EngineModes,
    InstanceError,
    ProblemInstance,
    TraceError,
    amplification_circuit,
    classical_trace,
    full_program,
    init_circuit,
    iteration_circuit,
    layout_for,
    run_iterations,
    run_mndas,
)
from .oracle import box_order
from .qasm import to_qasm

log = logging.getLogger("qaco")

TRACE_HEADER = ("t", "path_id", "box_value", "box_bits")
HISTOGRAM_HEADER = ("path_id", "bits", "probability", "counts")
BENCH_HEADER = ("n", "K", "d", "total_gates", "depth", "per_iteration", "constant", "linear")


class ValidationError(ValueError):
    pass


def _write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _fmt(p: float) -> str:
    return format(p, ".12g")


def _out_dir(cfg: ExperimentConfig, out: str | None) -> Path:
    return Path(out if out is not None else cfg.output_dir)


def cmd_run(cfg: ExperimentConfig, out: str | None = None) -> dict[str, Path]:
    inst = cfg.instance()
    res = run_mndas(inst, shots=cfg.shots, seed=cfg.seed)
    x = inst.x
    out_dir = _out_dir(cfg, out)
    files = {
        "histogram": _write_csv(
            out_dir / "histogram.csv",
            HISTOGRAM_HEADER,
            [
                (p, bits, _fmt(res.histogram[bits]), res.counts[bits])
                for p, bits in enumerate(qsim.pattern_bits(i, x) for i in range(2**x))
            ],
        ),
        "trace": _write_csv(out_dir / "trace.csv", TRACE_HEADER, res.trace),
    }
    m = res.metrics
    metrics_lines = [f"{k} {v}" for k, v in m.counts.items()]
    metrics_lines += [f"total_gates {m.total_gates}", f"depth {m.depth}"]
    files["metrics"] = out_dir / "metrics.txt"
    files["metrics"].write_text("\n".join(metrics_lines) + "\n")

    top = res.argmax_patterns()
    dummy_mass = sum(res.histogram[qsim.pattern_bits(i, x)] for i in range(inst.n, 2**x))
    if res.converged_path is None:
        conv = "no convergence within K" if not res.full_paths else (
            f"tie between paths {', '.join(map(str, res.full_paths))} at t={res.convergence_iteration}"
        )
    else:
        conv = f"converged to path {res.converged_path} at t={res.convergence_iteration}"
    summary = (
        f"{conv}; argmax outcome {'/'.join(top)}"
        f" (p={res.histogram[top[0]]:.6f}); dummy mass {dummy_mass:.6f};"
        f" iterations run {res.iterations_run}"
    )
    files["summary"] = out_dir / "summary.txt"
    files["summary"].write_text(summary + "\n")
    print(summary)
    return files


def cmd_trace(cfg: ExperimentConfig, out: str | None = None, oracle: bool = False) -> Path:
    inst = cfg.instance()
    if oracle:
        rows = classical_trace(inst, inst.K)
    else:
        _, _, rows, _ = run_iterations(inst)
    return _write_csv(_out_dir(cfg, out) / "trace.csv", TRACE_HEADER, rows)


def parse_scope(scope: str) -> tuple[str, int | None]:
    if scope in ("init", "full"):
        return scope, None
    if scope.startswith("iteration"):
        _, _, t = scope.partition(":")
        try:
            t = int(t.strip("()"))
        except ValueError:
            raise ValidationError(f"bad scope {scope!r}; use iteration:<t>") from None
        if t < 1:
            raise ValidationError("iteration scope needs t >= 1")
        return "iteration", t
    raise ValidationError(f"unknown scope {scope!r}; use init, iteration:<t> or full")


def qasm_for_scope(cfg: ExperimentConfig, scope: str) -> str:
    inst = cfg.instance()
    layout = layout_for(inst)
    kind, t = parse_scope(scope)
    if kind == "init":
        circ = init_circuit(layout)
    elif kind == "iteration":
        circ = iteration_circuit(t, inst, layout)
    else:
        _, _, _, info = run_iterations(inst)
        circ = full_program(inst, info["iterations_run"])
    return to_qasm(circ)


def cmd_qasm(cfg: ExperimentConfig, scope: str = "full", out: str | None = None) -> Path:
    text = qasm_for_scope(cfg, scope)
    path = _out_dir(cfg, out) / f"circuit_{scope.replace(':', '_')}.qasm"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def cmd_classical(cfg: ExperimentConfig, out: str | None = None) -> Path:
    res = run_simple_aco(cfg.weights, cfg.aco_params())
    truth = brute_force_argmin(cfg.weights)
    rows = [
        (i, "inf" if math.isinf(w) else w, _fmt(f), int(i == res.best_path))
        for i, (w, f) in enumerate(zip(cfg.weights, res.selection_frequency))
    ]
    print(f"classical best path {res.best_path} (weight {res.best_weight:g}); brute force {truth}")
    return _write_csv(_out_dir(cfg, out) / "classical.csv", ("path_id", "weight", "frequency", "best"), rows)


def bench_rows(d: int, n_list, k_list, modes: EngineModes | None = None):
    """Gate counts with every path selected in every iteration (the per-iteration worst case)."""
    modes = modes or EngineModes(stop_rule="fixed_k")
    rows = []
    for n in n_list:
        inst = ProblemInstance(n, (1,) * n, max(k_list), d, modes)
        layout = layout_for(inst)
        per_iter = qsim.gate_metrics(qsim.decompose_circuit(iteration_circuit(1, inst, layout))).total_gates
        fixed = init_circuit(layout).extend(amplification_circuit(layout, modes)).measure(*layout.path_qubits)
        constant = qsim.gate_metrics(qsim.decompose_circuit(fixed)).total_gates
        for K in k_list:
            m = qsim.gate_metrics(qsim.decompose_circuit(full_program(replace(inst, K=K))))
            rows.append((n, K, d, m.total_gates, m.depth, per_iter, constant,
                         int(m.total_gates == K * per_iter + constant)))
    return rows


def cmd_bench(cfg: ExperimentConfig, n_list, k_list, out: str | None = None) -> Path:
    if not n_list or not k_list:
        raise ValidationError("bench needs non-empty n and K lists")
    modes = replace(cfg.modes, stop_rule="fixed_k")
    rows = bench_rows(cfg.box_qubits, n_list, k_list, modes)
    for r in rows:
        print(" ".join(f"{h}={v}" for h, v in zip(BENCH_HEADER, r)))
    return _write_csv(_out_dir(cfg, out) / "bench.csv", BENCH_HEADER, rows)


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _resolve_config(path: str | None) -> ExperimentConfig:
    if path is None:
        raise ValidationError("--config is required")
    p = Path(path)
    if not p.exists():
        preset = preset_path(path)
        if preset.exists():
            p = preset
        else:
            raise ValidationError(f"config {path!r} not found")
    return load_config(p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qaco", description="Quantum ant colony optimisation on a statevector simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="config file or bundled preset name (table1, table2)")
        p.add_argument("--out", help="output directory (default: output_dir from the config)")
        p.add_argument("--seed", type=int, help="override the config seed")

    common(sub.add_parser("run", help="full run: iterate, mark, amplify, measure"))
    p = sub.add_parser("trace", help="pheromone box trace CSV")
    common(p)
    p.add_argument("--oracle", action="store_true", help="recompute the trace classically")
    p = sub.add_parser("qasm", help="export OpenQASM 2.0")
    common(p)
    p.add_argument("--scope", default="full", help="init | iteration:<t> | full")
    common(sub.add_parser("classical", help="classical simple-ACO reference"))
    p = sub.add_parser("order", help="print the box order for d box qubits")
    common(p, config_required=False)
    p.add_argument("--d", type=int, help="box qubits (default: config box_qubits, else 4)")
    p = sub.add_parser("bench", help="gate counts over n and K")
    common(p)
    p.add_argument("--n-list", type=_int_list, default=[4, 8, 16])
    p.add_argument("--k-list", type=_int_list, default=[1, 2, 4, 8])
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "order":
            d = args.d if args.d is not None else (_resolve_config(args.config).box_qubits if args.config else 4)
            print("-".join(map(str, box_order(d))))
            return 0
        cfg = _resolve_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.command == "run":
            cmd_run(cfg, args.out)
        elif args.command == "trace":
            print(cmd_trace(cfg, args.out, args.oracle))
        elif args.command == "qasm":
            print(cmd_qasm(cfg, args.scope, args.out))
        elif args.command == "classical":
            cmd_classical(cfg, args.out)
        elif args.command == "bench":
            cmd_bench(cfg, args.n_list, args.k_list, args.out)
        return 0
    except (ConfigError, ValidationError, InstanceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (qsim.SimulatorLimitError, qsim.ResetError, TraceError, OSError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
