"""Randomised checks of the two convergence properties of the pheromone boxes.

1. With evaporation off, the first box to fill belongs to the lightest path, after
   (2^(floor(log2 d)+1) - 1) * min(W) iterations.
2. Removing the lightest path before it fills hands convergence to the runner-up.

Uses the classical box oracle so thousands of instances run in seconds; the acceptance
suite repeats a smaller batch on the statevector engine.
"""
import argparse
import math

import numpy as np

from qaco.classical import brute_force_argmin
from qaco.engine import INF, ProblemInstance, classical_trace
from qaco.oracle import max_deposits


def first_full(rows, d):
    full = 2**d - 1
    hits = [(t, p) for t, p, v, _ in rows if v == full]
    if not hits:
        return None, ()
    t0 = min(t for t, _ in hits)
    return t0, tuple(sorted(p for t, p in hits if t == t0))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    ok1 = ok2 = 0
    for _ in range(args.trials):
        n = int(rng.integers(2, 33))
        d = int(rng.integers(2, 9))
        w = [int(v) for v in rng.choice(np.arange(1, 100), n, replace=False)]
        inst = ProblemInstance(n, tuple(w), 10**6, d)
        horizon = max_deposits(d) * max(w)
        t, paths = first_full(classical_trace(inst, horizon), d)
        ok1 += (t, paths) == (max_deposits(d) * min(w), (brute_force_argmin(w),))

        best = brute_force_argmin(w)
        t_rm = int(rng.integers(1, max_deposits(d) * w[best] + 1))
        second = brute_force_argmin([INF if i == best else v for i, v in enumerate(w)])
        _, paths = first_full(classical_trace(inst, horizon, events={t_rm: [(best, INF)]}), d)
        ok2 += paths == (second,)
    print(f"lightest path fills first:      {ok1}/{args.trials}")
    print(f"runner-up takes over on removal: {ok2}/{args.trials}")
    return 0 if ok1 == ok2 == args.trials else 1


if __name__ == "__main__":
    raise SystemExit(main())
