"""Simple ant colony optimisation on n parallel source->destination paths.

On this topology every ant's tour is a single arc, so the forward/backward modes and
loop elimination of the general algorithm reduce to picking one path per ant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class DegeneratePheromoneError(ValueError):
    """Every feasible path has a zero numerator in the transition rule."""


@dataclass(frozen=True)
class AcoParams:
    alpha: float = 1.0
    beta: float = 2.0
    rho: float = 0.1
    r0: float = 0.5
    q_deposit: float = 1.0
    ants_per_iteration: int = 100
    iterations: int = 200
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0, 1]")
        if not 0 <= self.r0 <= 1:
            raise ValueError("r0 must lie in [0, 1]")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.q_deposit < 0:
            raise ValueError("q_deposit must be non-negative")
        if self.ants_per_iteration < 1:
            raise ValueError("need at least one ant per iteration")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")


@dataclass(frozen=True)
class PheromoneVector:
    tau: tuple[float, ...]
    eta: tuple[float, ...]

    @classmethod
    def initial(cls, weights: Sequence[float]) -> "PheromoneVector":
        """tau = 1 everywhere, eta = 1/W (0 for removed paths)."""
        eta = tuple(0.0 if math.isinf(w) else 1.0 / w for w in weights)
        return cls(tuple(1.0 for _ in weights), eta)


@dataclass(frozen=True)
class AcoResult:
    best_path: int
    best_weight: float
    selection_frequency: tuple[float, ...]
    tau: tuple[float, ...] = ()


def _scores(pheromone: PheromoneVector, params: AcoParams, feasible: Iterable[int]) -> dict[int, float]:
    tau, eta = pheromone.tau, pheromone.eta
    return {j: tau[j] ** params.alpha * eta[j] ** params.beta for j in feasible}


def transition_probabilities(
    pheromone: PheromoneVector, params: AcoParams, feasible: Iterable[int]
) -> list[float]:
    feasible = sorted(set(feasible))
    if not feasible:
        raise ValueError("feasible set is empty")
    scores = _scores(pheromone, params, feasible)
    total = math.fsum(scores.values())
    if total <= 0:
        raise DegeneratePheromoneError("all transition numerators are zero")
    probs = [0.0] * len(pheromone.tau)
    for j, s in scores.items():
        probs[j] = s / total
    return probs


def pseudo_random_select(
    pheromone: PheromoneVector,
    params: AcoParams,
    feasible: Iterable[int],
    r: float,
    rng: np.random.Generator | None = None,
) -> int:
    """Exploit (argmax, lowest id on ties) when ``r <= r0``, else sample proportionally."""
    feasible = sorted(set(feasible))
    if r <= params.r0:
        scores = _scores(pheromone, params, feasible)
        return max(feasible, key=lambda j: (scores[j], -j))
    probs = transition_probabilities(pheromone, params, feasible)
    rng = rng if rng is not None else np.random.default_rng()
    return int(rng.choice(len(probs), p=probs))


def deposit(pheromone: PheromoneVector, path_id: int, weight: float, q_deposit: float = 1.0) -> PheromoneVector:
    tau = list(pheromone.tau)
    tau[path_id] += q_deposit / weight
    return PheromoneVector(tuple(tau), pheromone.eta)


def evaporate(pheromone: PheromoneVector, rho: float) -> PheromoneVector:
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    return PheromoneVector(tuple((1.0 - rho) * t for t in pheromone.tau), pheromone.eta)


def brute_force_argmin(weights: Sequence[float]) -> int:
    finite = [(w, i) for i, w in enumerate(weights) if not math.isinf(w)]
    if not finite:
        raise ValueError("no finite path weight")
    return min(finite)[1]


def run_simple_aco(weights: Sequence[float], params: AcoParams) -> AcoResult:
    """Evaporate-then-deposit ant system; best path = most chosen in the final iteration."""
    weights = [float(w) for w in weights]
    feasible = [i for i, w in enumerate(weights) if not math.isinf(w)]
    if not feasible:
        raise ValueError("no finite path weight")
    rng = np.random.default_rng(params.seed)
    ph = PheromoneVector.initial(weights)
    n = len(weights)
    counts = np.zeros(n, dtype=np.int64)
    for _ in range(params.iterations):
        probs = np.array(transition_probabilities(ph, params, feasible))
        scores = _scores(ph, params, feasible)
        greedy = max(feasible, key=lambda j: (scores[j], -j))
        r = rng.random(params.ants_per_iteration)
        explore = rng.choice(n, size=params.ants_per_iteration, p=probs)
        chosen = np.where(r <= params.r0, greedy, explore)
        counts = np.bincount(chosen, minlength=n)
        ph = evaporate(ph, params.rho)
        tau = np.array(ph.tau)
        tau += counts * np.array([0.0 if math.isinf(w) else params.q_deposit / w for w in weights])
        ph = PheromoneVector(tuple(tau.tolist()), ph.eta)
    freq = counts / counts.sum()
    best = int(np.argmax(freq))
    return AcoResult(best, weights[best], tuple(freq.tolist()), ph.tau)
