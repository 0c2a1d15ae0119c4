"""Classical ant colony baseline: pseudo-random-proportional rule with evaporation."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .pheromone import SolveResult
from .tspio import TspInstance, tour_length


@dataclass(frozen=True)
class AcoConfig:
    alpha: float = 4.0
    beta: float = 2.0
    rho: float = 0.1
    q0: float = 0.9
    num_ants: int = 6
    iterations: int = 1000
    # None: mean edge length of the instance, which keeps deposits scale-free
    deposit_constant: float | None = None
    tau0: float = 1.0
    tau_min: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must lie in (0, 1), got {self.rho}")
        if not 0.0 <= self.q0 <= 1.0:
            raise ConfigError(f"q0 must lie in [0, 1], got {self.q0}")
        if self.num_ants < 1 or self.iterations < 1:
            raise ConfigError("num_ants and iterations must be >= 1")
        if self.tau_min <= 0:
            raise ConfigError("tau_min must be positive")


def _attractiveness(r: int, allowed: np.ndarray, tau: np.ndarray, eta: np.ndarray, alpha, beta) -> np.ndarray:
    return tau[r, allowed] ** alpha * eta[r, allowed] ** beta


def transition_probs(
    r: int, allowed: Sequence[int], tau: np.ndarray, eta: np.ndarray, alpha: float, beta: float
) -> np.ndarray:
    """Probabilities over ``allowed`` (in the given order) of moving r -> s."""
    allowed = np.asarray(allowed, dtype=int)
    if allowed.size == 0:
        raise ValueError("no allowed nodes to move to")
    w = _attractiveness(r, allowed, tau, eta, alpha, beta)
    return w / w.sum()


def next_node(
    r: int, allowed: Sequence[int], tau: np.ndarray, eta: np.ndarray, cfg: AcoConfig, rng: np.random.Generator
) -> int:
    allowed = np.asarray(allowed, dtype=int)
    if allowed.size == 0:
        raise ValueError("no allowed nodes to move to")
    w = _attractiveness(r, allowed, tau, eta, cfg.alpha, cfg.beta)
    if rng.random() <= cfg.q0:
        best = w.max()
        return int(allowed[w == best].min())
    return int(allowed[rng.choice(len(allowed), p=w / w.sum())])


def heuristic(dist: np.ndarray) -> np.ndarray:
    """Inverse distance; coincident cities get a large finite value instead of inf."""
    d = np.asarray(dist, dtype=float)
    positive = d > 0
    eta = np.zeros_like(d)
    eta[positive] = 1.0 / d[positive]
    zero = ~positive & ~np.eye(len(d), dtype=bool)
    if zero.any():
        eta[zero] = 1e3 * eta.max() if eta.max() > 0 else 1.0
    return eta


def update_pheromone(
    tau: np.ndarray, tours_with_lengths: Sequence[tuple[Sequence[int], float]], cfg: AcoConfig
) -> np.ndarray:
    """Evaporate everywhere, then deposit Q/L on the iteration-best tour's edges."""
    if not tours_with_lengths:
        raise ValueError("at least one tour is needed for the update")
    tau = (1.0 - cfg.rho) * tau
    tour, length = min(tours_with_lengths, key=lambda tl: tl[1])
    q = cfg.deposit_constant
    if q is not None and q > 0 and len(tour) > 1:
        t = np.asarray(tour, dtype=int)
        nxt = np.roll(t, -1)
        amount = q / length if length > 0 else q
        np.add.at(tau, (t, nxt), amount)
        np.add.at(tau, (nxt, t), amount)
    return np.maximum(tau, cfg.tau_min)


def construct_tour(dist_eta: np.ndarray, tau: np.ndarray, cfg: AcoConfig, rng: np.random.Generator) -> list[int]:
    n = len(tau)
    start = int(rng.integers(n))
    tour = [start]
    unvisited = np.ones(n, dtype=bool)
    unvisited[start] = False
    while unvisited.any():
        allowed = np.flatnonzero(unvisited)
        nxt = next_node(tour[-1], allowed, tau, dist_eta, cfg, rng)
        tour.append(nxt)
        unvisited[nxt] = False
    return tour


def mean_edge_length(dist: np.ndarray) -> float:
    n = len(dist)
    return float(dist[~np.eye(n, dtype=bool)].mean())


def aco_solve(instance: TspInstance, cfg: AcoConfig = AcoConfig(), rng: np.random.Generator | None = None) -> SolveResult:
    if rng is None:
        rng = np.random.default_rng()
    n = instance.dimension
    if n < 3:
        raise ValueError("ACO needs at least 3 cities")
    dist = instance.matrix
    if cfg.deposit_constant is None:
        cfg = replace(cfg, deposit_constant=mean_edge_length(dist))
    eta = heuristic(dist)
    tau = np.full((n, n), cfg.tau0)
    best_tour, best_len = None, math.inf
    trace = []
    for it in range(1, cfg.iterations + 1):
        ants = []
        for _ in range(cfg.num_ants):
            t = construct_tour(eta, tau, cfg, rng)
            ants.append((t, tour_length(dist, t)))
        tau = update_pheromone(tau, ants, cfg)
        it_tour, it_len = min(ants, key=lambda tl: tl[1])
        if it_len < best_len:
            best_tour, best_len = it_tour, it_len
        trace.append((it, best_len))
    return SolveResult(best_tour, best_len, trace)
