"""K-means decomposition of large instances and recombination of sub-tours."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ConfigError
from .pheromone import SolveResult
from .tspio import TspInstance, from_points, tour_length

SubSolver = Callable[[TspInstance, np.random.Generator], SolveResult]


@dataclass
class Partition:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    history: list[float] = field(default_factory=list)


def inertia(points: np.ndarray, centroids: np.ndarray, assignments: np.ndarray) -> float:
    return float(((points - centroids[assignments]) ** 2).sum())


def lloyd(points: np.ndarray, init_centroids: np.ndarray, max_iters: int = 100) -> Partition:
    """Lloyd iterations from fixed starting centroids.

    ``history`` holds the inertia after every centroid update. An emptied
    cluster is moved onto the point farthest from its old position.
    """
    x = np.asarray(points, dtype=float)
    c = np.array(init_centroids, dtype=float)
    k = len(c)
    assign = None
    history: list[float] = []
    for _ in range(max_iters):
        d2 = ((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=-1)
        new = d2.argmin(axis=1)
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        for j in range(k):
            members = x[assign == j]
            if len(members):
                c[j] = members.mean(axis=0)
            else:
                c[j] = x[((x - c[j]) ** 2).sum(axis=1).argmax()]
        history.append(inertia(x, c, assign))
    return Partition(assign, c, history[-1] if history else inertia(x, c, assign), history)


def kmeans(
    points, k: int, restarts: int = 10, max_iters: int = 100, rng: np.random.Generator | None = None
) -> Partition:
    x = np.asarray(points, dtype=float)
    if not 1 <= k <= len(x):
        raise ValueError(f"k must be in [1, {len(x)}], got {k}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    best = None
    for _ in range(restarts):
        init = x[rng.choice(len(x), size=k, replace=False)]
        part = lloyd(x, init, max_iters)
        if best is None or part.inertia < best.inertia:
            best = part
    return best


# --- decomposition tree ---------------------------------------------------


@dataclass
class Leaf:
    cities: tuple[int, ...]


@dataclass
class Internal:
    children: list[Node]
    centroids: np.ndarray


Node = Union[Leaf, Internal]


def leaves(tree: Node) -> list[Leaf]:
    if isinstance(tree, Leaf):
        return [tree]
    return [leaf for child in tree.children for leaf in leaves(child)]


def decompose(
    instance: TspInstance,
    cap: int,
    rng: np.random.Generator,
    restarts: int = 10,
    max_iters: int = 100,
) -> Node:
    """Split recursively with K-means until every leaf holds at most ``cap`` cities."""
    if cap < 2:
        raise ConfigError(f"cap must be >= 2, got {cap}")
    pts = instance.points
    if pts is None and instance.dimension > cap:
        raise ConfigError(f"{instance.name} has no coordinates to cluster on")

    def split(cities: np.ndarray) -> Node:
        n = len(cities)
        if n <= cap:
            return Leaf(tuple(int(c) for c in cities))
        k = min(math.ceil(n / cap), cap)
        part = kmeans(pts[cities], k, restarts, max_iters, rng)
        groups = [cities[part.assignments == j] for j in range(k)]
        groups = [g for g in groups if len(g)]
        if len(groups) < 2:
            # all points coincide: any balanced split is as good as another
            groups = [g for g in np.array_split(cities, k) if len(g)]
        centroids = np.array([pts[g].mean(axis=0) for g in groups])
        return Internal([split(g) for g in groups], centroids)

    return split(np.arange(instance.dimension))


# --- recombination --------------------------------------------------------


def _open_options(cycle: Sequence[int], dist: np.ndarray):
    """Every way to cut one edge of ``cycle`` and walk it as a path, both directions.

    Returns (first, last, path_cost, paths).
    """
    c = list(cycle)
    s = len(c)
    if s == 1:
        return np.array(c), np.array(c), np.zeros(1), [c]
    idx = np.asarray(c)
    total = float(dist[idx, np.roll(idx, -1)].sum())
    paths, costs = [], []
    cuts = range(s) if s > 2 else range(1)
    for e in cuts:
        path = c[e + 1 :] + c[: e + 1]
        cost = total - dist[c[e], c[(e + 1) % s]]
        paths += [path, path[::-1]]
        costs += [cost, cost]
    first = np.array([p[0] for p in paths])
    last = np.array([p[-1] for p in paths])
    return first, last, np.array(costs, dtype=float), paths


def splice(cycles: Sequence[Sequence[int]], dist: np.ndarray) -> list[int]:
    """Join sub-cycles, visited in the given order, into one Hamiltonian cycle.

    Each sub-cycle loses one of its own edges and gains a connection to its
    neighbours; the cut edge and walking direction of every sub-cycle are
    chosen jointly to minimise the total length (exact DP around the ring).
    """
    cycles = [list(c) for c in cycles if len(c)]
    if len(cycles) == 1:
        return cycles[0]
    opts = [_open_options(c, dist) for c in cycles]
    f0, l0, c0, _ = opts[0]
    # dp[a, b]: best cost with child 0 in option a and current child in option b
    f1, _, c1, _ = opts[1]
    dp = c0[:, None] + dist[np.ix_(l0, f1)] + c1[None, :]
    back = []
    for i in range(2, len(opts)):
        _, lp, _, _ = opts[i - 1]
        fi, _, ci, _ = opts[i]
        step = dp[:, :, None] + dist[np.ix_(lp, fi)][None, :, :]
        back.append(step.argmin(axis=1))
        dp = step.min(axis=1) + ci[None, :]
    _, ll, _, _ = opts[-1]
    closing = dp + dist[np.ix_(ll, f0)].T
    a, b = np.unravel_index(int(closing.argmin()), closing.shape)
    choice = [int(b)]
    for bp in reversed(back):
        choice.append(int(bp[a, choice[-1]]))
    choice.append(int(a))
    choice.reverse()
    tour: list[int] = []
    for (_, _, _, paths), o in zip(opts, choice):
        tour += paths[o]
    return tour


def _solve_small(instance: TspInstance, cities: Sequence[int], solver: SubSolver, rng) -> list[int]:
    cities = list(cities)
    if len(cities) <= 3:
        return cities
    sub = solver(instance.subinstance(cities), rng)
    return [cities[i] for i in sub.tour]


def _centroid_order(centroids: np.ndarray, solver: SubSolver, rng) -> list[int]:
    m = len(centroids)
    if m <= 3:
        return list(range(m))
    return list(solver(from_points(centroids, name="centroids"), rng).tour)


def recombine(
    tree: Node,
    leaf_tours: Sequence[Sequence[int]],
    solver: SubSolver,
    rng: np.random.Generator,
    instance: TspInstance,
) -> list[int]:
    """Merge per-leaf tours bottom-up into one tour over every city.

    At an internal node the children are ordered by a tour over their
    centroids (solved with ``solver``) and then spliced.
    """
    dist = instance.matrix
    remaining = iter(leaf_tours)

    def merge(node: Node) -> list[int]:
        if isinstance(node, Leaf):
            return list(next(remaining))
        child_tours = [merge(ch) for ch in node.children]
        order = _centroid_order(node.centroids, solver, rng)
        return splice([child_tours[i] for i in order], dist)

    return merge(tree)


def hierarchical_solve(
    instance: TspInstance,
    sub_solver: SubSolver,
    cap: int,
    rng: np.random.Generator,
    restarts: int = 10,
    max_iters: int = 100,
) -> SolveResult:
    """Decompose, solve every leaf with ``sub_solver``, recombine.

    Only the final length is traced: the sub-solves run on different
    sub-problems, so there is no single per-iteration global length.
    """
    if instance.dimension < 2:
        raise ValueError("need at least 2 cities")
    tree = decompose(instance, cap, rng, restarts, max_iters)
    if isinstance(tree, Leaf):
        res = sub_solver(instance, rng) if instance.dimension > 3 else None
        tour = list(res.tour) if res else list(range(instance.dimension))
        length = tour_length(instance, tour)
        return SolveResult(tour, length, res.trace if res else [(1, length)])
    leaf_tours = [_solve_small(instance, leaf.cities, sub_solver, rng) for leaf in leaves(tree)]
    tour = recombine(tree, leaf_tours, sub_solver, rng, instance)
    length = tour_length(instance, tour)
    return SolveResult(tour, length, [(1, length)])
