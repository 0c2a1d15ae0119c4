"""Quantum ant colony optimisation on a single qubit-sized sub-problem.

Each city of a k-city tour is written as a ``ceil(log2 k)``-bit code and the
codes are concatenated in visiting order. One rotation angle per path qubit
acts as the pheromone trail: ``P(bit = 1) = sin^2(angle / 2)``. Qubit 0 of the
register is the mutation ancilla; path qubit ``i`` lives on wire ``i + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import qsim
from .errors import ConfigError, DecompositionRequired
from .qsim import NOISELESS, NoiseSpec
from .tspio import TspInstance, tour_length

PI = math.pi
DEFAULT_BAND = (0.05 * PI, 0.95 * PI)

# (x_i, b_i, current_better) -> rotation increment
ROTATION_TABLE = {
    (0, 0, True): -0.01 * PI,
    (0, 0, False): 0.04 * PI,
    (0, 1, True): -0.05 * PI,
    (0, 1, False): 0.07 * PI,
    (1, 0, True): 0.05 * PI,
    (1, 0, False): -0.07 * PI,
    (1, 1, True): 0.01 * PI,
    (1, 1, False): -0.04 * PI,
}


class SolveResult(NamedTuple):
    tour: list[int]
    length: float
    trace: list[tuple[int, float]]


@dataclass(frozen=True)
class SubproblemEncoding:
    num_cities: int
    bits_per_city: int
    ancilla_index: int = 0

    @classmethod
    def for_cities(cls, k: int) -> SubproblemEncoding:
        if k < 2:
            raise ValueError(f"an encoded sub-problem needs at least 2 cities, got {k}")
        return cls(k, max(1, math.ceil(math.log2(k))))

    @property
    def path_qubits(self) -> int:
        return self.num_cities * self.bits_per_city

    @property
    def num_qubits(self) -> int:
        return self.path_qubits + 1

    def wire(self, path_index: int) -> int:
        return path_index + 1


@dataclass(frozen=True)
class MutationSchedule:
    thresholds: tuple[int, int, int] = (5, 10, 15)
    angles: tuple[float, float, float] = (PI / 6, PI / 4, PI / 2)

    def __post_init__(self):
        if list(self.thresholds) != sorted(self.thresholds):
            raise ConfigError("mutation thresholds must be increasing")


@dataclass(frozen=True)
class QacoConfig:
    max_iterations: int = 200
    random_repair_iterations: int = 10
    pool_capacity: int = 10
    noise: NoiseSpec = NOISELESS
    clamp_band: tuple[float, float] = DEFAULT_BAND
    rng_seed: int | None = None
    max_cities: int = 4
    shots_per_iteration: int = 1
    schedule: MutationSchedule = field(default_factory=MutationSchedule)
    # reserved for alternative readings of the starred rotation-table rows
    star_rule: str = "as_printed"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.pool_capacity < 1 or self.shots_per_iteration < 1:
            raise ConfigError("pool_capacity and shots_per_iteration must be >= 1")
        lo, hi = self.clamp_band
        if not 0.0 <= lo < hi <= PI:
            raise ConfigError(f"clamp band must satisfy 0 <= lo < hi <= pi, got {self.clamp_band}")
        if self.star_rule != "as_printed":
            raise ConfigError(f"unknown star_rule {self.star_rule!r}")
        if SubproblemEncoding.for_cities(max(self.max_cities, 2)).num_qubits > qsim.MAX_QUBITS:
            raise ConfigError(f"max_cities={self.max_cities} exceeds the {qsim.MAX_QUBITS}-qubit register")


# --- encoding -------------------------------------------------------------


def encode_tour(tour: Sequence[int], enc: SubproblemEncoding) -> str:
    t = [int(c) for c in tour]
    if sorted(t) != list(range(enc.num_cities)):
        raise ValueError(f"not a permutation of range({enc.num_cities}): {list(tour)!r}")
    return "".join(format(c, f"0{enc.bits_per_city}b") for c in t)


def decode_bitstring(bits: str, enc: SubproblemEncoding) -> list[int] | None:
    """City order spelled by ``bits``, or None when it is not a valid tour."""
    if len(bits) != enc.path_qubits:
        raise ValueError(f"expected {enc.path_qubits} bits, got {len(bits)}")
    b = enc.bits_per_city
    tour = [int(bits[i : i + b], 2) for i in range(0, len(bits), b)]
    if max(tour) >= enc.num_cities or len(set(tour)) != enc.num_cities:
        return None
    return tour


def hamming(a: str, b: str) -> int:
    return sum(x != y for x, y in zip(a, b, strict=True))


# --- circuit --------------------------------------------------------------


def mutation_angle(invariant_count: int, sched: MutationSchedule = MutationSchedule()) -> float:
    t1, t2, t3 = sched.thresholds
    a1, a2, a3 = sched.angles
    if invariant_count < t1 or invariant_count > t3:
        return 0.0
    if invariant_count < t2:
        return a1
    if invariant_count < t3:
        return a2
    return a3


def path_circuit(angles: Sequence[float], mut_angle: float, target: int, enc: SubproblemEncoding) -> qsim.Circuit:
    circ = qsim.Circuit(enc.num_qubits)
    for i, theta in enumerate(angles):
        circ.ry(enc.wire(i), theta)
    circ.ry(enc.ancilla_index, mut_angle)
    circ.cnot([enc.ancilla_index], enc.wire(target))
    return circ


def sample_candidate(
    angles: np.ndarray,
    mut_angle: float,
    enc: SubproblemEncoding,
    noise: NoiseSpec,
    rng: np.random.Generator,
) -> str:
    """Measure the path-search circuit once and return the path-qubit bits.

    The ancilla drives one controlled NOT onto a uniformly chosen path qubit,
    so a sample is mutated in a single bit with probability sin^2(mut/2).
    """
    if len(angles) != enc.path_qubits:
        raise ValueError(f"expected {enc.path_qubits} angles, got {len(angles)}")
    target = int(rng.integers(enc.path_qubits))
    state = path_circuit(angles, mut_angle, target, enc).run(noise, rng)
    bits = qsim.sample(state, rng)
    return bits[: enc.ancilla_index] + bits[enc.ancilla_index + 1 :]


# --- solution pool and repair ---------------------------------------------


class PoolEntry(NamedTuple):
    tour: tuple[int, ...]
    bits: str
    length: float


class SolutionPool:
    def __init__(self, capacity: int = 10):
        self.capacity = capacity
        self.entries: list[PoolEntry] = []

    def __len__(self):
        return len(self.entries)

    def add(self, tour: Sequence[int], bits: str, length: float) -> bool:
        if any(e.bits == bits for e in self.entries):
            return False
        if len(self.entries) == self.capacity and length >= self.entries[-1].length:
            return False
        self.entries.append(PoolEntry(tuple(tour), bits, float(length)))
        self.entries.sort(key=lambda e: e.length)
        del self.entries[self.capacity :]
        return True


def pool_selection_probs(hamming_distances: Sequence[int]) -> np.ndarray:
    """Selection weights inversely proportional to Hamming distance.

    An empty input yields an empty array, which callers treat as "no pool,
    repair at random".
    """
    d = np.asarray(hamming_distances, dtype=float)
    if d.size == 0:
        return d
    if np.any(d < 1):
        raise ValueError("Hamming distances must be >= 1")
    return 1.0 / (d * np.sum(1.0 / d))


def repair(
    bits: str,
    iteration: int,
    pool: SolutionPool,
    cfg: QacoConfig,
    rng: np.random.Generator,
    enc: SubproblemEncoding,
) -> list[int]:
    tour = decode_bitstring(bits, enc)
    if tour is not None:
        return tour
    if iteration <= cfg.random_repair_iterations or len(pool) == 0:
        return [int(c) for c in rng.permutation(enc.num_cities)]
    probs = pool_selection_probs([hamming(bits, e.bits) for e in pool.entries])
    pick = int(rng.choice(len(probs), p=probs))
    return list(pool.entries[pick].tour)


# --- pheromone update -----------------------------------------------------


def delta_theta(x_i: int, b_i: int, current_better: bool) -> float:
    return ROTATION_TABLE[(int(x_i), int(b_i), bool(current_better))]


def update_pheromone(
    angles: np.ndarray,
    sample_bits: str,
    best_bits: str,
    current_better: bool,
    band: tuple[float, float] = DEFAULT_BAND,
) -> np.ndarray:
    if not len(angles) == len(sample_bits) == len(best_bits):
        raise ValueError("angles, sample and best bitstrings must share one length")
    step = np.array([delta_theta(int(x), int(b), current_better) for x, b in zip(sample_bits, best_bits)])
    return np.clip(np.asarray(angles, dtype=float) + step, *band)


# --- driver ---------------------------------------------------------------


def check_capacity(k: int, cfg: QacoConfig) -> SubproblemEncoding:
    if k > cfg.max_cities:
        raise DecompositionRequired(
            f"{k} cities exceed the {cfg.max_cities}-city quantum sub-problem cap; decompose first"
        )
    enc = SubproblemEncoding.for_cities(k)
    if enc.num_qubits > qsim.MAX_QUBITS:
        raise DecompositionRequired(f"{k} cities need {enc.num_qubits} qubits (> {qsim.MAX_QUBITS})")
    return enc


def qaco_solve(
    subproblem: TspInstance, cfg: QacoConfig = QacoConfig(), rng: np.random.Generator | None = None
) -> SolveResult:
    """Run the QACO iteration loop on an instance small enough for one register."""
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    enc = check_capacity(subproblem.dimension, cfg)
    dist = subproblem.matrix
    angles = np.full(enc.path_qubits, PI / 2)
    pool = SolutionPool(cfg.pool_capacity)
    best_tour: list[int] | None = None
    best_bits = ""
    best_len = math.inf
    invariant = 0
    trace: list[tuple[int, float]] = []

    for it in range(1, cfg.max_iterations + 1):
        mut = mutation_angle(invariant, cfg.schedule)
        tour, length = None, math.inf
        for _ in range(cfg.shots_per_iteration):
            bits = sample_candidate(angles, mut, enc, cfg.noise, rng)
            cand = repair(bits, it, pool, cfg, rng, enc)
            cand_len = tour_length(dist, cand)
            if cand_len < length:
                tour, length = cand, cand_len
        x_bits = encode_tour(tour, enc)
        pool.add(tour, x_bits, length)

        better = length < best_len
        if best_tour is not None:
            angles = update_pheromone(angles, x_bits, best_bits, better, cfg.clamp_band)
        if better:
            best_tour, best_bits, best_len = tour, x_bits, length
            invariant = 0
        else:
            invariant += 1
        trace.append((it, best_len))

    return SolveResult(best_tour, best_len, trace)
