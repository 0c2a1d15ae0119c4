"""Small statevector simulator: Ry, X, multi-controlled NOT and trajectory noise.

Qubit 0 is the most significant bit of a basis string, so basis index
``int("b0 b1 ... b_{n-1}", 2)`` holds the amplitude of ``|b0 b1 ... b_{n-1}>``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError

MAX_QUBITS = 24


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


class NoiseModel(str, enum.Enum):
    NONE = "none"
    BIT_FLIP = "bitflip"
    THERMAL_RELAXATION = "thermal"


class NoisePlacement(str, enum.Enum):
    AFTER_MULTI_QUBIT_GATES = "multi"
    AFTER_ALL_GATES = "all"


@dataclass(frozen=True)
class NoiseSpec:
    model: NoiseModel = NoiseModel.NONE
    rate: float = 0.0
    placement: NoisePlacement = NoisePlacement.AFTER_MULTI_QUBIT_GATES

    def __post_init__(self):
        object.__setattr__(self, "model", NoiseModel(self.model))
        object.__setattr__(self, "placement", NoisePlacement(self.placement))
        if not 0.0 <= self.rate <= 1.0:
            raise ConfigError(f"noise rate must lie in [0, 1], got {self.rate}")

    @property
    def active(self) -> bool:
        return self.model is not NoiseModel.NONE and self.rate > 0.0

    @classmethod
    def parse(cls, text: str) -> NoiseSpec:
        """``"bitflip:0.01"`` / ``"thermal:0.1"`` / ``"none"``."""
        model, _, rate = text.partition(":")
        try:
            return cls(NoiseModel(model.strip().lower()), float(rate) if rate else 0.0)
        except ValueError as exc:
            raise ConfigError(f"bad noise spec {text!r}: {exc}") from None


NOISELESS = NoiseSpec()


def init_state(num_qubits: int) -> StateVector:
    if not isinstance(num_qubits, (int, np.integer)) or not 1 <= num_qubits <= MAX_QUBITS:
        raise ConfigError(f"qubit count must be in [1, {MAX_QUBITS}], got {num_qubits!r}")
    amps = np.zeros(2**num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(int(num_qubits), amps)


def _check_qubit(state: StateVector, q: int) -> None:
    if not 0 <= q < state.num_qubits:
        raise IndexError(f"qubit {q} out of range for {state.num_qubits}-qubit register")


def apply_ry(state: StateVector, qubit: int, angle: float) -> StateVector:
    """Half-angle Y rotation: |0> -> cos(a/2)|0> + sin(a/2)|1>."""
    _check_qubit(state, qubit)
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    v = state.amplitudes.reshape(2**qubit, 2, -1)
    out = np.empty_like(v)
    out[:, 0, :] = c * v[:, 0, :] - s * v[:, 1, :]
    out[:, 1, :] = s * v[:, 0, :] + c * v[:, 1, :]
    return StateVector(state.num_qubits, out.reshape(-1))


def apply_x(state: StateVector, qubit: int) -> StateVector:
    _check_qubit(state, qubit)
    v = state.amplitudes.reshape(2**qubit, 2, -1)
    return StateVector(state.num_qubits, v[:, ::-1, :].reshape(-1).copy())


def apply_cnot(state: StateVector, controls: Sequence[int], target: int) -> StateVector:
    """Flip ``target`` on every basis state where all ``controls`` are 1."""
    controls = [int(c) for c in controls]
    if len(controls) > 3:
        raise ValueError("at most 3 controls are supported")
    for q in (*controls, target):
        _check_qubit(state, q)
    if len(set(controls)) != len(controls) or target in controls:
        raise ValueError(f"controls {controls} and target {target} must be distinct")
    psi = state.tensor().copy()
    sel: list = [slice(None)] * state.num_qubits
    for c in controls:
        sel[c] = 1
    lo, hi = list(sel), list(sel)
    lo[target], hi[target] = 0, 1
    lo, hi = tuple(lo), tuple(hi)
    psi[lo], psi[hi] = psi[hi].copy(), psi[lo].copy()
    return StateVector(state.num_qubits, psi.reshape(-1))


def probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def basis_string(index: int, num_qubits: int) -> str:
    return format(index, f"0{num_qubits}b")


def sample(state: StateVector, rng: np.random.Generator) -> str:
    p = probabilities(state)
    p = p / p.sum()
    idx = int(rng.choice(len(p), p=p))
    return basis_string(idx, state.num_qubits)


def _marginal_one(state: StateVector, qubit: int) -> float:
    v = state.amplitudes.reshape(2**qubit, 2, -1)
    return float((np.abs(v[:, 1, :]) ** 2).sum())


def _amplitude_damp(state: StateVector, qubit: int, gamma: float, rng) -> StateVector:
    v = state.amplitudes.reshape(2**qubit, 2, -1)
    p_decay = gamma * _marginal_one(state, qubit)
    out = np.zeros_like(v)
    if rng.random() < p_decay:
        # K1 = sqrt(gamma) |0><1|
        out[:, 0, :] = np.sqrt(gamma) * v[:, 1, :]
        norm = p_decay
    else:
        # K0 = diag(1, sqrt(1 - gamma))
        out[:, 0, :] = v[:, 0, :]
        out[:, 1, :] = np.sqrt(1.0 - gamma) * v[:, 1, :]
        norm = 1.0 - p_decay
    return StateVector(state.num_qubits, (out / np.sqrt(norm)).reshape(-1))


def apply_noise(
    state: StateVector, spec: NoiseSpec, touched_qubits: Sequence[int], rng: np.random.Generator
) -> StateVector:
    """One stochastic trajectory of the noise channel on each touched qubit.

    Inactive specs return the input untouched and draw nothing from ``rng``,
    so a zero-rate run consumes the same random stream as a noiseless one.
    """
    if not spec.active:
        return state
    for q in touched_qubits:
        _check_qubit(state, q)
        if spec.model is NoiseModel.BIT_FLIP:
            if rng.random() < spec.rate:
                state = apply_x(state, q)
        else:
            state = _amplitude_damp(state, q, spec.rate, rng)
    return state


class Circuit:
    """Gate list replayed on a fresh register, with noise inserted per ``NoiseSpec``."""

    def __init__(self, num_qubits: int):
        self.num_qubits = num_qubits
        self.ops: list[tuple] = []

    def ry(self, qubit: int, angle: float) -> Circuit:
        self.ops.append(("ry", qubit, float(angle)))
        return self

    def x(self, qubit: int) -> Circuit:
        self.ops.append(("x", qubit))
        return self

    def cnot(self, controls: Sequence[int], target: int) -> Circuit:
        self.ops.append(("cnot", tuple(controls), target))
        return self

    def run(self, noise: NoiseSpec = NOISELESS, rng: np.random.Generator | None = None) -> StateVector:
        state = init_state(self.num_qubits)
        every_gate = noise.placement is NoisePlacement.AFTER_ALL_GATES
        for op in self.ops:
            kind = op[0]
            if kind == "ry":
                state = apply_ry(state, op[1], op[2])
                touched = [op[1]] if every_gate else []
            elif kind == "x":
                state = apply_x(state, op[1])
                touched = [op[1]] if every_gate else []
            else:
                state = apply_cnot(state, op[1], op[2])
                touched = [*op[1], op[2]]
            if touched and noise.active:
                if rng is None:
                    raise ValueError("a random generator is required for noisy simulation")
                state = apply_noise(state, noise, touched, rng)
        return state
