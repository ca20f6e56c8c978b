"""Exact statevector simulation with rotation, controlled-rotation and CNOT gates.

Qubit 0 is the least significant bit of the amplitude index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ArgumentError, ConfigurationError

MAX_QUBITS = 24

GATE_KINDS = {
    "RX": _kernels.RX,
    "RY": _kernels.RY,
    "RZ": _kernels.RZ,
    "CNOT": _kernels.CNOT,
    "CRX": _kernels.CRX,
    "CRY": _kernels.CRY,
    "CRZ": _kernels.CRZ,
}
_KIND_NAMES = {v: k for k, v in GATE_KINDS.items()}
_CONTROLLED = {"CNOT", "CRX", "CRY", "CRZ"}


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ArgumentError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def apply(self, gate: "GateOp") -> "StateVector":
        """Apply ``gate`` in place and return ``self``."""
        gate.validate(self.n_qubits)
        _kernels.apply_gate_inplace(
            self.amplitudes, self.n_qubits, gate.code,
            -1 if gate.control is None else gate.control, gate.target,
            0.0 if gate.angle is None else gate.angle,
        )
        return self


@dataclass(frozen=True)
class GateOp:
    kind: str
    target: int
    angle: Optional[float] = None
    control: Optional[int] = None

    @property
    def code(self) -> int:
        return GATE_KINDS[self.kind]

    @property
    def controlled(self) -> bool:
        return self.kind in _CONTROLLED

    @property
    def parameterized(self) -> bool:
        return self.kind != "CNOT"

    def inverse(self) -> "GateOp":
        if self.kind == "CNOT":
            return self
        return GateOp(self.kind, self.target, -self.angle, self.control)

    def validate(self, n_qubits: int) -> None:
        if self.kind not in GATE_KINDS:
            raise ArgumentError(f"unknown gate kind {self.kind!r}")
        if not 0 <= self.target < n_qubits:
            raise ArgumentError(f"target {self.target} out of range for {n_qubits} qubits")
        if self.controlled:
            if self.control is None:
                raise ArgumentError(f"{self.kind} needs a control qubit")
            if not 0 <= self.control < n_qubits:
                raise ArgumentError(f"control {self.control} out of range for {n_qubits} qubits")
            if self.control == self.target:
                raise ArgumentError("control and target must differ")
        elif self.control is not None:
            raise ArgumentError(f"{self.kind} takes no control qubit")
        if self.parameterized and self.angle is None:
            raise ArgumentError(f"{self.kind} needs an angle")


def kind_name(code: int) -> str:
    return _KIND_NAMES[code]


def init_zero(n_qubits: int, max_qubits: int = MAX_QUBITS) -> StateVector:
    """|0...0> on ``n_qubits`` qubits."""
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= max_qubits:
        raise ConfigurationError(f"n_qubits must be in [1, {max_qubits}], got {n_qubits!r}")
    amps = np.zeros(1 << int(n_qubits), dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(int(n_qubits), amps)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Return a new state with ``gate`` applied; ``state`` is left untouched."""
    return state.copy().apply(gate)


def run(n_qubits: int, gates) -> StateVector:
    state = init_zero(n_qubits)
    for gate in gates:
        state.apply(gate)
    return state


def expectation(state: StateVector, qubit: int, pauli: str) -> float:
    """<psi| P_qubit |psi> for P in {X, Z}."""
    if not 0 <= qubit < state.n_qubits:
        raise ArgumentError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    pauli = pauli.upper()
    if pauli not in ("X", "Z"):
        raise ArgumentError(f"pauli must be 'X' or 'Z', got {pauli!r}")
    a = state.amplitudes
    idx = np.arange(a.shape[0])
    if pauli == "Z":
        sign = 1.0 - 2.0 * ((idx >> qubit) & 1)
        return float(np.sum(sign * (a.real ** 2 + a.imag ** 2)))
    return float(np.vdot(a, a[idx ^ (1 << qubit)]).real)


def shot_estimate(expectation_value, n_shots: int, rng: np.random.Generator):
    """Finite-shot estimate of a Pauli expectation.

    Draws ``k ~ Binomial(n_shots, (1 + E) / 2)`` and returns ``2k/n_shots - 1``.
    Accepts scalars or arrays (one independent estimate per element).
    """
    if int(n_shots) != n_shots or n_shots < 1:
        raise ArgumentError(f"n_shots must be a positive integer, got {n_shots!r}")
    e = np.asarray(expectation_value, dtype=float)
    if np.any(np.abs(e) > 1.0 + 1e-9):
        raise ArgumentError("expectation values must lie in [-1, 1]")
    p = np.clip(0.5 * (1.0 + e), 0.0, 1.0)
    k = rng.binomial(int(n_shots), p)
    # (2k - n) / n is the correctly rounded value of 2k/n - 1
    est = (2.0 * k - n_shots) / n_shots
    return float(est) if np.ndim(est) == 0 else est
