"""Style-based data re-uploading circuits (simple and BEL) and their latent readout.

Every rotation angle is ``2*pi*tanh(xi_q * W[q, slot] + b[q, slot])`` where
``q`` is the gate's single or control qubit, so the noise vector enters every
layer of the circuit.

Slot layout per qubit (``StyleParams.W[q]``):

* simple: one slot per layer (the layer's RY);
* BEL: five slots per layer (RZ, RY, RZ, forward CRY, reverse CRX) followed
  by one slot for the final RY column.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import ArgumentError, ConfigurationError, ParseError
from .statevector import MAX_QUBITS, GateOp, kind_name

TWO_PI = 2.0 * np.pi
BEL_SLOTS_PER_LAYER = 5


class AnsatzKind(str, enum.Enum):
    SIMPLE = "simple"
    BEL = "bel"


class Readout(str, enum.Enum):
    SINGLE = "single"
    DUAL = "dual"


class NoiseDistribution(str, enum.Enum):
    STANDARD_NORMAL = "normal"
    UNIFORM01 = "uniform"


def _parse_enum(cls, value):
    if isinstance(value, cls):
        return value
    try:
        return cls(str(value).lower())
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigurationError(f"{value!r} is not one of: {choices}") from None


@dataclass(frozen=True)
class GeneratorConfig:
    kind: AnsatzKind = AnsatzKind.BEL
    n_qb: int = 5
    n_layers: int = 2
    readout: Readout = Readout.DUAL
    output_scale: tuple = (1.0, 0.0)
    noise_distribution: NoiseDistribution = NoiseDistribution.STANDARD_NORMAL

    def __post_init__(self):
        object.__setattr__(self, "kind", _parse_enum(AnsatzKind, self.kind))
        object.__setattr__(self, "readout", _parse_enum(Readout, self.readout))
        object.__setattr__(self, "noise_distribution",
                           _parse_enum(NoiseDistribution, self.noise_distribution))
        gain, offset = self.output_scale
        object.__setattr__(self, "output_scale", (float(gain), float(offset)))
        if not 1 <= int(self.n_qb) <= MAX_QUBITS:
            raise ConfigurationError(f"n_qb must be in [1, {MAX_QUBITS}], got {self.n_qb}")
        if int(self.n_layers) < 1:
            raise ConfigurationError(f"n_layers must be >= 1, got {self.n_layers}")

    @property
    def latent_dim(self) -> int:
        return self.n_qb * (2 if self.readout is Readout.DUAL else 1)

    @property
    def dual(self) -> bool:
        return self.readout is Readout.DUAL

    @property
    def n_slots(self) -> int:
        return slots_per_qubit(self.kind, self.n_layers)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n_qb": int(self.n_qb),
            "n_layers": int(self.n_layers),
            "readout": self.readout.value,
            "output_scale": list(self.output_scale),
            "noise_distribution": self.noise_distribution.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        return cls(
            kind=d.get("kind", "bel"),
            n_qb=int(d.get("n_qb", 5)),
            n_layers=int(d.get("n_layers", 2)),
            readout=d.get("readout", "dual"),
            output_scale=tuple(d.get("output_scale", (1.0, 0.0))),
            noise_distribution=d.get("noise_distribution", "normal"),
        )


def slots_per_qubit(kind, n_layers: int) -> int:
    kind = _parse_enum(AnsatzKind, kind)
    if kind is AnsatzKind.SIMPLE:
        return n_layers
    return BEL_SLOTS_PER_LAYER * n_layers + 1


def param_count(kind, n_qb: int, n_l: int) -> int:
    """Trainable scalar count: one weight and one bias per rotation slot."""
    if n_qb < 1 or n_l < 1:
        raise ArgumentError("n_qb and n_l must be >= 1")
    return 2 * n_qb * slots_per_qubit(kind, n_l)


@dataclass
class StyleParams:
    W: np.ndarray
    b: np.ndarray
    kind: AnsatzKind = field(default=AnsatzKind.BEL)
    n_layers: int = 1

    def __post_init__(self):
        self.kind = _parse_enum(AnsatzKind, self.kind)
        self.W = np.asarray(self.W, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.W.shape != self.b.shape or self.W.ndim != 2:
            raise ArgumentError(f"W and b must be equal 2-D shapes, got {self.W.shape}, {self.b.shape}")
        if self.W.shape[1] != slots_per_qubit(self.kind, self.n_layers):
            raise ArgumentError(
                f"{self.kind.value} with {self.n_layers} layers needs "
                f"{slots_per_qubit(self.kind, self.n_layers)} slots per qubit, got {self.W.shape[1]}"
            )

    @property
    def n_qb(self) -> int:
        return self.W.shape[0]

    @property
    def size(self) -> int:
        return self.W.size + self.b.size

    @classmethod
    def zeros(cls, config: GeneratorConfig) -> "StyleParams":
        shape = (config.n_qb, config.n_slots)
        return cls(np.zeros(shape), np.zeros(shape), config.kind, config.n_layers)

    @classmethod
    def random(cls, config: GeneratorConfig, rng: np.random.Generator, scale: float = 1.0):
        """W and b drawn i.i.d. from Uniform(-scale, scale)."""
        shape = (config.n_qb, config.n_slots)
        W = rng.uniform(-scale, scale, size=shape)
        b = rng.uniform(-scale, scale, size=shape)
        return cls(W, b, config.kind, config.n_layers)

    def copy(self) -> "StyleParams":
        return StyleParams(self.W.copy(), self.b.copy(), self.kind, self.n_layers)

    def check(self, config: GeneratorConfig) -> None:
        if (self.kind is not config.kind or self.n_layers != config.n_layers
                or self.W.shape != (config.n_qb, config.n_slots)):
            raise ArgumentError(
                f"params ({self.kind.value}, W{self.W.shape}, {self.n_layers} layers) do not match "
                f"config ({config.kind.value}, n_qb={config.n_qb}, n_l={config.n_layers})"
            )


@dataclass(frozen=True)
class CircuitTemplate:
    """Gate program of an ansatz with the (qubit, slot) feeding each angle."""

    n_qb: int
    kinds: np.ndarray
    ctrls: np.ndarray
    tgts: np.ndarray
    param_gates: np.ndarray  # gate positions carrying a style angle, emission order
    slot_qubit: np.ndarray   # per parameterized gate: qubit whose noise/W row is used
    slot_index: np.ndarray   # per parameterized gate: slot within that row

    @property
    def n_gates(self) -> int:
        return len(self.kinds)

    @property
    def n_angles(self) -> int:
        return len(self.param_gates)


def _ring(n_qb: int, offset: int):
    """(control, target) pairs of a ring; degenerate for one or two qubits."""
    if n_qb == 1:
        return []
    return [(q, (q + offset) % n_qb) for q in range(n_qb)]


@lru_cache(maxsize=None)
def circuit_template(kind, n_qb: int, n_layers: int) -> CircuitTemplate:
    kind = _parse_enum(AnsatzKind, kind)
    kinds, ctrls, tgts, slot_q, slot_k, pgates = [], [], [], [], [], []

    def emit(code, ctrl, tgt, q=None, slot=None):
        if q is not None:
            pgates.append(len(kinds))
            slot_q.append(q)
            slot_k.append(slot)
        kinds.append(code)
        ctrls.append(ctrl)
        tgts.append(tgt)

    if kind is AnsatzKind.SIMPLE:
        for layer in range(n_layers):
            for q in range(n_qb):
                emit(_kernels.RY, -1, q, q, layer)
            pairs = [(0, 1)] if n_qb == 2 else _ring(n_qb, 1)
            for c, t in pairs:
                emit(_kernels.CNOT, c, t)
    else:
        for layer in range(n_layers):
            base = BEL_SLOTS_PER_LAYER * layer
            for q in range(n_qb):
                emit(_kernels.RZ, -1, q, q, base)
                emit(_kernels.RY, -1, q, q, base + 1)
                emit(_kernels.RZ, -1, q, q, base + 2)
            for c, t in _ring(n_qb, 1):
                emit(_kernels.CRY, c, t, c, base + 3)
            for c, t in _ring(n_qb, -1):
                emit(_kernels.CRX, c, t, c, base + 4)
        final = BEL_SLOTS_PER_LAYER * n_layers
        for q in range(n_qb):
            emit(_kernels.RY, -1, q, q, final)

    as_int = lambda xs: np.asarray(xs, dtype=np.int64)  # noqa: E731
    return CircuitTemplate(n_qb, as_int(kinds), as_int(ctrls), as_int(tgts),
                           as_int(pgates), as_int(slot_q), as_int(slot_k))


def angle(xi_q, w, b):
    """Style angle ``2*pi*tanh(xi_q*w + b)``; broadcasts over arrays."""
    return TWO_PI * np.tanh(np.multiply(xi_q, w) + b)


def _check_noise(config: GeneratorConfig, noise) -> np.ndarray:
    noise = np.asarray(noise, dtype=float)
    if noise.shape[-1] != config.n_qb:
        raise ArgumentError(f"noise must have {config.n_qb} entries per sample, got {noise.shape}")
    return noise


def style_preactivations(config: GeneratorConfig, params: StyleParams, noise) -> np.ndarray:
    """``xi_q * W + b`` per parameterized gate; shape (samples, n_angles)."""
    params.check(config)
    noise = np.atleast_2d(_check_noise(config, noise))
    tpl = circuit_template(config.kind, config.n_qb, config.n_layers)
    w = params.W[tpl.slot_qubit, tpl.slot_index]
    b = params.b[tpl.slot_qubit, tpl.slot_index]
    return noise[:, tpl.slot_qubit] * w + b


def gate_angles(config: GeneratorConfig, params: StyleParams, noise) -> np.ndarray:
    """Angles for every gate of the template (zeros at CNOT positions)."""
    tpl = circuit_template(config.kind, config.n_qb, config.n_layers)
    theta = TWO_PI * np.tanh(style_preactivations(config, params, noise))
    full = np.zeros((theta.shape[0], tpl.n_gates))
    full[:, tpl.param_gates] = theta
    return full


def build_circuit(config: GeneratorConfig, noise, params: StyleParams) -> list:
    """Ordered gate list for one noise vector."""
    noise = _check_noise(config, noise)
    if noise.ndim != 1:
        raise ArgumentError("build_circuit takes a single noise vector")
    tpl = circuit_template(config.kind, config.n_qb, config.n_layers)
    theta = gate_angles(config, params, noise)[0]
    gates = []
    for g in range(tpl.n_gates):
        name = kind_name(int(tpl.kinds[g]))
        ctrl = int(tpl.ctrls[g])
        gates.append(GateOp(
            name, int(tpl.tgts[g]),
            angle=None if name == "CNOT" else float(theta[g]),
            control=None if ctrl < 0 else ctrl,
        ))
    return gates


def apply_output_scale(config: GeneratorConfig, raw):
    gain, offset = config.output_scale
    return gain * raw + offset


def raw_latent(config: GeneratorConfig, params: StyleParams, noise) -> np.ndarray:
    """Pre-scale readout for a batch of noise vectors; shape (samples, latent_dim)."""
    tpl = circuit_template(config.kind, config.n_qb, config.n_layers)
    theta = gate_angles(config, params, noise)
    psi = _kernels.simulate(config.n_qb, tpl.kinds, tpl.ctrls, tpl.tgts, theta)
    return _kernels.readout(psi, config.n_qb, config.dual)


def generate_latent(config: GeneratorConfig, params: StyleParams, noise) -> np.ndarray:
    """Latent vector for one noise vector: Z block, then X block for dual readout."""
    noise = _check_noise(config, noise)
    if noise.ndim != 1:
        raise ArgumentError("generate_latent takes a single noise vector")
    return apply_output_scale(config, raw_latent(config, params, noise)[0])


def draw_noise(config: GeneratorConfig, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    if config.noise_distribution is NoiseDistribution.UNIFORM01:
        return rng.uniform(0.0, 1.0, size=(n_samples, config.n_qb))
    return rng.standard_normal(size=(n_samples, config.n_qb))


def generate_batch(config: GeneratorConfig, params: StyleParams, n_samples: int,
                   rng: np.random.Generator) -> np.ndarray:
    if int(n_samples) < 1:
        raise ArgumentError(f"n_samples must be >= 1, got {n_samples}")
    noise = draw_noise(config, int(n_samples), rng)
    return apply_output_scale(config, raw_latent(config, params, noise))


# ---------------------------------------------------------------------------
# checkpoint

_HEADER = ["kind", "n_qb", "n_l", "readout", "gain", "offset", "noise"]


def save_style_params(path, config: GeneratorConfig, params: StyleParams) -> None:
    """Flat CSV: header row, config row, then ``W,<v>`` and ``b,<v>`` lines in (q, l, k) order."""
    params.check(config)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_HEADER)
        gain, offset = config.output_scale
        w.writerow([config.kind.value, config.n_qb, config.n_layers, config.readout.value,
                    repr(gain), repr(offset), config.noise_distribution.value])
        for v in params.W.ravel():
            w.writerow(["W", repr(float(v))])
        for v in params.b.ravel():
            w.writerow(["b", repr(float(v))])


def load_style_params(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2 or rows[0] != _HEADER:
        raise ParseError(f"{Path(path).name}: not a style-parameter checkpoint", line=1)
    kind, n_qb, n_l, readout, gain, offset, noise = rows[1]
    try:
        config = GeneratorConfig(kind, int(n_qb), int(n_l), readout,
                                 (float(gain), float(offset)), noise)
    except ValueError as exc:
        raise ParseError(str(exc), line=2) from None
    values = {"W": [], "b": []}
    for lineno, row in enumerate(rows[2:], start=3):
        if len(row) != 2 or row[0] not in values:
            raise ParseError(f"expected 'W,<value>' or 'b,<value>', got {row!r}", line=lineno)
        try:
            values[row[0]].append(float(row[1]))
        except ValueError:
            raise ParseError(f"non-numeric value {row[1]!r}", line=lineno) from None
    shape = (config.n_qb, config.n_slots)
    size = shape[0] * shape[1]
    if len(values["W"]) != size or len(values["b"]) != size:
        raise ParseError(f"expected {size} W and {size} b values")
    params = StyleParams(np.reshape(values["W"], shape), np.reshape(values["b"], shape),
                         config.kind, config.n_layers)
    return config, params
