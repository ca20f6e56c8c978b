"""Forward-only GRU machinery: cell step, sequence fold, bidirectional encoding, inter-layer dropout.

Dropout multiplies by a Bernoulli keep mask and does not rescale survivors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

_INPUT = ("W_r", "W_z", "W_n")
_RECURRENT = ("U_r", "U_z", "U_n")
_BIAS = ("b_r", "b_z", "b_n", "b_nu")


@dataclass(frozen=True)
class GruWeights:
    W_r: np.ndarray
    W_z: np.ndarray
    W_n: np.ndarray
    U_r: np.ndarray
    U_z: np.ndarray
    U_n: np.ndarray
    b_r: np.ndarray
    b_z: np.ndarray
    b_n: np.ndarray
    b_nu: np.ndarray

    def __post_init__(self):
        for name in _INPUT + _RECURRENT + _BIAS:
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        h, d = self.W_r.shape if self.W_r.ndim == 2 else (None, None)
        if h is None:
            raise ArgumentError("W_r must be a matrix")
        for name in _INPUT:
            if getattr(self, name).shape != (h, d):
                raise ArgumentError(f"{name} has shape {getattr(self, name).shape}, expected {(h, d)}")
        for name in _RECURRENT:
            if getattr(self, name).shape != (h, h):
                raise ArgumentError(f"{name} has shape {getattr(self, name).shape}, expected {(h, h)}")
        for name in _BIAS:
            if getattr(self, name).shape != (h,):
                raise ArgumentError(f"{name} has shape {getattr(self, name).shape}, expected {(h,)}")

    @property
    def hidden_dim(self) -> int:
        return self.W_r.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W_r.shape[1]

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int) -> "GruWeights":
        mats = {n: np.zeros((hidden_dim, input_dim)) for n in _INPUT}
        mats.update({n: np.zeros((hidden_dim, hidden_dim)) for n in _RECURRENT})
        mats.update({n: np.zeros(hidden_dim) for n in _BIAS})
        return cls(**mats)

    @classmethod
    def random(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator,
               scale: float | None = None) -> "GruWeights":
        """Uniform(+-1/sqrt(hidden_dim)) entries unless ``scale`` is given."""
        s = 1.0 / np.sqrt(hidden_dim) if scale is None else scale
        mats = {n: rng.uniform(-s, s, (hidden_dim, input_dim)) for n in _INPUT}
        mats.update({n: rng.uniform(-s, s, (hidden_dim, hidden_dim)) for n in _RECURRENT})
        mats.update({n: rng.uniform(-s, s, hidden_dim) for n in _BIAS})
        return cls(**mats)

    def replace(self, **changes) -> "GruWeights":
        fields = {n: getattr(self, n) for n in _INPUT + _RECURRENT + _BIAS}
        fields.update(changes)
        return GruWeights(**fields)


def _sigmoid(x):
    # split by sign so large |x| never overflows exp
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def gates(x_t, h_prev, w: GruWeights):
    """Reset gate, update gate and candidate state ``(r, z, n)`` for one step."""
    x_t = np.asarray(x_t, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    if x_t.shape != (w.input_dim,):
        raise ArgumentError(f"input has shape {x_t.shape}, expected ({w.input_dim},)")
    if h_prev.shape != (w.hidden_dim,):
        raise ArgumentError(f"hidden state has shape {h_prev.shape}, expected ({w.hidden_dim},)")
    r = _sigmoid(w.W_r @ x_t + w.U_r @ h_prev + w.b_r)
    z = _sigmoid(w.W_z @ x_t + w.U_z @ h_prev + w.b_z)
    n = np.tanh(w.W_n @ x_t + w.b_n + r * (w.U_n @ h_prev + w.b_nu))
    return r, z, n


def gru_step(x_t, h_prev, w: GruWeights) -> np.ndarray:
    _, z, n = gates(x_t, h_prev, w)
    return (1.0 - z) * n + z * np.asarray(h_prev, dtype=float)


def gru_sequence(inputs, h0, w: GruWeights):
    """Fold ``gru_step`` over ``inputs``; returns ``(h_final, trace)`` with trace shape (T, D_h)."""
    h = np.asarray(h0, dtype=float)
    if h.shape != (w.hidden_dim,):
        raise ArgumentError(f"h0 has shape {h.shape}, expected ({w.hidden_dim},)")
    trace = []
    for x_t in inputs:
        h = gru_step(x_t, h, w)
        trace.append(h)
    if not trace:
        return h.copy(), np.empty((0, w.hidden_dim))
    return h, np.stack(trace)


def bidirectional(inputs, h0_fwd, h0_bwd, w_fwd: GruWeights, w_bwd: GruWeights) -> np.ndarray:
    """Concatenation ``[forward final, backward final]`` of length ``2 * D_h``."""
    seq = list(inputs)
    fwd, _ = gru_sequence(seq, h0_fwd, w_fwd)
    bwd, _ = gru_sequence(seq[::-1], h0_bwd, w_bwd)
    return np.concatenate([fwd, bwd])


def dropout_between_layers(h, p: float, rng: np.random.Generator) -> np.ndarray:
    """Zero each element with probability ``p``; survivors are kept as is."""
    if not 0.0 <= p < 1.0:
        raise ArgumentError(f"dropout probability must lie in [0, 1), got {p}")
    h = np.asarray(h, dtype=float)
    if p == 0.0:
        return h.copy()
    keep = rng.random(h.shape) >= p
    return np.where(keep, h, 0.0)
