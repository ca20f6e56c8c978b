"""Exact gradients of the readout with respect to circuit angles and style parameters.

The adjoint sweep is the training path. The parameter-shift rule (two-term
for single-qubit rotations, four-term for controlled rotations) is kept as an
independent cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .ansatz import (TWO_PI, GeneratorConfig, StyleParams, _check_noise,
                     circuit_template, gate_angles, style_preactivations)
from .errors import ArgumentError


@dataclass
class AngleJacobian:
    """d(pre-scale readout)/d(angle); rows are outputs, columns are angles in emission order."""

    matrix: np.ndarray
    values: np.ndarray

    @property
    def shape(self):
        return self.matrix.shape


def angle_jacobian(config: GeneratorConfig, params: StyleParams, noise) -> AngleJacobian:
    noise = _check_noise(config, noise)
    if noise.ndim != 1:
        raise ArgumentError("angle_jacobian takes a single noise vector")
    tpl = circuit_template(config.kind, config.n_qb, config.n_layers)
    theta = gate_angles(config, params, noise)
    out, jac = _kernels.jacobian(config.n_qb, tpl.kinds, tpl.ctrls, tpl.tgts, theta, config.dual)
    return AngleJacobian(jac[0][:, tpl.param_gates], out[0])


def _sech2(u):
    # 1 - tanh(u)**2 without the cancellation at large |u|
    return 1.0 / np.cosh(np.clip(u, -350.0, 350.0)) ** 2


def _scatter(config: GeneratorConfig, per_angle: np.ndarray) -> np.ndarray:
    tpl = circuit_template(config.kind, config.n_qb, config.n_layers)
    out = np.zeros((config.n_qb, config.n_slots))
    np.add.at(out, (tpl.slot_qubit, tpl.slot_index), per_angle)
    return out


def style_chain(jac: AngleJacobian, noise, params: StyleParams, upstream,
                config: GeneratorConfig | None = None):
    """Chain ``dL/d(latent)`` through the readout, style map and output gain to (dL/dW, dL/db)."""
    if config is None:
        config = GeneratorConfig(params.kind, params.n_qb, params.n_layers,
                                 "dual" if jac.matrix.shape[0] == 2 * params.n_qb else "single")
    upstream = np.asarray(upstream, dtype=float)
    if upstream.shape != (jac.matrix.shape[0],):
        raise ArgumentError(f"upstream must have shape ({jac.matrix.shape[0]},), got {upstream.shape}")
    gain = config.output_scale[0]
    d_theta = gain * (upstream @ jac.matrix)
    u = style_preactivations(config, params, noise)[0]
    d_u = d_theta * TWO_PI * _sech2(u)
    tpl = circuit_template(config.kind, config.n_qb, config.n_layers)
    xi = np.asarray(noise, dtype=float)[tpl.slot_qubit]
    return _scatter(config, d_u * xi), _scatter(config, d_u)


def style_vjp(config: GeneratorConfig, params: StyleParams, noise, upstream):
    """Batched (dL/dW, dL/db) for ``upstream = dL/d(latent)`` of shape (samples, latent_dim).

    One forward and one adjoint sweep per sample; contributions are summed
    in sample order. Also returns the pre-scale readout.
    """
    noise = np.atleast_2d(_check_noise(config, noise))
    upstream = np.atleast_2d(np.asarray(upstream, dtype=float))
    if upstream.shape != (noise.shape[0], config.latent_dim):
        raise ArgumentError(f"upstream shape {upstream.shape} != ({noise.shape[0]}, {config.latent_dim})")
    tpl = circuit_template(config.kind, config.n_qb, config.n_layers)
    u = style_preactivations(config, params, noise)
    theta = np.zeros((noise.shape[0], tpl.n_gates))
    theta[:, tpl.param_gates] = TWO_PI * np.tanh(u)
    gain = config.output_scale[0]
    raw, g_theta = _kernels.vjp(config.n_qb, tpl.kinds, tpl.ctrls, tpl.tgts, theta,
                                config.dual, gain * upstream)
    d_u = g_theta[:, tpl.param_gates] * TWO_PI * _sech2(u)
    xi = noise[:, tpl.slot_qubit]
    dW = _scatter(config, (d_u * xi).sum(axis=0))
    db = _scatter(config, d_u.sum(axis=0))
    return dW, db, raw


# ---------------------------------------------------------------------------
# parameter-shift cross-check

_C_PLUS = (np.sqrt(2.0) + 1.0) / (4.0 * np.sqrt(2.0))
_C_MINUS = (np.sqrt(2.0) - 1.0) / (4.0 * np.sqrt(2.0))


def _readout_at(config, tpl, theta_rows):
    psi = _kernels.simulate(config.n_qb, tpl.kinds, tpl.ctrls, tpl.tgts, theta_rows)
    return _kernels.readout(psi, config.n_qb, config.dual)


def parameter_shift_jacobian(config: GeneratorConfig, params: StyleParams, noise) -> AngleJacobian:
    """Same quantity as ``angle_jacobian`` computed purely from shifted circuit evaluations."""
    noise = _check_noise(config, noise)
    tpl = circuit_template(config.kind, config.n_qb, config.n_layers)
    theta = gate_angles(config, params, noise)[0]
    controlled = tpl.kinds[tpl.param_gates] >= _kernels.CRX
    rows = []
    for col, g in enumerate(tpl.param_gates):
        shifts = (np.pi / 2, -np.pi / 2, 3 * np.pi / 2, -3 * np.pi / 2) if controlled[col] \
            else (np.pi / 2, -np.pi / 2)
        for s in shifts:
            t = theta.copy()
            t[g] += s
            rows.append(t)
    values = _readout_at(config, tpl, np.array(rows))
    jac = np.zeros((config.latent_dim, tpl.n_angles))
    pos = 0
    for col in range(tpl.n_angles):
        if controlled[col]:
            fp, fm, fp3, fm3 = values[pos:pos + 4]
            jac[:, col] = _C_PLUS * (fp - fm) - _C_MINUS * (fp3 - fm3)
            pos += 4
        else:
            fp, fm = values[pos:pos + 2]
            jac[:, col] = 0.5 * (fp - fm)
            pos += 2
    base = _readout_at(config, tpl, theta[None, :])[0]
    return AngleJacobian(jac, base)
