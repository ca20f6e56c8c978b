"""Statevector kernels: gate application, Pauli readout and adjoint sweeps.

Every routine exists twice: a numba version that loops over amplitude pairs
and a numpy version vectorized over the sample axis. The public names at the
bottom of the module point at whichever backend ``_accel`` selected.

Conventions shared by both paths:

* little-endian qubit order, qubit ``q`` is bit ``q`` of the amplitude index;
* gate kinds are small integers (see ``RX`` ... ``CRZ``), ``ctrl = -1`` for
  single-qubit gates, CNOT ignores its angle;
* readout rows are ``[<Z_0>..<Z_{n-1}>]`` optionally followed by
  ``[<X_0>..<X_{n-1}>]``.
"""
from functools import lru_cache
from math import cos, sin

import numpy as np

from ._accel import HAS_NUMBA, njit

RX, RY, RZ, CNOT, CRX, CRY, CRZ = range(7)


# ---------------------------------------------------------------------------
# numba path


@njit
def _coeffs(kind, theta):
    if kind == CNOT:
        return 0j, 1 + 0j, 1 + 0j, 0j
    base = kind if kind < 3 else kind - 4
    c = cos(0.5 * theta)
    s = sin(0.5 * theta)
    if base == 0:
        return c + 0j, -1j * s, -1j * s, c + 0j
    if base == 1:
        return c + 0j, -s + 0j, s + 0j, c + 0j
    return complex(c, -s), 0j, 0j, complex(c, s)


@njit
def _apply_row(a, kind, ctrl, tgt, theta):
    m00, m01, m10, m11 = _coeffs(kind, theta)
    step = 1 << tgt
    cmask = (1 << ctrl) if ctrl >= 0 else 0
    for i in range(a.shape[0]):
        if i & step:
            continue
        if cmask and not (i & cmask):
            continue
        j = i | step
        a0 = a[i]
        a1 = a[j]
        a[i] = m00 * a0 + m01 * a1
        a[j] = m10 * a0 + m11 * a1


@njit
def _generator_overlap(lam, phi, kind, ctrl, tgt):
    # <lam| P_tgt (projected on ctrl=1) |phi>
    base = kind if kind < 3 else kind - 4
    step = 1 << tgt
    cmask = (1 << ctrl) if ctrl >= 0 else 0
    acc = 0j
    for i in range(phi.shape[0]):
        if i & step:
            continue
        if cmask and not (i & cmask):
            continue
        j = i | step
        li = lam[i].conjugate()
        lj = lam[j].conjugate()
        if base == 0:
            acc += li * phi[j] + lj * phi[i]
        elif base == 1:
            acc += -1j * li * phi[j] + 1j * lj * phi[i]
        else:
            acc += li * phi[i] - lj * phi[j]
    return acc


@njit
def _readout_row(a, nq, dual, out):
    for q in range(nq):
        step = 1 << q
        z = 0.0
        x = 0.0
        for i in range(a.shape[0]):
            p = a[i].real * a[i].real + a[i].imag * a[i].imag
            if i & step:
                z -= p
            else:
                z += p
                if dual:
                    x += 2.0 * (a[i].conjugate() * a[i | step]).real
        out[q] = z
        if dual:
            out[nq + q] = x


@njit
def _observable_row(a, nq, dual, weights, out):
    # out = (sum_q w_q Z_q + sum_q w_{n+q} X_q) a
    for i in range(a.shape[0]):
        acc = 0j
        for q in range(nq):
            if (i >> q) & 1:
                acc -= weights[q] * a[i]
            else:
                acc += weights[q] * a[i]
            if dual:
                acc += weights[nq + q] * a[i ^ (1 << q)]
        out[i] = acc


@njit
def _pauli_row(a, nq, index, out):
    # out = O_index a, O_index = Z_index (index < nq) or X_{index-nq}
    if index < nq:
        for i in range(a.shape[0]):
            if (i >> index) & 1:
                out[i] = -a[i]
            else:
                out[i] = a[i]
    else:
        flip = 1 << (index - nq)
        for i in range(a.shape[0]):
            out[i] = a[i ^ flip]


@njit
def _simulate_numba(nq, kinds, ctrls, tgts, angles):
    n_samples = angles.shape[0]
    dim = 1 << nq
    psi = np.zeros((n_samples, dim), dtype=np.complex128)
    for s in range(n_samples):
        psi[s, 0] = 1.0
        for g in range(kinds.shape[0]):
            _apply_row(psi[s], kinds[g], ctrls[g], tgts[g], angles[s, g])
    return psi


@njit
def _readout_numba(psi, nq, dual):
    width = 2 * nq if dual else nq
    out = np.empty((psi.shape[0], width))
    for s in range(psi.shape[0]):
        _readout_row(psi[s], nq, dual, out[s])
    return out


@njit
def _jacobian_numba(nq, kinds, ctrls, tgts, angles, dual):
    n_samples, n_gates = angles.shape
    dim = 1 << nq
    width = 2 * nq if dual else nq
    out = np.empty((n_samples, width))
    jac = np.zeros((n_samples, width, n_gates))
    phi = np.empty(dim, dtype=np.complex128)
    lam = np.empty((width, dim), dtype=np.complex128)
    for s in range(n_samples):
        phi[:] = 0.0
        phi[0] = 1.0
        for g in range(n_gates):
            _apply_row(phi, kinds[g], ctrls[g], tgts[g], angles[s, g])
        _readout_row(phi, nq, dual, out[s])
        for j in range(width):
            _pauli_row(phi, nq, j, lam[j])
        for g in range(n_gates - 1, -1, -1):
            k = kinds[g]
            if k != CNOT:
                for j in range(width):
                    jac[s, j, g] = _generator_overlap(lam[j], phi, k, ctrls[g], tgts[g]).imag
            _apply_row(phi, k, ctrls[g], tgts[g], -angles[s, g])
            for j in range(width):
                _apply_row(lam[j], k, ctrls[g], tgts[g], -angles[s, g])
    return out, jac


@njit
def _vjp_numba(nq, kinds, ctrls, tgts, angles, dual, upstream):
    n_samples, n_gates = angles.shape
    dim = 1 << nq
    width = 2 * nq if dual else nq
    out = np.empty((n_samples, width))
    grad = np.zeros((n_samples, n_gates))
    phi = np.empty(dim, dtype=np.complex128)
    lam = np.empty(dim, dtype=np.complex128)
    for s in range(n_samples):
        phi[:] = 0.0
        phi[0] = 1.0
        for g in range(n_gates):
            _apply_row(phi, kinds[g], ctrls[g], tgts[g], angles[s, g])
        _readout_row(phi, nq, dual, out[s])
        _observable_row(phi, nq, dual, upstream[s], lam)
        for g in range(n_gates - 1, -1, -1):
            k = kinds[g]
            if k != CNOT:
                grad[s, g] = _generator_overlap(lam, phi, k, ctrls[g], tgts[g]).imag
            _apply_row(phi, k, ctrls[g], tgts[g], -angles[s, g])
            _apply_row(lam, k, ctrls[g], tgts[g], -angles[s, g])
    return out, grad


# ---------------------------------------------------------------------------
# numpy path


@lru_cache(maxsize=None)
def _pair_indices(nq, ctrl, tgt):
    idx = np.arange(1 << nq)
    keep = (idx >> tgt) & 1 == 0
    if ctrl >= 0:
        keep &= (idx >> ctrl) & 1 == 1
    i0 = idx[keep]
    return i0, i0 | (1 << tgt)


def _coeffs_np(kind, theta):
    theta = np.asarray(theta, dtype=float)
    if kind == CNOT:
        zero = np.zeros_like(theta, dtype=complex)
        return zero, zero + 1, zero + 1, zero
    base = kind if kind < 3 else kind - 4
    c = np.cos(0.5 * theta).astype(complex)
    s = np.sin(0.5 * theta)
    if base == 0:
        return c, -1j * s, -1j * s, c
    if base == 1:
        return c, (-s).astype(complex), s.astype(complex), c
    return np.exp(-0.5j * theta), np.zeros_like(c), np.zeros_like(c), np.exp(0.5j * theta)


def _apply_rows_np(a, nq, kind, ctrl, tgt, theta):
    """Apply one gate to every row of ``a`` (shape rows x 2**nq), in place."""
    i0, i1 = _pair_indices(nq, int(ctrl), int(tgt))
    m00, m01, m10, m11 = (m[:, None] for m in _coeffs_np(kind, theta))
    a0 = a[:, i0]
    a1 = a[:, i1]
    a[:, i0] = m00 * a0 + m01 * a1
    a[:, i1] = m10 * a0 + m11 * a1


def _generator_overlap_np(lam, phi, nq, kind, ctrl, tgt):
    i0, i1 = _pair_indices(nq, int(ctrl), int(tgt))
    base = kind if kind < 3 else kind - 4
    l0 = lam[..., i0].conj()
    l1 = lam[..., i1].conj()
    p0 = phi[..., i0]
    p1 = phi[..., i1]
    if base == 0:
        val = l0 * p1 + l1 * p0
    elif base == 1:
        val = -1j * l0 * p1 + 1j * l1 * p0
    else:
        val = l0 * p0 - l1 * p1
    return val.sum(axis=-1)


@lru_cache(maxsize=None)
def _bit_signs(nq):
    idx = np.arange(1 << nq)
    return np.stack([1.0 - 2.0 * ((idx >> q) & 1) for q in range(nq)])


def _readout_np(psi, nq, dual):
    signs = _bit_signs(nq)
    prob = psi.real ** 2 + psi.imag ** 2
    z = prob @ signs.T
    if not dual:
        return z
    idx = np.arange(1 << nq)
    x = np.stack(
        [np.einsum("si,si->s", psi.conj(), psi[:, idx ^ (1 << q)]).real for q in range(nq)],
        axis=1,
    )
    return np.concatenate([z, x], axis=1)


def _pauli_np(psi, nq, index):
    if index < nq:
        return psi * _bit_signs(nq)[index]
    return psi[..., np.arange(1 << nq) ^ (1 << (index - nq))]


def _simulate_np(nq, kinds, ctrls, tgts, angles):
    psi = np.zeros((angles.shape[0], 1 << nq), dtype=np.complex128)
    psi[:, 0] = 1.0
    for g in range(len(kinds)):
        _apply_rows_np(psi, nq, int(kinds[g]), ctrls[g], tgts[g], angles[:, g])
    return psi


def _jacobian_np(nq, kinds, ctrls, tgts, angles, dual):
    n_samples, n_gates = angles.shape
    width = 2 * nq if dual else nq
    phi = _simulate_np(nq, kinds, ctrls, tgts, angles)
    out = _readout_np(phi, nq, dual)
    lam = np.stack([_pauli_np(phi, nq, j) for j in range(width)], axis=1)
    lam = lam.reshape(n_samples * width, -1)
    jac = np.zeros((n_samples, width, n_gates))
    for g in range(n_gates - 1, -1, -1):
        k = int(kinds[g])
        if k != CNOT:
            ov = _generator_overlap_np(lam.reshape(n_samples, width, -1), phi[:, None, :],
                                       nq, k, ctrls[g], tgts[g])
            jac[:, :, g] = ov.imag
        _apply_rows_np(phi, nq, k, ctrls[g], tgts[g], -angles[:, g])
        _apply_rows_np(lam, nq, k, ctrls[g], tgts[g], np.repeat(-angles[:, g], width))
    return out, jac


def _vjp_np(nq, kinds, ctrls, tgts, angles, dual, upstream):
    n_samples, n_gates = angles.shape
    phi = _simulate_np(nq, kinds, ctrls, tgts, angles)
    out = _readout_np(phi, nq, dual)
    width = out.shape[1]
    lam = np.zeros_like(phi)
    for j in range(width):
        lam += upstream[:, j:j + 1] * _pauli_np(phi, nq, j)
    grad = np.zeros((n_samples, n_gates))
    for g in range(n_gates - 1, -1, -1):
        k = int(kinds[g])
        if k != CNOT:
            grad[:, g] = _generator_overlap_np(lam, phi, nq, k, ctrls[g], tgts[g]).imag
        _apply_rows_np(phi, nq, k, ctrls[g], tgts[g], -angles[:, g])
        _apply_rows_np(lam, nq, k, ctrls[g], tgts[g], -angles[:, g])
    return out, grad


# ---------------------------------------------------------------------------
# Adam moment update, both paths on flat float64 views


@njit
def _adam_numba(p, g, m, v, b1, b2, lr, corr1, corr2, eps):
    for i in range(p.shape[0]):
        gi = g[i]
        mi = b1 * m[i] + (1 - b1) * gi
        vi = b2 * v[i] + (1 - b2) * gi * gi
        m[i] = mi
        v[i] = vi
        p[i] -= lr * (mi / corr1) / (np.sqrt(vi / corr2) + eps)


def _adam_np(p, g, m, v, b1, b2, lr, corr1, corr2, eps):
    m *= b1
    m += (1 - b1) * g
    v *= b2
    v += (1 - b2) * g * g
    p -= lr * (m / corr1) / (np.sqrt(v / corr2) + eps)


# ---------------------------------------------------------------------------
# dispatch

NUMPY_KERNELS = {
    "simulate": _simulate_np,
    "readout": _readout_np,
    "jacobian": _jacobian_np,
    "vjp": _vjp_np,
    "adam": _adam_np,
}

if HAS_NUMBA:
    NUMBA_KERNELS = {
        "simulate": _simulate_numba,
        "readout": _readout_numba,
        "jacobian": _jacobian_numba,
        "vjp": _vjp_numba,
        "adam": _adam_numba,
    }
    KERNELS = NUMBA_KERNELS
else:
    NUMBA_KERNELS = None
    KERNELS = NUMPY_KERNELS


def _program(kinds, ctrls, tgts, angles):
    return (
        np.ascontiguousarray(kinds, dtype=np.int64),
        np.ascontiguousarray(ctrls, dtype=np.int64),
        np.ascontiguousarray(tgts, dtype=np.int64),
        np.ascontiguousarray(np.atleast_2d(angles), dtype=np.float64),
    )


def simulate(nq, kinds, ctrls, tgts, angles, kernels=None):
    """Run ``angles.shape[0]`` circuits from |0..0>; returns (samples, 2**nq)."""
    k = kernels or KERNELS
    return k["simulate"](nq, *_program(kinds, ctrls, tgts, angles))


def readout(psi, nq, dual, kernels=None):
    k = kernels or KERNELS
    return k["readout"](np.ascontiguousarray(psi, dtype=np.complex128), nq, bool(dual))


def jacobian(nq, kinds, ctrls, tgts, angles, dual, kernels=None):
    """Readout values and d(readout)/d(angle) for every gate, via adjoint sweeps."""
    k = kernels or KERNELS
    return k["jacobian"](nq, *_program(kinds, ctrls, tgts, angles), bool(dual))


def vjp(nq, kinds, ctrls, tgts, angles, dual, upstream, kernels=None):
    """Readout values and upstream-weighted angle gradients, one adjoint sweep per sample."""
    k = kernels or KERNELS
    upstream = np.ascontiguousarray(np.atleast_2d(upstream), dtype=np.float64)
    return k["vjp"](nq, *_program(kinds, ctrls, tgts, angles), bool(dual), upstream)


def adam_inplace(p, g, m, v, b1, b2, lr, corr1, corr2, eps, kernels=None):
    """Update one parameter tensor and its moments in place."""
    k = kernels or KERNELS
    for a in (p, m, v):
        if not a.flags.c_contiguous or a.dtype != np.float64:
            raise ValueError("Adam state must be contiguous float64 to update in place")
    k["adam"](p.reshape(-1), np.ascontiguousarray(g, dtype=np.float64).reshape(-1),
              m.reshape(-1), v.reshape(-1), b1, b2, lr, corr1, corr2, eps)


def apply_gate_inplace(amps, nq, kind, ctrl, tgt, theta):
    """Single-state gate application used by the gate-level API."""
    if HAS_NUMBA:
        _apply_row(amps, kind, ctrl, tgt, float(theta))
    else:
        rows = amps.reshape(1, -1)
        _apply_rows_np(rows, nq, kind, ctrl, tgt, np.array([theta], dtype=float))
