"""Both kernel backends against the dense oracle and against each other."""
import os
import subprocess
import sys

import numpy as np
import pytest

import oracles
from qstylegan import _accel, _kernels
from qstylegan.statevector import kind_name

BACKENDS = [pytest.param(_kernels.NUMPY_KERNELS, id="numpy")]
if _kernels.NUMBA_KERNELS is not None:
    BACKENDS.append(pytest.param(_kernels.NUMBA_KERNELS, id="numba"))


def random_program(rng, n, n_gates):
    kinds, ctrls, tgts = [], [], []
    for _ in range(n_gates):
        k = int(rng.integers(7 if n > 1 else 3))
        t = int(rng.integers(n))
        c = -1
        if k >= 3:
            c = int(rng.choice([q for q in range(n) if q != t]))
        kinds.append(k)
        ctrls.append(c)
        tgts.append(t)
    return np.array(kinds), np.array(ctrls), np.array(tgts)


def dense_rows(n, kinds, ctrls, tgts, angles):
    out = []
    for row in np.atleast_2d(angles):
        gates = [(kind_name(k), t, a, None if c < 0 else c)
                 for k, c, t, a in zip(kinds, ctrls, tgts, row)]
        out.append(oracles.simulate(n, gates))
    return np.array(out)


@pytest.mark.parametrize("kernels", BACKENDS)
@pytest.mark.parametrize("n", [1, 2, 4])
def test_simulate_and_readout_match_dense(kernels, n):
    rng = np.random.default_rng(n)
    kinds, ctrls, tgts = random_program(rng, n, 25)
    angles = rng.uniform(-7, 7, (3, 25))
    psi = _kernels.simulate(n, kinds, ctrls, tgts, angles, kernels=kernels)
    ref = dense_rows(n, kinds, ctrls, tgts, angles)
    np.testing.assert_allclose(psi, ref, atol=1e-12)
    for dual in (False, True):
        vals = _kernels.readout(psi, n, dual, kernels=kernels)
        expect = np.array([oracles.readout(p, n, dual) for p in ref])
        np.testing.assert_allclose(vals, expect, atol=1e-12)


@pytest.mark.parametrize("kernels", BACKENDS)
def test_jacobian_matches_finite_differences(kernels):
    rng = np.random.default_rng(7)
    n = 3
    kinds, ctrls, tgts = random_program(rng, n, 18)
    angles = rng.uniform(-7, 7, 18)
    out, jac = _kernels.jacobian(n, kinds, ctrls, tgts, angles, True, kernels=kernels)

    def f(a):
        return oracles.readout(dense_rows(n, kinds, ctrls, tgts, a)[0], n, True)

    fd = oracles.central_diff(f, angles, h=1e-5)
    fd[:, kinds == _kernels.CNOT] = 0.0
    np.testing.assert_allclose(out[0], f(angles), atol=1e-12)
    assert oracles.scaled_err(jac[0], fd) < 1e-8


@pytest.mark.parametrize("kernels", BACKENDS)
def test_vjp_is_upstream_contraction_of_jacobian(kernels):
    rng = np.random.default_rng(8)
    n = 4
    kinds, ctrls, tgts = random_program(rng, n, 30)
    angles = rng.uniform(-7, 7, (5, 30))
    up = rng.standard_normal((5, 2 * n))
    out_j, jac = _kernels.jacobian(n, kinds, ctrls, tgts, angles, True, kernels=kernels)
    out_v, grad = _kernels.vjp(n, kinds, ctrls, tgts, angles, True, up, kernels=kernels)
    np.testing.assert_allclose(out_v, out_j, atol=1e-13)
    np.testing.assert_allclose(grad, np.einsum("bl,blg->bg", up, jac), atol=1e-12)


@pytest.mark.skipif(_kernels.NUMBA_KERNELS is None, reason="numba disabled")
def test_backends_agree():
    rng = np.random.default_rng(9)
    n = 5
    kinds, ctrls, tgts = random_program(rng, n, 40)
    angles = rng.uniform(-7, 7, (8, 40))
    up = rng.standard_normal((8, n))
    a = _kernels.vjp(n, kinds, ctrls, tgts, angles, False, up, kernels=_kernels.NUMPY_KERNELS)
    b = _kernels.vjp(n, kinds, ctrls, tgts, angles, False, up, kernels=_kernels.NUMBA_KERNELS)
    np.testing.assert_allclose(a[0], b[0], atol=1e-13)
    np.testing.assert_allclose(a[1], b[1], atol=1e-12)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, QSTYLEGAN_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from qstylegan import _accel, _kernels;"
         "print(_accel.BACKEND, _kernels.KERNELS is _kernels.NUMPY_KERNELS)"],
        env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]


@pytest.mark.parametrize("value,expected", [("", True), ("0", True), ("off", True),
                                            ("1", False), ("yes", False), ("TRUE", False)])
def test_env_flag_parsing(monkeypatch, value, expected):
    monkeypatch.setenv("QSTYLEGAN_DISABLE_NUMBA", value)
    assert _accel._numba_requested() is expected
