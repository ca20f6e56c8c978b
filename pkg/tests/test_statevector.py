import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qstylegan.errors import ArgumentError, ConfigurationError
from qstylegan.statevector import (
    MAX_QUBITS, GateOp, StateVector, apply_gate, expectation, init_zero, run, shot_estimate,
)

ROTATIONS = ["RX", "RY", "RZ"]
CONTROLLED = ["CRX", "CRY", "CRZ"]


def random_gate(rng, n):
    kinds = ROTATIONS + (CONTROLLED + ["CNOT"] if n > 1 else [])
    kind = kinds[rng.integers(len(kinds))]
    target = int(rng.integers(n))
    control = None
    if kind in CONTROLLED or kind == "CNOT":
        control = int(rng.choice([q for q in range(n) if q != target]))
    angle = None if kind == "CNOT" else float(rng.uniform(-2 * np.pi, 2 * np.pi))
    return GateOp(kind, target, angle, control)


def random_state(rng, n):
    a = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
    return StateVector(n, a / np.linalg.norm(a))


def as_tuple(g):
    return (g.kind, g.target, g.angle, g.control)


class TestInitZero:
    def test_one_qubit(self):
        np.testing.assert_array_equal(init_zero(1).amplitudes, [1, 0])

    def test_five_qubits(self):
        s = init_zero(5)
        assert s.amplitudes.shape == (32,)
        assert s.amplitudes[0] == 1 and np.count_nonzero(s.amplitudes) == 1

    @pytest.mark.parametrize("n", [0, -1, MAX_QUBITS + 1])
    def test_out_of_range(self, n):
        with pytest.raises(ConfigurationError):
            init_zero(n)

    def test_configurable_cap(self):
        with pytest.raises(ConfigurationError):
            init_zero(4, max_qubits=3)


class TestApplyGate:
    def test_ry_pi_flips(self):
        s = apply_gate(init_zero(1), GateOp("RY", 0, np.pi))
        np.testing.assert_allclose(s.amplitudes, [0, 1], atol=1e-15)

    def test_ry_half_pi(self):
        s = apply_gate(init_zero(1), GateOp("RY", 0, np.pi / 2))
        np.testing.assert_allclose(s.amplitudes, [2 ** -0.5, 2 ** -0.5], atol=1e-15)

    def test_bell_pair(self):
        # (|00> + |10>)/sqrt2 in the ket order |q1 q0>: qubit 1 in superposition
        start = StateVector(2, np.array([1, 0, 1, 0]) / np.sqrt(2))
        out = apply_gate(start, GateOp("CNOT", target=0, control=1))
        np.testing.assert_allclose(out.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-15)
        # with control 0 / target 1 on the mirrored input
        start = StateVector(2, np.array([1, 1, 0, 0]) / np.sqrt(2))
        out = apply_gate(start, GateOp("CNOT", target=1, control=0))
        np.testing.assert_allclose(out.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-15)

    def test_apply_gate_does_not_mutate(self):
        s = init_zero(2)
        apply_gate(s, GateOp("RX", 1, 0.3))
        np.testing.assert_array_equal(s.amplitudes, [1, 0, 0, 0])

    def test_ry_composition(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            s = random_state(rng, 3)
            a, b = rng.uniform(-4, 4, 2)
            q = int(rng.integers(3))
            two = apply_gate(apply_gate(s, GateOp("RY", q, a)), GateOp("RY", q, b))
            one = apply_gate(s, GateOp("RY", q, a + b))
            np.testing.assert_allclose(two.amplitudes, one.amplitudes, atol=1e-12)

    @pytest.mark.parametrize("kind", ROTATIONS + CONTROLLED + ["CNOT"])
    def test_matches_dense_matrix_oracle(self, kind):
        rng = np.random.default_rng(abs(hash(kind)) % 2 ** 32)
        n = 4
        for _ in range(10):
            s = random_state(rng, n)
            tgt = int(rng.integers(n))
            ctrl = None
            if kind in CONTROLLED or kind == "CNOT":
                ctrl = int(rng.choice([q for q in range(n) if q != tgt]))
            ang = None if kind == "CNOT" else float(rng.uniform(-7, 7))
            out = apply_gate(s, GateOp(kind, tgt, ang, ctrl))
            ref = oracles.gate_matrix(n, kind, tgt, ang, ctrl) @ s.amplitudes
            np.testing.assert_allclose(out.amplitudes, ref, atol=1e-13)

    @pytest.mark.parametrize("gate", [
        GateOp("RX", 2, 0.1), GateOp("CRY", 0, 0.1, 0), GateOp("CRY", 0, 0.1, 5),
        GateOp("CNOT", 1), GateOp("RY", 0), GateOp("RZ", 0, 0.1, 1), GateOp("SWAP", 0, 0.1),
    ])
    def test_invalid_gates(self, gate):
        with pytest.raises(ArgumentError):
            apply_gate(init_zero(2), gate)


class TestExpectation:
    def test_z_on_zero(self):
        assert expectation(init_zero(1), 0, "Z") == 1.0

    def test_x_on_plus(self):
        s = StateVector(1, np.array([1, 1]) / np.sqrt(2))
        assert expectation(s, 0, "X") == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("theta", [0.3, 1.7, 2.9])
    def test_z_after_ry_is_cos(self, theta):
        s = run(1, [GateOp("RY", 0, theta)])
        assert abs(expectation(s, 0, "Z") - np.cos(theta)) < 1e-12

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            s = random_state(rng, 4)
            for q in range(4):
                for p in "XZ":
                    assert expectation(s, q, p) == pytest.approx(
                        oracles.pauli_expectation(s.amplitudes, 4, q, p), abs=1e-13)

    @pytest.mark.parametrize("q,p", [(3, "Z"), (-1, "X"), (0, "Y")])
    def test_invalid(self, q, p):
        with pytest.raises(ArgumentError):
            expectation(init_zero(2), q, p)


class TestInvariants:
    def test_norm_preserved_long_sequence(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            s = init_zero(5)
            for _ in range(100):
                s.apply(random_gate(rng, 5))
            assert abs(s.norm() - 1) < 1e-9

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 5))
    def test_inverse_round_trip(self, seed, n):
        rng = np.random.default_rng(seed)
        s = random_state(rng, n)
        g = random_gate(rng, n)
        back = apply_gate(apply_gate(s, g), g.inverse())
        np.testing.assert_allclose(back.amplitudes, s.amplitudes, atol=1e-12, rtol=0)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_disjoint_gates_commute(self, seed):
        rng = np.random.default_rng(seed)
        s = random_state(rng, 4)
        g1 = GateOp("CRX", 0, float(rng.uniform(-6, 6)), 1)
        g2 = GateOp(["RX", "RY", "RZ"][rng.integers(3)], 2 + int(rng.integers(2)), float(rng.uniform(-6, 6)))
        a = apply_gate(apply_gate(s, g1), g2)
        b = apply_gate(apply_gate(s, g2), g1)
        np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12, rtol=0)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_expectation_bounds(self, seed):
        rng = np.random.default_rng(seed)
        s = init_zero(3)
        for _ in range(15):
            s.apply(random_gate(rng, 3))
        for q in range(3):
            for p in "XZ":
                assert abs(expectation(s, q, p)) <= 1 + 1e-12

    def test_bad_amplitude_length(self):
        with pytest.raises(ArgumentError):
            StateVector(2, np.ones(3))


class TestShotEstimate:
    def test_degenerate(self):
        rng = np.random.default_rng(0)
        assert shot_estimate(1.0, 17, rng) == 1.0
        assert shot_estimate(-1.0, 17, rng) == -1.0

    def test_zero_expectation_mean(self):
        est = shot_estimate(np.zeros(10_000), 1000, np.random.default_rng(1))
        assert abs(est.mean()) < 3 / np.sqrt(1e7)

    def test_std_formula(self):
        est = shot_estimate(np.full(10_000, 0.5), 1000, np.random.default_rng(2))
        expected = np.sqrt((1 - 0.25) / 1000)
        assert abs(est.std() / expected - 1) < 0.10

    def test_values_on_shot_grid(self):
        est = shot_estimate(np.linspace(-1, 1, 101), 1000, np.random.default_rng(3))
        k = (est + 1) * 1000 / 2
        np.testing.assert_allclose(k, np.round(k), atol=1e-9)
        np.testing.assert_array_equal(est, (2 * np.round(k) - 1000) / 1000)

    def test_seeded(self):
        a = shot_estimate(np.full(50, 0.2), 100, np.random.default_rng(9))
        b = shot_estimate(np.full(50, 0.2), 100, np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("shots", [0, -5, 2.5])
    def test_bad_shots(self, shots):
        with pytest.raises(ArgumentError):
            shot_estimate(0.0, shots, np.random.default_rng(0))

    def test_out_of_range_expectation(self):
        with pytest.raises(ArgumentError):
            shot_estimate(1.5, 10, np.random.default_rng(0))

    def test_run_matches_dense_oracle(self):
        rng = np.random.default_rng(5)
        gates = [random_gate(rng, 3) for _ in range(30)]
        s = run(3, gates)
        ref = oracles.simulate(3, [as_tuple(g) for g in gates])
        np.testing.assert_allclose(s.amplitudes, ref, atol=1e-12)
