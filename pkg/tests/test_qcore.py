"""Tests for the register-level quantum core."""
import numpy as np
import pytest

from qsynth.qcore import (
    DensityMatrix,
    DyadicPhase,
    DyadicRational,
    QuantumState,
    RegisterLayout,
    TorusAngle,
    apply_unitary,
    basis_state,
    fidelity_bound_check,
    measure_register,
    partial_trace,
    round_to_dyadic,
    round_to_dyadic_phase,
    tensor,
    torus_distance,
    trace_distance,
)


def random_layout_state(rng, widths):
    layout = RegisterLayout(list(widths.items()))
    amps = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return QuantumState(layout, amps / np.linalg.norm(amps))


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestRegisterLayout:
    def test_basic_bookkeeping(self):
        layout = RegisterLayout([("A", 2), ("B", 1), ("C", 0)])
        assert layout.total_width == 3
        assert layout.dim == 8
        assert list(layout.qubit_range("A")) == [0, 1]
        assert list(layout.qubit_range("B")) == [2]
        assert list(layout.qubit_range("C")) == []
        assert layout.qubits_of(["B", "A"]) == [2, 0, 1]

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            RegisterLayout([("A", 1), ("A", 2)])

    def test_negative_width_rejected(self):
        with pytest.raises(ValueError):
            RegisterLayout([("A", -1)])

    def test_zero_width_register_is_first_class(self):
        s = basis_state(RegisterLayout([("A", 0), ("B", 1)]))
        assert s.layout.dim == 2
        assert s.amplitudes[0] == 1.0


class TestQuantumState:
    def test_norm_enforced(self):
        layout = RegisterLayout([("A", 1)])
        with pytest.raises(ValueError):
            QuantumState(layout, [1.0, 1.0])
        s = QuantumState(layout, [1.0, 1.0], subnormalized=False) \
            if False else QuantumState(layout, np.array([1, 1]) / np.sqrt(2))
        assert abs(s.norm2 - 1.0) < 1e-12

    def test_subnormalized_allowed(self):
        layout = RegisterLayout([("A", 1)])
        s = QuantumState(layout, [0.5, 0.0], subnormalized=True)
        assert abs(s.norm2 - 0.25) < 1e-12
        assert abs(s.normalized().norm2 - 1.0) < 1e-12

    def test_amplitudes_readonly(self):
        s = basis_state(RegisterLayout([("A", 1)]))
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0.0

    def test_density_of_pure_state(self):
        rng = np.random.default_rng(0)
        s = random_layout_state(rng, {"A": 2})
        rho = s.density()
        assert abs(rho.trace - 1.0) < 1e-12
        np.testing.assert_allclose(rho.matrix @ rho.matrix, rho.matrix,
                                   atol=1e-12)


class TestDensityMatrix:
    def test_validation(self):
        layout = RegisterLayout([("A", 1)])
        with pytest.raises(ValueError):
            DensityMatrix(layout, np.array([[1.0, 0.5], [0.2, 0.0]]))
        with pytest.raises(ValueError):
            DensityMatrix(layout, np.diag([0.7, 0.7]))
        d = DensityMatrix(layout, np.diag([0.7, 0.3]))
        assert abs(d.trace - 1.0) < 1e-12


class TestDyadics:
    def test_half_open_grid_and_endpoint(self):
        DyadicRational(0, 3)
        DyadicRational(7, 3)
        DyadicRational(8, 3)  # documented closed-endpoint extension
        with pytest.raises(ValueError):
            DyadicRational(9, 3)
        with pytest.raises(ValueError):
            DyadicRational(-1, 3)

    def test_phase_rejects_endpoint(self):
        DyadicPhase(DyadicRational(7, 3))
        with pytest.raises(ValueError):
            DyadicPhase(DyadicRational(8, 3))

    def test_round_to_dyadic_known_values(self):
        # independent hand computation: 1/3 at m=4 lies between 5/16 and
        # 6/16; |1/3 - 5/16| = 1/48 < |1/3 - 6/16| = 1/24
        assert round_to_dyadic(1 / 3, 4) == DyadicRational(5, 4)
        assert round_to_dyadic(0.0, 4) == DyadicRational(0, 4)
        # 1.0 stays inside the half-open grid
        assert round_to_dyadic(1.0, 4) == DyadicRational(15, 4)

    def test_round_ties_toward_smaller_numerator(self):
        # 3/32 is exactly between 1/16 and 2/16
        assert round_to_dyadic(3 / 32, 4) == DyadicRational(1, 4)

    def test_round_error_bound(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            x = rng.random()
            m = int(rng.integers(1, 9))
            r = round_to_dyadic(x, m)
            assert abs(x - r.value) <= 2.0 ** (-m)

    def test_torus_distance(self):
        assert torus_distance(0.1, 0.9) == pytest.approx(0.2)
        assert torus_distance(0.0, 0.5) == pytest.approx(0.5)
        assert TorusAngle(1.25).distance_to(0.25) == pytest.approx(0.0)

    def test_round_phase_wraps(self):
        r = round_to_dyadic_phase(0.999, 3)
        assert r.r == DyadicRational(0, 3)
        rng = np.random.default_rng(2)
        for _ in range(200):
            t = rng.random()
            m = int(rng.integers(1, 9))
            r = round_to_dyadic_phase(t, m)
            assert torus_distance(t, r.r.value) <= 2.0 ** (-m - 1) + 1e-12


class TestApplyUnitary:
    def test_matches_dense_kron(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            s = random_layout_state(rng, {"A": 1, "B": 2})
            u = random_unitary(rng, 2)
            out = apply_unitary(s, u, "A")
            expected = np.kron(u, np.eye(4)) @ s.amplitudes
            np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)

    def test_register_reordering(self):
        rng = np.random.default_rng(4)
        s = random_layout_state(rng, {"A": 1, "B": 1})
        u = random_unitary(rng, 4)
        out = apply_unitary(s, u, ["B", "A"])
        # B is the low qubit, A the high one; swap before and after
        P = np.zeros((4, 4))
        for a in range(2):
            for b in range(2):
                P[b * 2 + a, a * 2 + b] = 1.0
        expected = P.T @ u @ P @ s.amplitudes
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)

    def test_zero_width_global_phase(self):
        s = basis_state(RegisterLayout([("A", 0), ("B", 1)]))
        out = apply_unitary(s, np.array([[1j]]), "A")
        np.testing.assert_allclose(out.amplitudes, [1j, 0.0])

    def test_non_unitary_rejected(self):
        s = basis_state(RegisterLayout([("A", 1)]))
        with pytest.raises(ValueError):
            apply_unitary(s, np.array([[1.0, 0.0], [0.0, 2.0]]), "A")


class TestPartialTrace:
    def test_product_state_factorizes(self):
        rng = np.random.default_rng(5)
        a = random_layout_state(rng, {"A": 2})
        b = random_layout_state(rng, {"B": 1})
        joint = tensor(a, b)
        red = partial_trace(joint.density(), "B")
        np.testing.assert_allclose(red.matrix, a.density().matrix, atol=1e-12)

    def test_entangled_pair_gives_maximally_mixed(self):
        layout = RegisterLayout([("A", 1), ("B", 1)])
        bell = QuantumState(layout, np.array([1, 0, 0, 1]) / np.sqrt(2))
        red = partial_trace(bell.density(), "B")
        np.testing.assert_allclose(red.matrix, np.eye(2) / 2, atol=1e-12)

    def test_trace_preserved(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            s = random_layout_state(rng, {"A": 1, "B": 1, "C": 1})
            red = partial_trace(s.density(), ["A", "C"])
            assert red.trace == pytest.approx(1.0, abs=1e-12)


class TestMeasureRegister:
    def test_branch_probabilities_sum(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            s = random_layout_state(rng, {"A": 2, "B": 1})
            branches = measure_register(s, "A")
            assert sum(p for _, p, _ in branches) == pytest.approx(1.0)
            for bits, p, post in branches:
                assert len(bits) == 2
                assert abs(post.norm2 - 1.0) < 1e-9

    def test_deterministic_outcome(self):
        s = basis_state(RegisterLayout([("A", 2)]), index=2)
        branches = measure_register(s, "A")
        assert len(branches) == 1
        assert branches[0][0] == "10"


class TestDistances:
    def test_trace_distance_frozen_value(self):
        # independent oracle: td(|0>, |+>) = sqrt(1 - 1/2) = 1/sqrt(2)
        layout = RegisterLayout([("A", 1)])
        zero = basis_state(layout)
        plus = QuantumState(layout, np.array([1, 1]) / np.sqrt(2))
        td = trace_distance(zero.density(), plus.density())
        assert td == pytest.approx(1 / np.sqrt(2), abs=1e-12)

    def test_trace_distance_pure_states_formula(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            a = random_layout_state(rng, {"A": 2})
            b = random_layout_state(rng, {"A": 2})
            td = trace_distance(a.density(), b.density())
            expected = np.sqrt(1.0 - abs(a.overlap(b)) ** 2)
            assert td == pytest.approx(expected, abs=1e-10)

    def test_fidelity_bound(self):
        rng = np.random.default_rng(9)
        layout = RegisterLayout([("A", 2)])
        for _ in range(50):
            phi = random_layout_state(rng, {"A": 2})
            probs = rng.dirichlet(np.ones(3))
            mats = [random_layout_state(rng, {"A": 2}).density().matrix
                    for _ in range(3)]
            sigma = DensityMatrix(layout, sum(p * m for p, m in zip(probs, mats)))
            td, bound, holds = fidelity_bound_check(phi, sigma)
            assert holds
            assert td <= bound + 1e-9
