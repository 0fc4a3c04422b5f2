"""Tests for the acceptance / conditional-probability / phase oracles."""
import numpy as np
import pytest

from qsynth.qcore import (
    DyadicRational,
    QuantumState,
    RegisterLayout,
    torus_distance,
)
from qsynth.tomography import (
    MeasuredCircuit,
    OracleBackend,
    cp,
    estimate_acceptance,
    ph,
    prefix_probability,
)


def random_state(rng, n):
    amps = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return QuantumState(RegisterLayout([("A", n)]),
                        amps / np.linalg.norm(amps))


def bernoulli_circuit(p):
    amps = np.array([np.sqrt(1 - p), np.sqrt(p)])
    return MeasuredCircuit(lambda x: QuantumState(
        RegisterLayout([("out", 1)]), amps), "out")


class TestEstimateAcceptance:
    def test_exact_rounds_to_grid(self):
        backend = OracleBackend(mode="exact", m=4)
        r = estimate_acceptance(bernoulli_circuit(1 / 3), "", backend)
        assert r == DyadicRational(5, 4)  # nearest grid point to 1/3

    def test_exact_error_bound(self):
        rng = np.random.default_rng(20)
        backend = OracleBackend(mode="exact", m=6)
        for _ in range(50):
            p = rng.random()
            r = estimate_acceptance(bernoulli_circuit(p), "", backend)
            assert abs(r.value - p) <= 2.0 ** -6

    def test_sampled_matches_exact_in_most_runs(self):
        # paper trial count 10 * 4^m at m = 3; the estimate must land within
        # 2 * 2^-m of the true probability in >= 95 of 100 seeded runs
        m = 3
        hits = 0
        rng = np.random.default_rng(21)
        for seed in range(100):
            p = rng.random()
            backend = OracleBackend(mode="sampled", m=m, seed=seed)
            r = estimate_acceptance(bernoulli_circuit(p), "", backend)
            if abs(r.value - p) <= 2.0 * 2.0 ** -m:
                hits += 1
        assert hits >= 95


class TestConditionalProbabilityOracle:
    def test_exact_product_bound(self):
        rng = np.random.default_rng(22)
        backend = OracleBackend(mode="exact", m=10)
        for _ in range(100):
            n = int(rng.integers(1, 4))
            psi = random_state(rng, n)
            k = int(rng.integers(0, n))
            x = format(int(rng.integers(0, 2 ** k)), f"0{k}b") if k else ""
            c = cp(psi, x, backend)
            px = prefix_probability(psi, x)
            px0 = prefix_probability(psi, x + "0")
            assert abs(px * c.value - px0) <= 2.0 ** -10

    def test_zero_denominator_returns_one(self):
        backend = OracleBackend(mode="exact", m=10)
        psi = QuantumState(RegisterLayout([("A", 2)]),
                           np.array([0, 0, 1, 0], dtype=complex))
        c = cp(psi, "0", backend)  # p("0") = 0
        assert c.value == 1.0

    def test_certain_next_bit_returns_one(self):
        backend = OracleBackend(mode="exact", m=10)
        psi = QuantumState(RegisterLayout([("A", 2)]),
                           np.array([1, 0, 0, 0], dtype=complex))
        c = cp(psi, "0", backend)
        assert c.value == 1.0

    def test_sampled_close_to_exact(self):
        rng = np.random.default_rng(23)
        hits = total = 0
        for seed in range(30):
            psi = random_state(rng, 2)
            exact = cp(psi, "0", OracleBackend(mode="exact", m=3, ell=3))
            sampled = cp(psi, "0",
                         OracleBackend(mode="sampled", m=3, ell=3, seed=seed))
            total += 1
            # quotient of two estimates: allow a few grid steps of slack
            if abs(sampled.value - exact.value) <= 6 * 2.0 ** -3:
                hits += 1
        assert hits >= int(0.9 * total)


class TestPhaseOracle:
    def test_reference_is_heavy_and_lex_first(self):
        backend = OracleBackend(mode="exact", m=10)
        amps = np.array([0.1, np.sqrt(1 - 0.01)], dtype=complex)
        psi = QuantumState(RegisterLayout([("A", 1)]), amps)
        res = ph(psi, backend)
        assert res.y_ref == "1"
        assert complex(res.ph["1"].value) == pytest.approx(1.0)

    def test_amplitude_reconstruction_bound(self):
        # |ph(x) * gamma * sqrt(p(x)) - alpha_x| <= 2^-m + 2^-ell
        rng = np.random.default_rng(24)
        backend = OracleBackend(mode="exact", m=10)
        ell = backend.ell
        for _ in range(100):
            n = int(rng.integers(1, 4))
            psi = random_state(rng, n)
            res = ph(psi, backend)
            a_ref = psi.amplitudes[int(res.y_ref, 2)]
            gamma = a_ref / abs(a_ref)
            for i in range(2 ** n):
                xs = format(i, f"0{n}b")
                alpha = psi.amplitudes[i]
                approx = complex(res.ph[xs].value) * gamma * abs(alpha)
                assert abs(approx - alpha) <= 2.0 ** -10 + 2.0 ** -ell + 1e-12

    def test_known_relative_phase(self):
        # (|0> + i|1>)/sqrt(2): phase of |1> relative to |0> is a quarter turn
        backend = OracleBackend(mode="exact", m=10)
        psi = QuantumState(RegisterLayout([("A", 1)]),
                           np.array([1, 1j]) / np.sqrt(2))
        res = ph(psi, backend)
        assert res.y_ref == "0"
        assert res.ph["1"].r.value == pytest.approx(0.25)

    def test_zero_amplitude_gets_unit_phase(self):
        backend = OracleBackend(mode="exact", m=10)
        psi = QuantumState(RegisterLayout([("A", 1)]),
                           np.array([1.0, 0.0], dtype=complex))
        res = ph(psi, backend)
        assert res.ph["1"].r.numerator == 0

    def test_sampled_phase_close_on_balanced_state(self):
        rng = np.random.default_rng(25)
        hits = 0
        for seed in range(20):
            theta = rng.random()
            amps = np.array([1.0, np.exp(2j * np.pi * theta)]) / np.sqrt(2)
            psi = QuantumState(RegisterLayout([("A", 1)]), amps)
            backend = OracleBackend(mode="sampled", m=6, ell=6, seed=seed)
            res = ph(psi, backend)
            if torus_distance(res.ph["1"].r.value, theta) <= 8 * 2.0 ** -6:
                hits += 1
        assert hits >= 18
