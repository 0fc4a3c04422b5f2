"""Tests for unitary synthesis: program states, stability, LMR application."""
import numpy as np
import pytest
import scipy.linalg

from qsynth.qcore import (
    DensityMatrix,
    DyadicRational,
    QuantumState,
    RegisterLayout,
    trace_distance,
)
from qsynth.primitives import recognizer_from_projector
from qsynth.targets import plus_state, random_unitary
from qsynth.uniproto import (
    ProgramState,
    StabilityShiftError,
    ZeroTimeSignal,
    canonical_program,
    eigendata,
    estimate_evolution_time,
    is_stable,
    lmr_apply,
    program_state_generator,
    repeat_until_success,
    restricted_input_reduction,
    stability_shift,
    unitary_qip_apply,
)

Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)


class TestEigendataAndProgram:
    def test_eigendata_reconstructs_unitary(self):
        for seed in range(10):
            u = random_unitary(4, seed=seed)
            assert np.allclose(eigendata(u).reconstruct(), u, atol=1e-10)

    def test_z_program_state(self):
        prog = canonical_program(Z)
        assert prog.t == pytest.approx(0.5)
        assert np.allclose(prog.rho.matrix, np.diag([0.0, 1.0]), atol=1e-12)

    def test_quarter_half_program_state(self):
        u = np.diag([1j, -1.0])
        prog = canonical_program(u)
        assert prog.t == pytest.approx(0.75)
        assert np.allclose(prog.rho.matrix,
                           np.diag([1.0 / 3.0, 2.0 / 3.0]), atol=1e-12)

    def test_identity_raises_zero_time(self):
        with pytest.raises(ZeroTimeSignal):
            canonical_program(np.eye(2))

    def test_program_state_contract_random(self):
        # rho is a valid density matrix and exp(2*pi*i*t*rho) recovers u
        for seed in range(50):
            n = 1 + seed % 2
            u = random_unitary(2 ** n, seed=1000 + seed)
            prog = canonical_program(u)
            evals = np.linalg.eigvalsh(prog.rho.matrix)
            assert evals.min() >= -1e-10
            assert np.trace(prog.rho.matrix).real == pytest.approx(1.0)
            assert 0.0 < prog.t <= 2 ** n
            assert np.abs(prog.evolution() - u).max() <= 1e-8

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            canonical_program(np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestStability:
    def test_z_is_unstable(self):
        # eigenphase 0 sits exactly on the excluded point
        rep = is_stable(Z, 1)
        assert not rep.stable
        assert rep.delta == pytest.approx(2.0 ** -3)
        assert rep.min_distance == pytest.approx(0.0)

    def test_clearly_interior_spectrum_is_stable(self):
        u = np.diag([np.exp(2j * np.pi * 0.25), np.exp(2j * np.pi * 0.5)])
        assert is_stable(u, 1).stable

    def test_shift_for_z(self):
        rep = stability_shift(Z, 1)
        assert rep.stable
        assert rep.shift.value == pytest.approx(0.25)
        assert is_stable(np.exp(2j * np.pi * rep.shift.value) * Z, 1).stable

    def test_shift_for_identity(self):
        rep = stability_shift(np.eye(2), 1)
        assert rep.stable
        assert rep.shift.value == pytest.approx(0.25)

    def test_shift_for_t_gate(self):
        u = np.diag([1.0, np.exp(1j * np.pi / 4)])
        rep = stability_shift(u, 1)
        assert rep.shift.value == pytest.approx(0.25)

    def test_shift_verified_post_hoc_random(self):
        for seed in range(10):
            u = random_unitary(2, seed=2000 + seed)
            rep = stability_shift(u, 1)
            shifted = np.exp(2j * np.pi * rep.shift.value) * u
            assert is_stable(shifted, 1).stable

    def test_shift_failure_carries_diagnostics(self):
        # a coarse search grid on a unitary whose spectrum blocks every
        # coarse shift cannot succeed
        u = np.diag([np.exp(2j * np.pi * th)
                     for th in (0.0, 0.25, 0.5, 0.75)])
        with pytest.raises(StabilityShiftError) as exc:
            stability_shift(u, 1, m_search=2)
        assert exc.value.diagnostics  # per-candidate rejection estimates


class TestGenerator:
    def test_accept_probability_is_scaled_time(self):
        # stable u with exactly dyadic eigenphases: t_tilde is exact
        u = 1j * np.eye(2)  # both eigenphases 1/4, t = 1/2
        gen = program_state_generator(u, m=3)
        assert gen.accept_probability == pytest.approx(0.25, abs=1e-12)
        assert gen.t_tilde == pytest.approx(0.5, abs=1e-12)

    def test_generator_quarter_half(self):
        u = np.diag([1j, -1.0])
        gen = program_state_generator(u, m=3)
        assert gen.t_tilde == pytest.approx(0.75, abs=1e-12)
        assert gen.accept_probability == pytest.approx(0.375, abs=1e-12)

    def test_reduced_state_matches_program(self):
        u = np.diag([1j, -1.0])
        gen = program_state_generator(u, m=4)
        prog = canonical_program(u)
        assert np.abs(gen.rho_tilde.matrix - prog.rho.matrix).max() <= 1e-10

    def test_unstable_input_rejected(self):
        with pytest.raises(ValueError):
            program_state_generator(Z, m=3)

    def test_repeat_until_success_closed_form(self):
        u = 1j * np.eye(2)
        gen = program_state_generator(u, m=3)  # accept probability 1/4
        cap = 16
        mix = repeat_until_success(gen, cap)
        fail = 0.75 ** cap
        good = gen.psi.density().matrix
        zero = np.zeros_like(good)
        zero[0, 0] = 1.0
        assert np.abs(mix.matrix - (fail * zero + (1 - fail) * good)).max() \
            <= 1e-12

    def test_repeat_until_success_trajectory(self):
        u = 1j * np.eye(2)
        gen = program_state_generator(u, m=3)
        hits = sum(
            np.allclose(repeat_until_success(gen, 4, mode="trajectory",
                                             seed=s).amplitudes,
                        gen.psi.amplitudes)
            for s in range(200))
        expect = (1 - 0.75 ** 4) * 200
        assert abs(hits - expect) <= 40

    def test_estimate_evolution_time_exact_dyadic(self):
        u = np.diag([1j, -1.0])
        assert estimate_evolution_time(u, m=3) == pytest.approx(0.75,
                                                                abs=1e-9)


class TestLMR:
    def test_zero_time_is_identity(self):
        tau = plus_state(1).density()
        rho = canonical_program(np.diag([1j, -1.0])).rho
        out = lmr_apply(tau, rho, 0.0, 10)
        assert np.abs(out.matrix - tau.matrix).max() <= 1e-12

    def test_converges_to_exact_evolution(self):
        tau = plus_state(1).density()
        prog = canonical_program(Z)
        W = scipy.linalg.expm(2j * np.pi * prog.t * prog.rho.matrix)
        exact = DensityMatrix(tau.layout, W @ tau.matrix @ W.conj().T)
        errs = [trace_distance(lmr_apply(tau, prog.rho, prog.t, k), exact)
                for k in (50, 100, 200)]
        assert errs[0] > errs[1] > errs[2]
        # first-order error: doubling k should roughly halve the error
        assert 1.6 <= errs[0] / errs[1] <= 2.4
        assert 1.6 <= errs[1] / errs[2] <= 2.4

    def test_output_stays_subnormalized_density(self):
        tau = plus_state(1).density()
        rho = canonical_program(np.diag([1j, -1.0])).rho
        out = lmr_apply(tau, rho, 0.4, 25)
        evals = np.linalg.eigvalsh(out.matrix)
        assert evals.min() >= -1e-10
        assert np.trace(out.matrix).real == pytest.approx(1.0, abs=1e-9)

    def test_argument_validation(self):
        tau = plus_state(1).density()
        rho = canonical_program(Z).rho
        with pytest.raises(ValueError):
            lmr_apply(tau, rho, 0.5, 0)
        with pytest.raises(ValueError):
            lmr_apply(tau, rho, -0.5, 10)


class TestEndToEnd:
    def test_identity_short_circuits(self):
        phi = plus_state(1)
        res = unitary_qip_apply(np.eye(2), phi)
        assert res.accept_probability == pytest.approx(1.0)
        assert res.td_to_target == pytest.approx(0.0)
        assert res.metadata["short_circuit"] == "zero-time"

    def test_reflection_applied_to_plus(self):
        phi = plus_state(1)
        res = unitary_qip_apply(Z, phi)
        assert res.accept_probability == pytest.approx(1.0, abs=1e-8)
        assert res.td_to_target <= 0.05
        assert res.metadata["shift"].value == pytest.approx(0.25)
        assert res.metadata["lmr_steps"] >= 200

    def test_width_mismatch_rejected(self):
        with pytest.raises(ValueError):
            unitary_qip_apply(np.eye(4), plus_state(1))


class TestRestrictedInputReduction:
    def test_projector_halves_post_selection(self):
        Pi = np.diag([1.0, 0.0]).astype(complex)
        R = recognizer_from_projector(Pi)
        red = restricted_input_reduction(X, R)
        assert red.dim_s_prime == 2
        assert red.post_selection_probability == pytest.approx(0.5)

    def test_full_subspace_keeps_everything(self):
        R = recognizer_from_projector(np.eye(2, dtype=complex))
        red = restricted_input_reduction(X, R)
        assert red.dim_s_prime == 4
        assert red.post_selection_probability == pytest.approx(1.0)

    def test_v_is_unitary_and_acts_as_u(self):
        for seed in range(5):
            u = random_unitary(2, seed=3000 + seed)
            R = recognizer_from_projector(np.eye(2, dtype=complex))
            red = restricted_input_reduction(u, R)
            V = red.V
            assert np.allclose(V @ V.conj().T, np.eye(4), atol=1e-10)
            # V |phi>|0> = U|phi>|1>
            for basis in range(2):
                inp = np.kron(np.eye(2)[basis], [1.0, 0.0])
                out = V @ inp
                expect = np.kron(u[:, basis], [0.0, 1.0])
                assert np.allclose(out, expect, atol=1e-10)

    def test_malformed_recognizer_rejected(self):
        with pytest.raises(ValueError):
            restricted_input_reduction(X, np.eye(4, dtype=complex))
