"""
State tomography oracles: acceptance-probability estimation for described
circuits, the conditional-probability oracle ``cp``, and the relative-phase
oracle ``ph``. Each oracle has an exact backend (ground truth, used by the
protocols) and a sampled backend exercising the repeat-measure-average
statistics at desk scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, exp
from typing import Callable

import numpy as np

from .qcore import (
    DyadicPhase,
    DyadicRational,
    QuantumState,
    round_to_dyadic_phase,
)

# Chernoff failure budget per sampled estimate at the default trial count.
SAMPLED_FAILURE_BUDGET = 2.0 * exp(-5.0)

PHASE_UNITS = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class OracleBackend:
    """Estimation backend configuration.

    mode 'exact' computes probabilities from amplitudes and rounds; mode
    'sampled' draws ``trial_count`` Bernoulli trials per estimate (default
    10 * 4^precision) and applies the grid-acceptance predicate.
    ``ell`` is the output precision of cp/ph (default m + 5).
    """

    mode: str = "exact"
    m: int = 10
    ell: int | None = None
    trial_count: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"unknown backend mode {self.mode!r}")
        if self.ell is None:
            object.__setattr__(self, "ell", self.m + 5)

    def trials(self, precision: int) -> int:
        if self.trial_count is not None:
            return self.trial_count
        return 10 * 4 ** precision

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=(self.seed, salt)))

    @property
    def failure_budget(self) -> float:
        return SAMPLED_FAILURE_BUDGET


@dataclass(frozen=True)
class MeasuredCircuit:
    """A described circuit: a preparation map from an input bit-string to a
    QuantumState, plus the name of its single output qubit."""

    prepare: Callable[[str], QuantumState]
    output_register: str = "out"


@dataclass(frozen=True)
class PhaseOracleResult:
    """Relative phases of all basis amplitudes.

    Values are relative to the unit-magnitude reference gamma fixed by the
    convention ph(y_ref) = 1, where y_ref is the lexicographically first
    string of estimated weight >= 3/4 * 2^-n.
    """

    ph: dict
    y_ref: str
    gamma_convention: str = (
        "phases are relative to gamma = alpha[y_ref]/|alpha[y_ref]|; ph(y_ref) = 1")
    failure_budget: float = 0.0


def _output_one_probability(circuit: MeasuredCircuit, x: str) -> float:
    state = circuit.prepare(x)
    if state.layout.width(circuit.output_register) != 1:
        raise ValueError("described circuit must have exactly one output qubit")
    q = state.layout.qubit_range(circuit.output_register)[0]
    W = state.layout.total_width
    arr = state.amplitudes.reshape([2] * W)
    idx = [slice(None)] * W
    idx[q] = 1
    sub = arr[tuple(idx)]
    return float(np.vdot(sub, sub).real)


def _grid_first(empirical: float, precision: int) -> DyadicRational:
    """Lexicographically first r in D_precision with
    |empirical - r| <= 3/2 * 2^-precision."""
    scale = 2 ** precision
    lo = ceil(empirical * scale - 1.5 - 1e-12)
    k = min(max(lo, 0), scale - 1)
    if abs(empirical - k / scale) > 1.5 / scale + 1e-12:
        raise AssertionError("no grid point within the acceptance window")
    return DyadicRational(k, precision)


def _estimate_probability(p_true: float, precision: int, backend: OracleBackend,
                          rng: np.random.Generator) -> DyadicRational:
    """Sampled repeat-measure-average estimate of a Bernoulli probability."""
    t = backend.trials(precision)
    k = int(rng.binomial(t, min(max(p_true, 0.0), 1.0)))
    return _grid_first(k / t, precision)


def estimate_acceptance(circuit: MeasuredCircuit, x: str,
                        backend: OracleBackend) -> DyadicRational:
    """Estimate the probability that the circuit's output qubit reads 1.

    Exact backend: simulate and round to D_m (error <= 2^-m). Sampled
    backend: Bernoulli trials plus the half-open grid acceptance predicate
    (error <= 2 * 2^-m except with the backend's failure budget).
    """
    p = _output_one_probability(circuit, x)
    if backend.mode == "exact":
        from .qcore import round_to_dyadic
        return round_to_dyadic(p, backend.m)
    return _estimate_probability(p, backend.m, backend, backend.rng(hash(x) & 0xFFFF))


# ---------------------------------------------------------------------------
# cp / ph oracles
# ---------------------------------------------------------------------------

def state_qubits(psi: QuantumState) -> int:
    return psi.layout.total_width


def prefix_probability(psi: QuantumState, x: str) -> float:
    """Probability that the first |x| qubits (big-endian) measure to x."""
    n = state_qubits(psi)
    k = len(x)
    if k > n:
        raise ValueError("prefix longer than the state")
    block = 2 ** (n - k)
    off = (int(x, 2) if k else 0) * block
    amps = psi.amplitudes[off:off + block]
    return float(np.vdot(amps, amps).real)


def _round_closed(q: float, ell: int) -> DyadicRational:
    """Round into the closed grid D_ell plus the endpoint 1; ties toward the
    smaller numerator."""
    scale = 2 ** ell
    k0 = int(np.floor(q * scale))
    best_k, best_d = None, None
    for k in (k0, k0 + 1):
        k = min(max(k, 0), scale)
        d = abs(q - k / scale)
        if best_d is None or d < best_d - 1e-18 or (abs(d - best_d) <= 1e-18 and k < best_k):
            best_k, best_d = k, d
    return DyadicRational(best_k, ell)


def cp(psi: QuantumState, x: str, backend: OracleBackend) -> DyadicRational:
    """Conditional probability that the next qubit after prefix x reads 0,
    i.e. p(x0)/p(x) rounded into D_ell plus the endpoint 1.

    A vanishing denominator yields 1 by convention. The exact backend
    guarantees |p(x) * cp - p(x0)| <= 2^-m.
    """
    n = state_qubits(psi)
    if len(x) >= n:
        raise ValueError("prefix must be strictly shorter than the state")
    ell = backend.ell
    if backend.mode == "exact":
        px = prefix_probability(psi, x)
        px0 = prefix_probability(psi, x + "0")
        if px <= 0.0:
            return DyadicRational(2 ** ell, ell)
        return _round_closed(min(px0 / px, 1.0), ell)
    rng = backend.rng(salt=(1 + int(x, 2) if x else 1))
    fx = _estimate_probability(prefix_probability(psi, x), ell, backend, rng).value
    fx0 = _estimate_probability(prefix_probability(psi, x + "0"), ell, backend, rng).value
    if fx <= 0.0:
        return DyadicRational(2 ** ell, ell)
    return _round_closed(min(fx0 / fx, 1.0), ell)


def _interference_probability(psi: QuantumState, x: str, y: str, u: complex) -> float:
    """|(<x| + u<y|)/sqrt(2) |psi>|^2."""
    ax = psi.amplitudes[int(x, 2)]
    ay = psi.amplitudes[int(y, 2)]
    return float(abs(ax + u * ay) ** 2 / 2.0)


def ph(psi: QuantumState, backend: OracleBackend) -> PhaseOracleResult:
    """Relative phase of every basis amplitude with respect to a heavy
    reference string y_ref, rounded into U_ell.

    Combines the four interference probabilities over the units
    {1, i, -1, -i} via the identity 2 * alpha_x * conj(alpha_y) =
    sum_u u * |(<x| + u<y|)/sqrt(2) |psi>|^2. Zero-amplitude strings get
    phase 1.
    """
    n = state_qubits(psi)
    ell = backend.ell
    threshold = 0.75 * 2 ** (-n)
    weights = {}
    rng = backend.rng(salt=2)
    for i in range(2 ** n):
        xs = format(i, f"0{n}b")
        p = float(abs(psi.amplitudes[i]) ** 2)
        if backend.mode == "sampled":
            p = _estimate_probability(p, backend.m, backend, rng).value
        weights[xs] = p
    y_ref = next(xs for xs in sorted(weights) if weights[xs] >= threshold)

    one = DyadicPhase(DyadicRational(0, ell))
    phases = {y_ref: one}
    for i in range(2 ** n):
        xs = format(i, f"0{n}b")
        if xs == y_ref:
            continue
        mu = 0.0 + 0.0j
        for u in PHASE_UNITS:
            g = _interference_probability(psi, xs, y_ref, u)
            if backend.mode == "sampled":
                g = min(_estimate_probability(min(g, 1.0), backend.m, backend, rng).value, 1.0)
            mu += u * g
        cutoff = 1e-13 if backend.mode == "exact" else 2 ** (-backend.m)
        if abs(mu) < cutoff:
            phases[xs] = one
            continue
        theta = float(np.angle(mu) / (2 * np.pi))
        phases[xs] = round_to_dyadic_phase(theta, ell)

    budget = 0.0 if backend.mode == "exact" else backend.failure_budget
    return PhaseOracleResult(ph=phases, y_ref=y_ref, failure_budget=budget)
