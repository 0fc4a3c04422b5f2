"""
Protocol building blocks: swap test, controlled grow/phase gates, phase
estimation, the maximally entangled state, and subspace recognizers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    BRANCH_DROP,
    DyadicRational,
    QuantumState,
    RegisterLayout,
    apply_unitary,
    tensor,
    _check_unitary,
)

# Default cap on eigenvalue-register width: 2^m controlled powers dominate
# runtime at desk scale.
MAX_PE_BITS = 8


# ---------------------------------------------------------------------------
# Swap test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SwapTestOutcome:
    """Result of the symmetric/antisymmetric projective measurement.

    ``branches`` maps 'S' / 'A' to the renormalized post-states (absent
    outcomes are omitted); the ancilla used internally is removed.
    """

    symmetric_prob: float
    branches: dict


def swap_matrix(width: int) -> np.ndarray:
    """Swap operator exchanging two width-qubit blocks."""
    d = 2 ** width
    S = np.zeros((d * d, d * d))
    for x in range(d):
        for y in range(d):
            S[y * d + x, x * d + y] = 1.0
    return S


def swap_test(s: QuantumState, regA, regB) -> SwapTestOutcome:
    """Two-outcome measurement {S, I-S} with S = (I + Swap)/2 on regA/regB.

    Realized by adjoining a |+> ancilla, applying controlled-Swap, rotating
    the ancilla to the Hadamard basis and measuring it; outcome 0 is the
    symmetric result 'S'.
    """
    if isinstance(regA, str):
        regA = [regA]
    if isinstance(regB, str):
        regB = [regB]
    wa = sum(s.layout.width(r) for r in regA)
    wb = sum(s.layout.width(r) for r in regB)
    if wa != wb:
        raise ValueError(f"swap test width mismatch: {wa} vs {wb}")
    if wa == 0:
        return SwapTestOutcome(1.0, {"S": s})

    anc = QuantumState(RegisterLayout([("_anc", 1)]),
                       np.array([1.0, 1.0]) / np.sqrt(2.0))
    joint = tensor(s, anc)
    d = 2 ** wa
    S = swap_matrix(wa)
    cswap = np.zeros((2 * d * d, 2 * d * d), dtype=complex)
    # target order (regA..., regB..., _anc): ancilla is the least significant bit
    for i in range(d * d):
        for j in range(d * d):
            cswap[2 * i, 2 * j] = 1.0 if i == j else 0.0
            cswap[2 * i + 1, 2 * j + 1] = S[i, j]
    joint = apply_unitary(joint, cswap, list(regA) + list(regB) + ["_anc"])
    H = np.array([[1, 1], [1, -1]]) / np.sqrt(2.0)
    joint = apply_unitary(joint, H, "_anc")

    W = joint.layout.total_width
    arr = joint.amplitudes.reshape([2] * W)
    anc_axis = joint.layout.qubit_range("_anc")[0]
    branches = {}
    p_sym = 0.0
    for outcome, label in ((0, "S"), (1, "A")):
        idx = [slice(None)] * W
        idx[anc_axis] = outcome
        sub = arr[tuple(idx)].reshape(-1)
        p = float(np.vdot(sub, sub).real)
        if outcome == 0:
            p_sym = p
        if p < BRANCH_DROP:
            continue
        branches[label] = QuantumState(s.layout, sub / np.sqrt(p))
    return SwapTestOutcome(p_sym, branches)


# ---------------------------------------------------------------------------
# Controlled grow / phase
# ---------------------------------------------------------------------------

def grow_rotation(eta: float) -> np.ndarray:
    """2x2 rotation sending |0> to sqrt(eta)|0> + sqrt(1-eta)|1>."""
    if not (-1e-12 <= eta <= 1 + 1e-12):
        raise ValueError(f"eta = {eta} outside [0, 1]")
    eta = min(max(eta, 0.0), 1.0)
    c, t = np.sqrt(eta), np.sqrt(1.0 - eta)
    return np.array([[c, -t], [t, c]])


def controlled_grow(s: QuantumState, control: str, target: str,
                    ell: int | None = None) -> QuantumState:
    """For each control basis value c, rotate the fresh target qubit to
    sqrt(eta)|0> + sqrt(1-eta)|1> with eta = min(c * 2^-ell, 1).

    ``ell`` defaults to the control width, in which case every encodable
    value lies in the half-open dyadic grid; a smaller ``ell`` lets wider
    control registers encode the closed endpoint eta = 1.
    """
    w = s.layout.width(control)
    if s.layout.width(target) != 1:
        raise ValueError("target must be a single fresh qubit")
    if ell is None:
        ell = w
    d = 2 ** w
    u = np.zeros((2 * d, 2 * d))
    for c in range(d):
        eta = min(c / 2 ** ell, 1.0)
        u[2 * c:2 * c + 2, 2 * c:2 * c + 2] = grow_rotation(eta)
    return apply_unitary(s, u, [control, target])


def controlled_phase(s: QuantumState, control: str,
                     ell: int | None = None) -> QuantumState:
    """Multiply each control-basis branch c by exp(2*pi*i * c * 2^-ell)."""
    w = s.layout.width(control)
    if ell is None:
        ell = w
    d = 2 ** w
    phases = np.exp(2j * np.pi * (np.arange(d) % 2 ** ell) / 2 ** ell)
    return apply_unitary(s, np.diag(phases), [control])


# ---------------------------------------------------------------------------
# Phase estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseEstimationResult:
    """Distribution over the eigenvalue register after phase estimation.

    ``distribution`` maps DyadicRational r (precision m) to its probability;
    ``post_states`` maps the same keys to the renormalized joint post-states.
    """

    distribution: dict
    post_states: dict

    @property
    def total(self) -> float:
        return float(sum(self.distribution.values()))


def _qft_matrix(m: int) -> np.ndarray:
    N = 2 ** m
    j, k = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    return np.exp(2j * np.pi * j * k / N) / np.sqrt(N)


def phase_estimation(u, m: int, eigvec: str, eigval: str,
                     s: QuantumState) -> QuantumState:
    """Standard phase-estimation unitary: Hadamards on the eigenvalue
    register, the controlled-u^(2^j) ladder, then the inverse QFT.

    On an eigenvector with eigenphase theta, the eigenvalue register peaks at
    the nearest r in D_m (exactly, when theta lies on the grid).
    """
    u = _check_unitary(u)
    if m > MAX_PE_BITS:
        raise ValueError(f"m = {m} exceeds the desk-scale cap {MAX_PE_BITS}")
    if s.layout.width(eigval) != m:
        raise ValueError("eigval register width must equal m")
    wv = s.layout.width(eigvec)
    if u.shape[0] != 2 ** wv:
        raise ValueError("unitary dimension does not match eigvec register")

    H = np.array([[1, 1], [1, -1]]) / np.sqrt(2.0)
    Hm = H
    for _ in range(m - 1):
        Hm = np.kron(Hm, H)
    s = apply_unitary(s, Hm, [eigval])

    # controlled powers: eigval bit j (big-endian) has significance 2^(m-1-j)
    N = 2 ** m
    dv = 2 ** wv
    cu = np.zeros((N * dv, N * dv), dtype=complex)
    powers = {}
    for y in range(N):
        if y not in powers:
            powers[y] = np.linalg.matrix_power(u, y)
        cu[y * dv:(y + 1) * dv, y * dv:(y + 1) * dv] = powers[y]
    s = apply_unitary(s, cu, [eigval, eigvec])

    s = apply_unitary(s, _qft_matrix(m).conj().T, [eigval])
    return s


def phase_estimation_result(u, m: int, eigvec_state: QuantumState,
                            eigvec: str = "V", eigval: str = "C"
                            ) -> PhaseEstimationResult:
    """Run phase estimation on ``eigvec_state`` (register ``eigvec``) with a
    fresh eigenvalue register and enumerate the measurement branches."""
    anc = QuantumState(RegisterLayout([(eigval, m)]),
                       np.concatenate(([1.0], np.zeros(2 ** m - 1))))
    joint = tensor(eigvec_state, anc)
    joint = phase_estimation(u, m, eigvec, eigval, joint)
    from .qcore import measure_register
    dist, posts = {}, {}
    for bits, p, post in measure_register(joint, eigval):
        r = DyadicRational(int(bits, 2), m)
        dist[r] = p
        posts[r] = post
    return PhaseEstimationResult(dist, posts)


def pe_kernel(theta: float, r_num: int, m: int) -> float:
    """Closed-form |<r | PE(theta)>|^2 = |sin(2^m pi d) / (2^m sin(pi d))|^2
    with d = theta - r * 2^-m; equals 1 at d = 0."""
    N = 2 ** m
    d = theta - r_num / N
    num = np.sin(np.pi * N * d)
    den = N * np.sin(np.pi * d)
    if abs(den) < 1e-300:
        return 1.0
    return float((num / den) ** 2)


# ---------------------------------------------------------------------------
# Entangled resource state and recognizers
# ---------------------------------------------------------------------------

def maximally_entangled(n: int, regA: str = "A", regB: str = "B") -> QuantumState:
    """2^(-n/2) * sum_x |x>_A |x>_B."""
    if n < 1:
        raise ValueError("n must be >= 1")
    d = 2 ** n
    amps = np.zeros(d * d, dtype=complex)
    for x in range(d):
        amps[x * d + x] = 1.0 / np.sqrt(d)
    return QuantumState(RegisterLayout([(regA, n), (regB, n)]), amps)


def recognizer_from_projector(Pi) -> np.ndarray:
    """Unitary R on (data, ancilla) with
    R(|phi>|0>) = (I-Pi)|phi>|0> + Pi|phi>|1>, completed as an involution
    (the |1>-ancilla block mirrors the action). The ancilla is the least
    significant qubit."""
    Pi = np.asarray(Pi, dtype=complex)
    if np.abs(Pi - Pi.conj().T).max() > 1e-9 or np.abs(Pi @ Pi - Pi).max() > 1e-9:
        raise ValueError("input is not an orthogonal projector within 1e-9")
    X = np.array([[0, 1], [1, 0]])
    I2 = np.eye(2)
    d = Pi.shape[0]
    return np.kron(np.eye(d) - Pi, I2) + np.kron(Pi, X)
