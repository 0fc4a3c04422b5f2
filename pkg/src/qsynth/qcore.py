"""
Exact dense engine for multi-qubit pure/mixed states over named registers,
plus the dyadic number types exchanged between verifier and prover.

Conventions:
- Register order in a layout defines big-endian indexing: the first register
  holds the most significant bits of a basis-state label.
- Amplitudes are double-precision complex; dyadic values are exact integers.
- States are immutable after construction; all operations are pure functions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import floor

import numpy as np

NORM_TOL = 1e-9
BRANCH_DROP = 1e-15


# ---------------------------------------------------------------------------
# Register layouts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegisterLayout:
    """Ordered list of (name, width) register declarations; widths may be 0."""

    registers: tuple[tuple[str, int], ...]

    def __init__(self, registers):
        regs = tuple((str(name), int(width)) for name, width in registers)
        names = [name for name, _ in regs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")
        if any(width < 0 for _, width in regs):
            raise ValueError("register widths must be >= 0")
        object.__setattr__(self, "registers", regs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.registers)

    @property
    def total_width(self) -> int:
        return sum(width for _, width in self.registers)

    @property
    def dim(self) -> int:
        return 2 ** self.total_width

    def width(self, name: str) -> int:
        for reg, w in self.registers:
            if reg == name:
                return w
        raise KeyError(f"unknown register {name!r}")

    def qubit_range(self, name: str) -> range:
        """Qubit indices of a register, 0 = most significant qubit overall."""
        offset = 0
        for reg, w in self.registers:
            if reg == name:
                return range(offset, offset + w)
            offset += w
        raise KeyError(f"unknown register {name!r}")

    def qubits_of(self, names) -> list[int]:
        out: list[int] = []
        for name in names:
            out.extend(self.qubit_range(name))
        return out


# ---------------------------------------------------------------------------
# Pure and mixed states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantumState:
    """Dense statevector over a register layout.

    Normalized by default; subnormalized states (conditioned branches) are
    permitted when constructed with ``subnormalized=True`` and expose their
    squared norm through :attr:`norm2`.
    """

    layout: RegisterLayout
    amplitudes: np.ndarray
    subnormalized: bool = field(default=False)

    def __init__(self, layout, amplitudes, subnormalized=False):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != layout.dim:
            raise ValueError(f"amplitude length {amps.shape[0]} != 2^W = {layout.dim}")
        n2 = float(np.vdot(amps, amps).real)
        if not subnormalized and abs(n2 - 1.0) > NORM_TOL:
            raise ValueError(f"state norm^2 = {n2} is not 1 within {NORM_TOL}")
        if subnormalized and n2 > 1.0 + NORM_TOL:
            raise ValueError(f"subnormalized state has norm^2 = {n2} > 1")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "subnormalized", bool(subnormalized))

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> "QuantumState":
        n2 = self.norm2
        if n2 <= BRANCH_DROP:
            raise ValueError("cannot normalize a (near-)zero state")
        return QuantumState(self.layout, self.amplitudes / np.sqrt(n2))

    def density(self) -> "DensityMatrix":
        amps = self.amplitudes
        return DensityMatrix(self.layout, np.outer(amps, amps.conj()),
                             subnormalized=self.subnormalized)

    def overlap(self, other: "QuantumState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def basis_state(layout: RegisterLayout, index: int = 0) -> QuantumState:
    amps = np.zeros(layout.dim, dtype=complex)
    amps[index] = 1.0
    return QuantumState(layout, amps)


def from_amplitudes(amplitudes, name: str = "A") -> QuantumState:
    """Single-register state over ``ceil(log2(len))`` qubits."""
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
    n = int(round(np.log2(amps.shape[0])))
    if 2 ** n != amps.shape[0]:
        raise ValueError("amplitude length must be a power of two")
    return QuantumState(RegisterLayout([(name, n)]), amps)


@dataclass(frozen=True)
class DensityMatrix:
    """Dense density operator over a register layout.

    Hermitian, PSD, trace 1 (or an explicit sub-unit trace for conditioned
    states constructed with ``subnormalized=True``).
    """

    layout: RegisterLayout
    matrix: np.ndarray
    subnormalized: bool = field(default=False)

    def __init__(self, layout, matrix, subnormalized=False):
        mat = np.asarray(matrix, dtype=complex)
        d = layout.dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} != ({d}, {d})")
        if np.abs(mat - mat.conj().T).max() > 1e-9:
            raise ValueError("density matrix is not Hermitian within 1e-9")
        eigs = np.linalg.eigvalsh(mat)
        if eigs.min() < -1e-9:
            raise ValueError(f"density matrix has eigenvalue {eigs.min()} < -1e-9")
        tr = float(np.trace(mat).real)
        if not subnormalized and abs(tr - 1.0) > 1e-9:
            raise ValueError(f"trace = {tr} is not 1 within 1e-9")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "subnormalized", bool(subnormalized))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> "DensityMatrix":
        tr = self.trace
        if tr <= BRANCH_DROP:
            raise ValueError("cannot normalize a (near-)zero density matrix")
        return DensityMatrix(self.layout, self.matrix / tr)


# ---------------------------------------------------------------------------
# Dyadic numbers and torus angles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class DyadicRational:
    """k * 2^-m with integer 0 <= k <= 2^m.

    The grid D_m is the half-open set {k * 2^-m : 0 <= k < 2^m}; the closed
    endpoint k = 2^m (value exactly 1) is additionally admitted so the
    conditional-probability oracle can honor the convention that a quotient
    with zero denominator, or a certain next bit, is exactly 1.
    """

    numerator: int
    precision: int

    def __post_init__(self):
        if self.precision < 1:
            raise ValueError("precision must be >= 1")
        if not (0 <= self.numerator <= 2 ** self.precision):
            raise ValueError(
                f"numerator {self.numerator} out of range for precision {self.precision}")

    @property
    def value(self) -> float:
        return self.numerator / 2 ** self.precision

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class DyadicPhase:
    """exp(2*pi*i*r) for r in D_m."""

    r: DyadicRational

    def __post_init__(self):
        if self.r.numerator >= 2 ** self.r.precision:
            raise ValueError("phase index must lie in the half-open grid")

    @property
    def value(self) -> complex:
        return complex(np.exp(2j * np.pi * self.r.value))

    def __complex__(self) -> complex:
        return self.value


def torus_distance(r: float, s: float) -> float:
    """Distance on R/Z: min over integer shifts of |r - s|; always <= 1/2."""
    d = (r - s) % 1.0
    return min(d, 1.0 - d)


@dataclass(frozen=True)
class TorusAngle:
    """A point on the unit torus R/Z, stored as theta in [0, 1)."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % 1.0)

    def distance_to(self, other) -> float:
        theta = other.theta if isinstance(other, TorusAngle) else float(other)
        return torus_distance(self.theta, theta)


def round_to_dyadic(x: float, m: int) -> DyadicRational:
    """Nearest element of D_m to x in [0, 1]; ties toward smaller numerator.

    Always returns a half-open grid element (numerator < 2^m), so 1.0 rounds
    to the largest element 1 - 2^-m.
    """
    if m < 1:
        raise ValueError("precision must be >= 1")
    if not (-1e-12 <= x <= 1.0 + 1e-12):
        raise ValueError(f"x = {x} outside [0, 1]")
    x = min(max(x, 0.0), 1.0)
    scale = 2 ** m
    k0 = floor(x * scale)
    best_k, best_d = None, None
    for k in (k0, k0 + 1):
        k = min(max(k, 0), scale - 1)
        d = abs(x - k / scale)
        if best_d is None or d < best_d - 1e-18 or (abs(d - best_d) <= 1e-18 and k < best_k):
            best_k, best_d = k, d
    return DyadicRational(best_k, m)


def round_to_dyadic_phase(theta, m: int) -> DyadicPhase:
    """Torus-nearest element of U_m; ties toward smaller numerator."""
    t = theta.theta if isinstance(theta, TorusAngle) else float(theta) % 1.0
    scale = 2 ** m
    k0 = floor(t * scale)
    best_k, best_d = None, None
    for k in (k0, k0 + 1):
        kk = k % scale
        d = torus_distance(t, kk / scale)
        if best_d is None or d < best_d - 1e-18 or (abs(d - best_d) <= 1e-18 and kk < best_k):
            best_k, best_d = kk, d
    return DyadicPhase(DyadicRational(best_k, m))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def tensor(a: QuantumState, b: QuantumState) -> QuantumState:
    """Tensor product; register names must be disjoint."""
    common = set(a.layout.names) & set(b.layout.names)
    if common:
        raise ValueError(f"register name collision: {sorted(common)}")
    layout = RegisterLayout(list(a.layout.registers) + list(b.layout.registers))
    amps = np.kron(a.amplitudes, b.amplitudes)
    return QuantumState(layout, amps, subnormalized=a.subnormalized or b.subnormalized)


def _check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary must be square, got {u.shape}")
    if np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() > 1e-8:
        raise ValueError("matrix is not unitary within tolerance")
    return u


def apply_unitary(s: QuantumState, u, targets) -> QuantumState:
    """Apply u on the ordered target registers, identity elsewhere."""
    if isinstance(targets, str):
        targets = [targets]
    u = _check_unitary(u)
    qubits = s.layout.qubits_of(targets)
    tw = len(qubits)
    if u.shape[0] != 2 ** tw:
        raise ValueError(f"unitary dim {u.shape[0]} != 2^{tw}")
    W = s.layout.total_width
    if tw == 0:
        # zero-width target: u is the 1x1 global phase
        return QuantumState(s.layout, s.amplitudes * u[0, 0],
                            subnormalized=s.subnormalized)
    arr = s.amplitudes.reshape([2] * W)
    arr = np.moveaxis(arr, qubits, range(tw))
    arr = (u @ arr.reshape(2 ** tw, -1)).reshape([2] * W)
    arr = np.moveaxis(arr, range(tw), qubits)
    return QuantumState(s.layout, arr.reshape(-1), subnormalized=s.subnormalized)


def partial_trace(d: DensityMatrix, discard) -> DensityMatrix:
    """Trace out the named registers; keeps the remaining register order."""
    if isinstance(discard, str):
        discard = [discard]
    for name in discard:
        d.layout.width(name)  # raises on unknown register
    keep = [(name, w) for name, w in d.layout.registers if name not in set(discard)]
    drop_qubits = d.layout.qubits_of(discard)
    keep_qubits = [q for q in range(d.layout.total_width) if q not in set(drop_qubits)]
    W = d.layout.total_width
    kd = 2 ** len(keep_qubits)
    dd = 2 ** len(drop_qubits)
    mat = d.matrix.reshape([2] * (2 * W))
    perm = (keep_qubits + drop_qubits
            + [W + q for q in keep_qubits] + [W + q for q in drop_qubits])
    mat = np.transpose(mat, perm).reshape(kd, dd, kd, dd)
    reduced = np.einsum("arbr->ab", mat)
    return DensityMatrix(RegisterLayout(keep), reduced, subnormalized=d.subnormalized)


def measure_register(s: QuantumState, target: str):
    """Exact branch enumeration of a computational-basis measurement.

    Returns a list of (outcome bit-string, probability, renormalized
    post-state); probabilities sum to norm^2(s). Branches below the drop
    threshold are omitted.
    """
    w = s.layout.width(target)
    qubits = s.layout.qubits_of([target])
    W = s.layout.total_width
    arr = s.amplitudes.reshape([2] * W) if W else s.amplitudes.reshape(())
    branches = []
    for outcome in range(2 ** w):
        bits = [(outcome >> (w - 1 - i)) & 1 for i in range(w)]
        idx = [slice(None)] * W
        for q, b in zip(qubits, bits):
            idx[q] = b
        sub = np.zeros_like(arr)
        sub[tuple(idx)] = arr[tuple(idx)]
        p = float(np.vdot(sub, sub).real)
        if p < BRANCH_DROP:
            continue
        post = QuantumState(s.layout, sub.reshape(-1) / np.sqrt(p))
        branches.append((format(outcome, f"0{w}b"), p, post))
    return branches


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """(1/2) * trace norm of (a - b), via eigenvalues of the difference."""
    if a.layout.registers != b.layout.registers:
        raise ValueError("layout mismatch")
    eigs = np.linalg.eigvalsh(a.matrix - b.matrix)
    return float(0.5 * np.abs(eigs).sum())


def fidelity_bound_check(phi: QuantumState, sigma: DensityMatrix):
    """Return (td, sqrt(1 - <phi|sigma|phi>), holds) for a pure/mixed pair."""
    if abs(phi.norm2 - 1.0) > NORM_TOL:
        raise ValueError("phi must be normalized")
    td = trace_distance(phi.density(), sigma)
    overlap = float(np.real(np.vdot(phi.amplitudes, sigma.matrix @ phi.amplitudes)))
    bound = float(np.sqrt(max(0.0, 1.0 - overlap)))
    return td, bound, td <= bound + 1e-9
