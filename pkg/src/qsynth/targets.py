"""Standard target states and unitaries used by the CLI scenarios and tests."""
from __future__ import annotations

import numpy as np

from .qcore import RegisterLayout, QuantumState


def _state(amps: np.ndarray, n: int) -> QuantumState:
    return QuantumState(RegisterLayout([("A", n)]), amps)


def zero_state(n: int) -> QuantumState:
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = 1.0
    return _state(amps, n)


def plus_state(n: int) -> QuantumState:
    return _state(np.full(2 ** n, 2 ** (-n / 2), dtype=complex), n)


def ghz_state(n: int) -> QuantumState:
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return _state(amps, n)


def w_state(n: int) -> QuantumState:
    if n < 1:
        raise ValueError("W state needs at least one qubit")
    amps = np.zeros(2 ** n, dtype=complex)
    for i in range(n):
        amps[1 << i] = 1 / np.sqrt(n)
    return _state(amps, n)


def random_state(n: int, seed: int = 0) -> QuantumState:
    rng = np.random.Generator(np.random.Philox(key=seed))
    amps = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return _state(amps / np.linalg.norm(amps), n)


# -- small gate library for random circuits ---------------------------------

_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
_T = np.diag([1.0, np.exp(1j * np.pi / 4)])
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                 dtype=float)


def random_circuit_state(n: int, depth: int, seed: int = 0) -> QuantumState:
    """Apply ``depth`` layers of randomly placed H/T/CNOT gates to |0...0>."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    psi = np.zeros([2] * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for _ in range(depth):
        choice = rng.integers(0, 3)
        if choice == 2 and n >= 2:
            q = list(rng.choice(n, size=2, replace=False))
            mat = _CNOT.reshape(2, 2, 2, 2)
            psi = np.moveaxis(
                np.tensordot(mat, np.moveaxis(psi, q, [0, 1]),
                             axes=([2, 3], [0, 1])),
                [0, 1], q)
        else:
            gate = _H if choice == 0 else _T
            q = int(rng.integers(0, n))
            psi = np.moveaxis(
                np.tensordot(gate, np.moveaxis(psi, q, 0), axes=(1, 0)),
                0, q)
    return _state(psi.reshape(-1), n)


def diag_unitary(angles) -> np.ndarray:
    """Diagonal unitary with eigenphases 2*pi*angles (angles in turns)."""
    angles = np.asarray(angles, dtype=float)
    return np.diag(np.exp(2j * np.pi * angles))


def random_unitary(dim: int, seed: int = 0) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
