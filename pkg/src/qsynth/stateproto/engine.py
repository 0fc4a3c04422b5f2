"""
Internal tensor engine for protocol rounds.

Protocol states are factored arrays with one axis per labelled subsystem:
qubit axes for the verifier's A/B blocks, the prover's private qubits and the
per-round message copy, plus a single qudit axis for the value register D
(whose basis is the small alphabet of dyadic numerators that can actually
occur in a round) and a flag qubit F. Keeping D as an alphabet qudit keeps
exact enumeration tractable at full message precision.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..qcore import BRANCH_DROP
from ..primitives import grow_rotation, swap_matrix

CNOT = np.array([[1, 0, 0, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1],
                 [0, 0, 1, 0]], dtype=complex)

X2 = np.array([[0, 1], [1, 0]], dtype=complex)


def lie_flag_matrix(s0: float) -> np.ndarray:
    """Flag action on a false claim: |0> -> sqrt(s0)|1> + sqrt(1-s0)|0>."""
    if not (0.0 < s0 <= 1.0):
        raise ValueError("lie soundness must lie in (0, 1]")
    c, t = np.sqrt(1.0 - s0), np.sqrt(s0)
    return np.array([[c, t], [t, -c]], dtype=complex)


class Joint:
    """A subnormalized pure state over labelled tensor factors."""

    __slots__ = ("arr", "labels")

    def __init__(self, arr: np.ndarray, labels: list):
        if arr.ndim != len(labels):
            raise ValueError("axis/label mismatch")
        self.arr = arr
        self.labels = list(labels)

    @classmethod
    def from_vector(cls, vec: np.ndarray, dims: list[int], labels: list) -> "Joint":
        return cls(np.asarray(vec, dtype=complex).reshape(dims), labels)

    def copy(self) -> "Joint":
        return Joint(self.arr.copy(), list(self.labels))

    def axes(self, labels) -> list[int]:
        return [self.labels.index(l) for l in labels]

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.arr, self.arr).real)

    def apply(self, labels, mat: np.ndarray) -> None:
        """Apply a matrix on the given ordered labels, in place."""
        ax = self.axes(labels)
        k = len(ax)
        arr = np.moveaxis(self.arr, ax, range(k))
        head = arr.shape[:k]
        d = int(np.prod(head)) if k else 1
        out = (mat @ arr.reshape(d, -1)).reshape(arr.shape)
        self.arr = np.moveaxis(out, range(k), ax)

    def cnot(self, control, target) -> None:
        self.apply([control, target], CNOT)

    def expand(self, label, dim: int) -> None:
        """Adjoin a fresh factor initialized to basis index 0 (last axis)."""
        new = np.zeros(self.arr.shape + (dim,), dtype=complex)
        new[..., 0] = self.arr
        self.arr = new
        self.labels.append(label)

    def project_basis(self, label, value: int) -> float:
        """Zero all components of ``label`` except ``value``; return the
        removed weight."""
        ax = self.axes([label])[0]
        before = self.norm2
        idx = [slice(None)] * self.arr.ndim
        keep = np.zeros(self.arr.shape[ax], dtype=bool)
        keep[value] = True
        idx[ax] = ~keep
        self.arr[tuple(idx)] = 0.0
        return before - self.norm2

    def project_symmetric(self, labels_a, labels_b) -> float:
        """Project onto the symmetric subspace of two equal blocks of qubit
        axes; returns the antisymmetric (rejected) weight."""
        r = len(labels_a)
        if r != len(labels_b):
            raise ValueError("swap blocks must have equal width")
        if r == 0:
            return 0.0
        before = self.norm2
        S = swap_matrix(r)
        P = (np.eye(S.shape[0]) + S) / 2.0
        self.apply(list(labels_a) + list(labels_b), P)
        return before - self.norm2

    def collapse(self, labels) -> list[tuple[tuple, "Joint"]]:
        """Measure the given factors in the computational basis and drop
        them; returns the surviving (outcome, core) branches."""
        if not labels:
            return [((), self)]
        ax = self.axes(labels)
        k = len(ax)
        arr = np.moveaxis(self.arr, ax, range(self.arr.ndim - k, self.arr.ndim))
        core_shape = arr.shape[:-k]
        res_dims = arr.shape[-k:]
        flat = arr.reshape(core_shape + (-1,))
        core_labels = [l for l in self.labels if l not in set(labels)]
        out = []
        for idx in range(flat.shape[-1]):
            sub = flat[..., idx]
            w = float(np.vdot(sub, sub).real)
            if w < BRANCH_DROP:
                continue
            out.append((np.unravel_index(idx, res_dims), Joint(sub.copy(), core_labels)))
        return out

    def reduced_density(self, labels) -> np.ndarray:
        """Unnormalized reduced density matrix on the given ordered labels."""
        ax = self.axes(labels)
        k = len(ax)
        arr = np.moveaxis(self.arr, ax, range(k))
        d = int(np.prod(arr.shape[:k])) if k else 1
        M = arr.reshape(d, -1)
        return M @ M.conj().T


@dataclass
class RoundCtx:
    """Per-round information visible to the prover."""

    h: int
    k: int
    n: int
    ell: int
    truth: dict
    alphabet: list
    memory: dict = field(default_factory=dict)
    b_h: Optional[int] = None


class ProverView:
    """Restricted facade through which a prover acts on a round state.

    Exposes only the message registers (the x-copy X, the value register D)
    and the prover's private qubits P — plus, inside the B-interaction hook,
    the B block handed over by the verifier.
    """

    def __init__(self, joint: Joint, k: int, ell: int, alphabet: list,
                 extra_allowed=()):
        self._joint = joint
        self.k = k
        self.ell = ell
        self.alphabet = list(alphabet)
        self._index = {lab: i for i, lab in enumerate(self.alphabet)}
        allowed = {("X", i) for i in range(k)} | {("D",)}
        allowed |= {lab for lab in joint.labels if lab[0] == "P"}
        allowed |= set(extra_allowed)
        self._allowed = allowed

    def label_index(self, numerator: int) -> int:
        return self._index[numerator]

    def apply(self, labels, mat) -> None:
        bad = [l for l in labels if l not in self._allowed]
        if bad:
            raise PermissionError(f"prover may not act on {bad}")
        self._joint.apply(labels, mat)

    def write_values(self, value_map: dict) -> None:
        """Transposition |0>_D <-> |value(x)>_D controlled on the x-copy.

        ``value_map`` maps k-bit strings to dyadic numerators drawn from the
        round alphabet. Involutory, so it serves as its own inverse.
        """
        d = len(self.alphabet)
        dx = 2 ** self.k
        M = np.zeros((dx * d, dx * d), dtype=complex)
        for xi in range(dx):
            xs = format(xi, f"0{self.k}b") if self.k else ""
            perm = np.eye(d)
            t = self._index[value_map[xs]]
            if t != 0:
                perm[0, 0] = perm[t, t] = 0.0
                perm[0, t] = perm[t, 0] = 1.0
            M[xi * d:(xi + 1) * d, xi * d:(xi + 1) * d] = perm
        labels = [("X", i) for i in range(self.k)] + [("D",)]
        self.apply(labels, M)

    def phase_branches(self, phases: dict) -> None:
        """Multiply each x-copy branch by a unit phase (keys: k-bit strings)."""
        if self.k == 0:
            return
        dx = 2 ** self.k
        diag = np.ones(dx, dtype=complex)
        for xs, ph in phases.items():
            if abs(abs(ph) - 1.0) > 1e-9:
                raise ValueError("attack phases must be unit modulus")
            diag[int(xs, 2)] = ph
        self.apply([("X", i) for i in range(self.k)], np.diag(diag))

    def cnot_message_to_private(self, message_bit: int, private_bit: int) -> None:
        self.apply([("X", message_bit), ("P", private_bit)], CNOT)
