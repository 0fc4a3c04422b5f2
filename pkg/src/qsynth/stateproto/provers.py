"""
Prover strategies: the honest prover, attack wrappers and test provers.

A strategy is stateless; any per-run state (e.g. "the attack has fired")
lives in the round context's memory dict, which the protocol runner clones
at every branch point of the exact enumeration.
"""
from __future__ import annotations

import numpy as np

from .approx import TargetApproximation
from .engine import ProverView, RoundCtx
from ..primitives import grow_rotation


def rotation_between(source: np.ndarray, dest: np.ndarray) -> np.ndarray:
    """Unitary acting as a rotation in span{source, dest} sending the unit
    vector ``source`` to the unit vector ``dest``; identity on the
    orthogonal complement. Deterministic."""
    s = np.asarray(source, dtype=complex)
    c = np.asarray(dest, dtype=complex)
    overlap = np.vdot(s, c)
    w = c - overlap * s
    nw = np.linalg.norm(w)
    d = len(s)
    if nw < 1e-14:
        # dest is parallel to source: a pure phase on the source direction
        return np.eye(d) + (overlap - 1.0) * np.outer(s, s.conj())
    e2 = w / nw
    c_perp = -np.conj(nw) * s + np.conj(overlap) * e2
    U = np.eye(d, dtype=complex)
    U -= np.outer(s, s.conj()) + np.outer(e2, e2.conj())
    U += np.outer(c, s.conj()) + np.outer(c_perp, e2.conj())
    return U


class ProverStrategy:
    """Base strategy: hooks are no-ops, no private qubits, no extra values."""

    name = "null"
    private_width = 0

    def extra_d_values(self, k: int, truth: dict):
        return ()

    def on_forward_qip(self, view: ProverView, ctx: RoundCtx) -> None:
        pass

    def on_backward_qip(self, view: ProverView, ctx: RoundCtx) -> None:
        pass

    def on_b_announced(self, b_h: int, ctx: RoundCtx) -> None:
        pass

    def on_b_grow(self, view: ProverView, ctx: RoundCtx, r: int, b_labels) -> None:
        pass

    def required_private_width(self, n: int) -> int:
        return self.private_width

    def describe(self) -> str:
        return self.__doc__ or self.name


class HonestProver(ProverStrategy):
    """Writes the true oracle values, reverses itself exactly, and keeps the
    B block synchronized with the verifier's grown state."""

    name = "honest"

    def __init__(self, approx: TargetApproximation):
        self.approx = approx

    def on_forward_qip(self, view, ctx):
        view.write_values(ctx.truth)

    def on_backward_qip(self, view, ctx):
        view.write_values(ctx.truth)  # transposition; self-inverse

    def grow_matrix_for_b(self, r: int) -> np.ndarray:
        """Unitary on B_[r] mapping the phase-free prefix state of width r-1
        (tensored with |0>) to the width-r prefix state — or, at r = n+1
        (capped to n), imprinting the final relative phases."""
        a = self.approx
        if r <= a.n:
            k = r - 1
            d = 2 ** k
            M = np.zeros((2 * d, 2 * d), dtype=complex)
            for xi in range(d):
                xs = format(xi, f"0{k}b") if k else ""
                M[2 * xi:2 * xi + 2, 2 * xi:2 * xi + 2] = grow_rotation(a.g[xs])
            return M
        phases = [a.phase_value(format(i, f"0{a.n}b")) for i in range(2 ** a.n)]
        return np.diag(phases)

    def on_b_grow(self, view, ctx, r, b_labels):
        if ctx.b_h != 1:
            return
        a = self.approx
        if ctx.k < a.n:
            view.apply(b_labels[:ctx.k + 1], self.grow_matrix_for_b(ctx.k + 1))
        else:
            view.apply(b_labels[:a.n], self.grow_matrix_for_b(a.n + 1))


class PhaseAttackProver(ProverStrategy):
    """Behaves as ``base`` but multiplies message branches by the configured
    unit phases during the forward step of the designated round (by default:
    once, the first time the grow counter reaches its trigger value)."""

    name = "phase-attack"

    def __init__(self, base: ProverStrategy, phases: dict,
                 trigger_k: int | None = None, once: bool = True):
        self.base = base
        self.phases = dict(phases)
        self.trigger_k = trigger_k
        self.once = once

    def required_private_width(self, n: int) -> int:
        return self.base.required_private_width(n)

    def extra_d_values(self, k, truth):
        return self.base.extra_d_values(k, truth)

    def _trigger(self, ctx):
        want = ctx.n if self.trigger_k is None else self.trigger_k
        if ctx.k != want:
            return False
        if self.once and ctx.memory.get("phase_attack_fired"):
            return False
        return True

    def on_forward_qip(self, view, ctx):
        self.base.on_forward_qip(view, ctx)
        if self._trigger(ctx):
            keyed = {xs: ph for xs, ph in self.phases.items() if len(xs) == ctx.k}
            view.phase_branches(keyed)
            ctx.memory["phase_attack_fired"] = True

    def on_backward_qip(self, view, ctx):
        self.base.on_backward_qip(view, ctx)

    def on_b_announced(self, b_h, ctx):
        self.base.on_b_announced(b_h, ctx)

    def on_b_grow(self, view, ctx, r, b_labels):
        self.base.on_b_grow(view, ctx, r, b_labels)


class EntanglementAttackProver(ProverStrategy):
    """Behaves as ``base`` but, during the designated backward step, copies
    branch-distinguishing bits of its message view into its private register
    instead of leaving the round residue-free."""

    name = "entanglement-attack"

    def __init__(self, base: ProverStrategy, qubits=None,
                 trigger_k: int | None = None, once: bool = True):
        self.base = base
        self.qubits = None if qubits is None else tuple(qubits)
        self.trigger_k = trigger_k
        self.once = once

    def required_private_width(self, n: int) -> int:
        if self.qubits is not None:
            return max(self.base.private_width, max(self.qubits) + 1)
        return max(self.base.private_width, n)

    def extra_d_values(self, k, truth):
        return self.base.extra_d_values(k, truth)

    def _trigger(self, ctx):
        want = ctx.n if self.trigger_k is None else self.trigger_k
        if ctx.k != want or ctx.k == 0:
            return False
        if self.once and ctx.memory.get("ent_attack_fired"):
            return False
        return True

    def on_forward_qip(self, view, ctx):
        self.base.on_forward_qip(view, ctx)

    def on_backward_qip(self, view, ctx):
        if self._trigger(ctx):
            bits = self.qubits if self.qubits is not None else range(ctx.k)
            for j in bits:
                view.cnot_message_to_private(j, j)
            ctx.memory["ent_attack_fired"] = True
        self.base.on_backward_qip(view, ctx)

    def on_b_announced(self, b_h, ctx):
        self.base.on_b_announced(b_h, ctx)

    def on_b_grow(self, view, ctx, r, b_labels):
        self.base.on_b_grow(view, ctx, r, b_labels)


class LyingProver(HonestProver):
    """Honest-shaped prover that writes configured wrong values for selected
    prefixes (keys of ``wrong``, bit-strings of any length)."""

    name = "lying"

    def __init__(self, approx: TargetApproximation, wrong: dict):
        super().__init__(approx)
        self.wrong = dict(wrong)

    def _values(self, ctx):
        return {xs: self.wrong.get(xs, t) for xs, t in ctx.truth.items()}

    def extra_d_values(self, k, truth):
        return [v for xs, v in self.wrong.items() if len(xs) == k]

    def on_forward_qip(self, view, ctx):
        view.write_values(self._values(ctx))

    def on_backward_qip(self, view, ctx):
        view.write_values(self._values(ctx))


class SwapSabotageProver(HonestProver):
    """Honest prover that, at the final grow interaction, rotates the B block
    toward a state of configured squared overlap with the verifier's content,
    making the last swap test accept with probability exactly
    (1 + overlap) / 2.

    ``overlap = 0`` places an exactly orthogonal state in B."""

    name = "swap-sabotage"

    def __init__(self, approx: TargetApproximation, overlap: float):
        super().__init__(approx)
        if not (0.0 <= overlap <= 1.0):
            raise ValueError("overlap must lie in [0, 1]")
        self.overlap = overlap

    def on_b_grow(self, view, ctx, r, b_labels):
        super().on_b_grow(view, ctx, r, b_labels)
        if ctx.b_h != 1 or ctx.k != ctx.n:
            return
        a = self.approx
        s = a.psi_tilde.amplitudes
        # deterministic orthogonal direction: orthogonalize the basis state
        # of least weight against the target
        j = int(np.argmin(np.abs(s)))
        w = np.eye(len(s))[j].astype(complex) - np.conj(s[j]) * s
        w /= np.linalg.norm(w)
        dest = np.sqrt(self.overlap) * s + np.sqrt(1.0 - self.overlap) * w
        view.apply(b_labels[:a.n], rotation_between(s, dest))
