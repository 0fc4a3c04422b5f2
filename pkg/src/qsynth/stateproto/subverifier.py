"""
The embedded sub-verifier: a unitary family, indexed by a claimed instance
(x, eta), acting on a flag qubit. It models an interactive-proof verifier
with completeness 1 and configurable soundness: a true claim drives the flag
to |1> with amplitude 1, a false claim reaches |1> with probability at most
``lie_soundness``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .approx import TargetApproximation
from .engine import X2, lie_flag_matrix


@dataclass(frozen=True)
class SubVerifier:
    """Coin-flip lie detector over the oracle data of a target approximation.

    The default ``lie_soundness = 0.5`` realizes the completeness-1 /
    soundness-1/2 contract; other values support sensitivity experiments.
    """

    approx: TargetApproximation
    lie_soundness: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.lie_soundness <= 1.0):
            raise ValueError("lie_soundness must lie in (0, 1]")

    def flag_matrix(self, truthful: bool) -> np.ndarray:
        return X2 if truthful else lie_flag_matrix(self.lie_soundness)

    def flag_one_probability(self, k: int, x: str, eta: int) -> float:
        """Acceptance probability of the claim (x, eta) at counter value k."""
        truth = self.approx.truth_map(k)[x]
        return 1.0 if eta == truth else self.lie_soundness

    def round_matrix(self, k: int, alphabet: list) -> np.ndarray:
        """Block unitary on (A_[k], D, F): controlled on the instance, act on
        the flag with the truthful or lying response."""
        truth = self.approx.truth_map(k)
        d = len(alphabet)
        dx = 2 ** k
        M = np.zeros((dx * d * 2, dx * d * 2), dtype=complex)
        lie = self.flag_matrix(False)
        for xi in range(dx):
            xs = format(xi, f"0{k}b") if k else ""
            for vi, lab in enumerate(alphabet):
                blk = X2 if lab == truth[xs] else lie
                base = (xi * d + vi) * 2
                M[base:base + 2, base:base + 2] = blk
        return M
