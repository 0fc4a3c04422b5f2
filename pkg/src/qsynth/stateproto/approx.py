"""
Target approximation: the dyadic conditionals/marginals certified by the
protocol and the intermediate prefix states they induce.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..qcore import (
    DyadicPhase,
    QuantumState,
    RegisterLayout,
    trace_distance,
)
from ..tomography import OracleBackend, cp, ph


def _prefixes(n: int):
    for k in range(n):
        for i in range(2 ** k):
            yield format(i, f"0{k}b") if k else ""


@dataclass(frozen=True)
class TargetApproximation:
    """Dyadic oracle data for a target state and the states built from it.

    ``cp_num[x]`` is the numerator (precision ell, closed grid including
    2^ell) of the conditional probability that the qubit after prefix x
    reads 0; ``ph_num[x]`` is the numerator of the relative phase of the
    full string x. ``states[k]`` is the phase-free prefix state on the first
    k qubits and ``psi_tilde`` the final state including phases.
    """

    n: int
    ell: int
    m: int
    cp_num: dict
    ph_num: dict
    y_ref: str
    g: dict            # prefix -> probability that the next bit is 0
    p: dict            # bit-string (any length <= n) -> marginal probability
    states: tuple      # phase-free prefix states, k = 0..n
    psi_tilde: QuantumState
    td_bound: float    # closeness bound for the reconstruction
    td_to_target: float

    def truth_map(self, k: int) -> dict:
        """Oracle numerators claimed at a round with counter k: conditional
        probabilities below the top level, relative phases at k = n."""
        if k < self.n:
            return {x: self.cp_num[x] for x in self._strings(k)}
        return dict(self.ph_num)

    def _strings(self, k: int):
        return [format(i, f"0{k}b") if k else "" for i in range(2 ** k)]

    def phase_value(self, x: str) -> complex:
        return complex(np.exp(2j * np.pi * self.ph_num[x] / 2 ** self.ell))


def build_target_approximation(psi: QuantumState, ell: int | None = None,
                               m: int | None = None,
                               backend: OracleBackend | None = None
                               ) -> TargetApproximation:
    """Query the cp/ph oracles on every prefix and assemble the approximate
    conditionals, marginals and prefix states."""
    if backend is None:
        backend = OracleBackend(mode="exact", m=10 if m is None else m,
                                ell=ell)
    n = psi.layout.total_width
    ell = backend.ell
    m = backend.m

    cp_num, g, p = {}, {}, {"": 1.0}
    for x in _prefixes(n):
        c = cp(psi, x, backend)
        cp_num[x] = c.numerator
        g[x] = c.value
        p[x + "0"] = p[x] * c.value
        p[x + "1"] = p[x] * (1.0 - c.value)

    phase_result = ph(psi, backend)
    ph_num = {x: phase.r.numerator for x, phase in phase_result.ph.items()}

    states = []
    for k in range(n + 1):
        amps = np.array([np.sqrt(p[format(i, f"0{k}b") if k else ""])
                         for i in range(2 ** k)], dtype=complex)
        states.append(QuantumState(RegisterLayout([("A", k)]), amps))

    final = np.array([np.exp(2j * np.pi * ph_num[format(i, f"0{n}b")] / 2 ** ell)
                      * np.sqrt(p[format(i, f"0{n}b")])
                      for i in range(2 ** n)], dtype=complex)
    psi_tilde = QuantumState(RegisterLayout([("A", n)]), final)

    bound = 2 ** n * (n + 1) * 2 ** (-m / 2.0) + n * 2 ** (-ell)
    target = QuantumState(RegisterLayout([("A", n)]), psi.amplitudes)
    td = trace_distance(psi_tilde.density(), target.density())
    if td > bound + 1e-9:
        raise AssertionError(
            f"reconstruction distance {td} exceeds its bound {bound}")
    return TargetApproximation(
        n=n, ell=ell, m=m, cp_num=cp_num, ph_num=ph_num,
        y_ref=phase_result.y_ref, g=g, p=p, states=tuple(states),
        psi_tilde=psi_tilde, td_bound=bound, td_to_target=td)
