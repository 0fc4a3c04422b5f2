"""
Interactive state-synthesis protocol runners.

``run_protocol`` executes the full grow/test round structure with swap-test
cross checks; ``flawed_protocol`` is the insecure single-register variant;
``trusted_oracle_synthesis`` is the baseline loop with a trusted value
oracle; ``amplified_protocol`` sequentially repeats independent instances;
``constant_round_protocol`` is the conjectured constant-round variant.

Exact-enumeration mode branches over every round-type string and every
measurement outcome, so acceptance probabilities and conditioned outputs
carry no sampling error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..qcore import (
    BRANCH_DROP,
    DensityMatrix,
    QuantumState,
    RegisterLayout,
    trace_distance,
)
from ..primitives import grow_rotation
from .approx import TargetApproximation, build_target_approximation
from .engine import Joint, ProverView, RoundCtx
from .provers import HonestProver, ProverStrategy
from .subverifier import SubVerifier


@dataclass(frozen=True)
class ProtocolConfig:
    """Protocol parameters.

    Desk-scale defaults: t = 3n rounds; the proof-driven parameterization
    (t = 18q + 3n + 54, m = 4q + 12n) is available via
    :meth:`paper_parameters` but is far beyond exact enumeration.
    ``b_string`` optionally forces the round-type string instead of
    enumerating/sampling it uniformly.
    """

    n: int
    t: Optional[int] = None
    ell: int = 10
    m: int = 10
    q: Optional[int] = None
    mode: str = "exact"
    seed: int = 0
    b_string: Optional[str] = None

    def __post_init__(self):
        if self.t is None:
            object.__setattr__(self, "t", 3 * self.n)
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.mode not in ("exact", "trajectory"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.b_string is not None:
            if len(self.b_string) != self.t or set(self.b_string) - {"0", "1"}:
                raise ValueError("b_string must be a t-bit string")

    @classmethod
    def paper_parameters(cls, n: int, q: int) -> "ProtocolConfig":
        return cls(n=n, t=18 * q + 3 * n + 54, m=4 * q + 12 * n,
                   ell=4 * q + 12 * n, q=q)


@dataclass(frozen=True)
class ProtocolTranscript:
    """Trajectory-mode record: round types, grow-counter trace, and where
    (and why) the verifier rejected, if it did."""

    b: str
    k_trace: tuple
    reject_round: Optional[int] = None
    reject_cause: Optional[str] = None

    def __post_init__(self):
        ks = self.k_trace
        if any(ks[i + 1] < ks[i] for i in range(len(ks) - 1)):
            raise ValueError("grow counter must be nondecreasing")


@dataclass(frozen=True)
class LeafBranch:
    """Terminal node of the exact enumeration: all round-type strings that
    extend ``b_prefix`` behave identically from here on."""

    b_prefix: tuple
    k_final: int
    prob_b_prefix: float
    accept_weight: float
    rho: np.ndarray  # unnormalized output block on A


@dataclass
class RunResult:
    accept_probability: float
    conditioned_output: Optional[DensityMatrix]
    td_to_target: Optional[float]
    td_to_approx_target: Optional[float]
    transcripts: list = field(default_factory=list)
    branch_rejections: dict = field(default_factory=dict)
    leaves: list = field(default_factory=list)
    mode: str = "exact"
    metadata: dict = field(default_factory=dict)


class _Rejected(Exception):
    def __init__(self, cause):
        self.cause = cause


class _Runner:
    """Shared round executor for the grow/test protocols."""

    def __init__(self, subv: SubVerifier, prover: ProverStrategy,
                 cfg: ProtocolConfig):
        self.subv = subv
        self.prover = prover
        self.cfg = cfg
        self.approx = subv.approx
        self.n = self.approx.n
        self.ell = self.approx.ell
        self.p_width = prover.required_private_width(self.n)
        self._alphabets: dict = {}
        self._subv_mats: dict = {}
        self._grow_mats: dict = {}

    # -- cached per-round structure ------------------------------------
    def alphabet(self, k: int) -> list:
        if k not in self._alphabets:
            truth = self.approx.truth_map(k)
            extras = self.prover.extra_d_values(k, truth)
            self._alphabets[k] = sorted({0} | set(truth.values()) | set(extras))
        return self._alphabets[k]

    def subv_matrix(self, k: int) -> np.ndarray:
        if k not in self._subv_mats:
            self._subv_mats[k] = self.subv.round_matrix(k, self.alphabet(k))
        return self._subv_mats[k]

    def grow_matrix(self, k: int) -> np.ndarray:
        """Block unitary on (D, fresh qubit): rotate by the claimed value."""
        if k not in self._grow_mats:
            alphabet = self.alphabet(k)
            d = len(alphabet)
            M = np.zeros((2 * d, 2 * d), dtype=complex)
            for vi, lab in enumerate(alphabet):
                eta = min(lab / 2 ** self.ell, 1.0)
                M[2 * vi:2 * vi + 2, 2 * vi:2 * vi + 2] = grow_rotation(eta)
            self._grow_mats[k] = M
        return self._grow_mats[k]

    def phase_diag(self, k: int) -> np.ndarray:
        alphabet = self.alphabet(k)
        scale = 2 ** self.ell
        return np.diag(np.exp(2j * np.pi * (np.array(alphabet) % scale) / scale))

    # -- state construction ---------------------------------------------
    def initial_core(self, with_b: bool = True) -> Joint:
        labels = [("A", i) for i in range(self.n)]
        if with_b:
            labels += [("B", i) for i in range(self.n)]
        labels += [("P", i) for i in range(self.p_width)]
        arr = np.zeros([2] * len(labels), dtype=complex)
        arr[(0,) * len(labels)] = 1.0
        return Joint(arr, labels)

    # -- one protocol round ----------------------------------------------
    def execute_round(self, joint: Joint, k: int, b_h: int, memory: dict,
                      h: int, include_b: bool = True, rng=None):
        """Run one round in place. Returns (list of surviving cores,
        flag-rejection weight, swap-rejection weight).

        With ``rng`` set (trajectory mode) measurements are sampled: a
        rejecting outcome raises ``_Rejected`` and the returned list holds
        the single sampled branch, renormalized.
        """
        n, ell = self.n, self.ell
        alphabet = self.alphabet(k)
        x_labels = [("X", i) for i in range(k)]
        for lab in x_labels:
            joint.expand(lab, 2)
        joint.expand(("D",), len(alphabet))
        joint.expand(("F",), 2)
        for i in range(k):
            joint.cnot(("A", i), ("X", i))

        ctx = RoundCtx(h=h, k=k, n=n, ell=ell,
                       truth=self.approx.truth_map(k),
                       alphabet=alphabet, memory=memory)
        view = ProverView(joint, k, ell, alphabet)
        self.prover.on_forward_qip(view, ctx)

        subv_labels = [("A", i) for i in range(k)] + [("D",), ("F",)]
        M = self.subv_matrix(k)
        joint.apply(subv_labels, M)

        rej_flag = 0.0
        if b_h == 1:
            if rng is None:
                rej_flag = joint.project_basis(("F",), 1)
            else:
                total = joint.norm2
                rej_flag = joint.project_basis(("F",), 1)
                if rng.random() < rej_flag / total:
                    raise _Rejected("flag-measurement")
                joint.arr /= np.sqrt(1.0 - rej_flag / total)
                rej_flag = 0.0
            if k < n:
                joint.apply([("D",), ("A", k)], self.grow_matrix(k))
            else:
                joint.apply([("D",)], self.phase_diag(k))

        joint.apply(subv_labels, M.conj().T)
        self.prover.on_backward_qip(view, ctx)
        for i in range(k):
            joint.cnot(("A", i), ("X", i))

        ctx.b_h = b_h
        self.prover.on_b_announced(b_h, ctx)

        rej_swap = 0.0
        if include_b:
            r = min(k + b_h, n)
            b_labels = [("B", i) for i in range(n)]
            view_b = ProverView(joint, k, ell, alphabet,
                                extra_allowed=b_labels[:r])
            self.prover.on_b_grow(view_b, ctx, r, b_labels)
            if r > 0:
                if rng is None:
                    rej_swap = joint.project_symmetric(
                        [("A", i) for i in range(r)], b_labels[:r])
                else:
                    total = joint.norm2
                    rej_swap = joint.project_symmetric(
                        [("A", i) for i in range(r)], b_labels[:r])
                    if rng.random() < rej_swap / total:
                        raise _Rejected("swap-test")
                    joint.arr /= np.sqrt(1.0 - rej_swap / total)
                    rej_swap = 0.0

        branches = joint.collapse(x_labels + [("D",), ("F",)])
        cores = [core for _, core in branches]
        if rng is not None and len(cores) > 1:
            weights = np.array([c.norm2 for c in cores])
            pick = rng.choice(len(cores), p=weights / weights.sum())
            core = cores[pick]
            core.arr /= np.sqrt(core.norm2)
            cores = [core]
        return cores, rej_flag, rej_swap


def _finalize(runner: _Runner, leaves, r_a, target: QuantumState,
              cfg: ProtocolConfig, transcripts=None, metadata=None) -> RunResult:
    n = runner.n
    accept = sum(leaf.prob_b_prefix * leaf.accept_weight for leaf in leaves)
    layout = RegisterLayout([("A", n)])
    conditioned = None
    td_t = td_a = None
    if accept > BRANCH_DROP:
        rho = sum(leaf.prob_b_prefix * leaf.rho for leaf in leaves) / accept
        rho = 0.5 * (rho + rho.conj().T)
        conditioned = DensityMatrix(layout, rho)
        tgt = QuantumState(layout, target.amplitudes)
        td_t = trace_distance(conditioned, tgt.density())
        td_a = trace_distance(conditioned, runner.approx.psi_tilde.density())
    return RunResult(accept_probability=float(accept),
                     conditioned_output=conditioned,
                     td_to_target=td_t, td_to_approx_target=td_a,
                     transcripts=transcripts or [],
                     branch_rejections=dict(r_a), leaves=list(leaves),
                     mode=cfg.mode, metadata=metadata or {})


def run_protocol(target: QuantumState, prover: ProverStrategy,
                 subv: SubVerifier, cfg: ProtocolConfig) -> RunResult:
    """Execute the interactive synthesis protocol.

    Each round: forward step (x-copy to the prover, prover writes the value
    register, sub-verifier runs unitarily), then — on a grow round — flag
    measurement and controlled grow/phase; exact backward step; round type
    announced; prover acts on the B block; swap test between the grown A and
    B blocks. The grow counter k advances on grow rounds and the run exits
    early once k = n + 1.
    """
    n = target.layout.total_width
    if cfg.n != n:
        raise ValueError("config width does not match the target state")
    if subv.approx.n != n:
        raise ValueError("sub-verifier oracle width does not match the target")
    runner = _Runner(subv, prover, cfg)
    if cfg.mode == "trajectory":
        return _run_trajectory(runner, target, cfg)

    a_labels = [("A", i) for i in range(n)]
    r_a: dict = {}
    leaves: list = []

    def recurse(cores, k, h, prefix, pb):
        if k == n + 1 or h > cfg.t:
            w = sum(c.norm2 for c, _ in cores)
            rho = sum((c.reduced_density(a_labels) for c, _ in cores),
                      np.zeros((2 ** n, 2 ** n), dtype=complex))
            leaves.append(LeafBranch(prefix, k, pb, float(w), rho))
            return
        choices = ([int(cfg.b_string[h - 1])] if cfg.b_string is not None
                   else [0, 1])
        for b_h in choices:
            pb_next = pb * (1.0 if cfg.b_string is not None else 0.5)
            new_cores = []
            rf = rs = 0.0
            for core, mem in cores:
                mem2 = dict(mem)
                branches, f, s = runner.execute_round(
                    core.copy(), k, b_h, mem2, h)
                rf += f
                rs += s
                new_cores.extend((br, dict(mem2)) for br in branches)
            r_a[prefix + (b_h,)] = {"flag": rf, "swap": rs}
            recurse(new_cores, k + b_h, h + 1, prefix + (b_h,), pb_next)

    recurse([(runner.initial_core(), {})], 0, 1, (), 1.0)
    return _finalize(runner, leaves, r_a, target, cfg,
                     metadata={"t": cfg.t, "prover": prover.name})


def _run_trajectory(runner: _Runner, target: QuantumState,
                    cfg: ProtocolConfig) -> RunResult:
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    n, t = runner.n, cfg.t
    core = runner.initial_core()
    memory: dict = {}
    k = 0
    k_trace = [0]
    bits = []
    reject = None
    for h in range(1, t + 1):
        if k == n + 1:
            break
        b_h = (int(cfg.b_string[h - 1]) if cfg.b_string is not None
               else int(rng.integers(0, 2)))
        bits.append(b_h)
        try:
            cores, _, _ = runner.execute_round(core, k, b_h, memory, h, rng=rng)
            core = cores[0]
        except _Rejected as exc:
            reject = (h, exc.cause)
            break
        k += b_h
        k_trace.append(k)
    transcript = ProtocolTranscript(
        b="".join(map(str, bits)), k_trace=tuple(k_trace),
        reject_round=None if reject is None else reject[0],
        reject_cause=None if reject is None else reject[1])
    layout = RegisterLayout([("A", n)])
    if reject is not None:
        return RunResult(0.0, None, None, None, transcripts=[transcript],
                         mode="trajectory")
    a_labels = [("A", i) for i in range(n)]
    rho = core.reduced_density(a_labels)
    rho /= np.trace(rho).real
    conditioned = DensityMatrix(layout, 0.5 * (rho + rho.conj().T))
    tgt = QuantumState(layout, target.amplitudes)
    return RunResult(
        1.0, conditioned,
        trace_distance(conditioned, tgt.density()),
        trace_distance(conditioned, runner.approx.psi_tilde.density()),
        transcripts=[transcript], mode="trajectory")


def flawed_protocol(target: QuantumState, prover: ProverStrategy,
                    subv: SubVerifier, cfg: ProtocolConfig) -> RunResult:
    """Insecure single-pass variant: one grow round per level, no B block
    and no swap tests. Complete, but attackable."""
    n = target.layout.total_width
    runner = _Runner(subv, prover, cfg)
    cores = [(runner.initial_core(with_b=False), {})]
    r_a: dict = {}
    for h, k in enumerate(range(n + 1), start=1):
        new_cores = []
        rf = 0.0
        for core, mem in cores:
            mem2 = dict(mem)
            branches, f, _ = runner.execute_round(
                core.copy(), k, 1, mem2, h, include_b=False)
            rf += f
            new_cores.extend((br, dict(mem2)) for br in branches)
        r_a[(1,) * h] = {"flag": rf, "swap": 0.0}
        cores = new_cores
    a_labels = [("A", i) for i in range(n)]
    w = sum(c.norm2 for c, _ in cores)
    rho = sum((c.reduced_density(a_labels) for c, _ in cores),
              np.zeros((2 ** n, 2 ** n), dtype=complex))
    leaves = [LeafBranch((1,) * (n + 1), n + 1, 1.0, float(w), rho)]
    return _finalize(runner, leaves, r_a, target, cfg,
                     metadata={"variant": "flawed", "prover": prover.name})


def trusted_oracle_synthesis(oracle: TargetApproximation,
                             n: int | None = None) -> QuantumState:
    """Baseline synthesis with a trusted value oracle: query the oracle into
    the value register, grow (or imprint phases), uncompute the query. The
    value register provably returns to |0...0> and is dropped."""
    if n is None:
        n = oracle.n
    if n != oracle.n:
        raise ValueError("width mismatch with the oracle data")
    labels = [("A", i) for i in range(n)]
    arr = np.zeros([2] * n, dtype=complex)
    arr[(0,) * n] = 1.0
    joint = Joint(arr, labels)
    ell = oracle.ell
    for k in range(n + 1):
        truth = oracle.truth_map(k)
        alphabet = sorted({0} | set(truth.values()))
        index = {v: i for i, v in enumerate(alphabet)}
        d = len(alphabet)
        joint.expand(("D",), d)
        dx = 2 ** k
        M = np.zeros((dx * d, dx * d))
        for xi in range(dx):
            xs = format(xi, f"0{k}b") if k else ""
            perm = np.eye(d)
            ti = index[truth[xs]]
            if ti != 0:
                perm[0, 0] = perm[ti, ti] = 0.0
                perm[0, ti] = perm[ti, 0] = 1.0
            M[xi * d:(xi + 1) * d, xi * d:(xi + 1) * d] = perm
        query_labels = [("A", i) for i in range(k)] + [("D",)]
        joint.apply(query_labels, M)
        if k < n:
            G = np.zeros((2 * d, 2 * d), dtype=complex)
            for vi, lab in enumerate(alphabet):
                G[2 * vi:2 * vi + 2, 2 * vi:2 * vi + 2] = grow_rotation(
                    min(lab / 2 ** ell, 1.0))
            joint.apply([("D",), ("A", k)], G)
        else:
            scale = 2 ** ell
            joint.apply([("D",)], np.diag(
                np.exp(2j * np.pi * (np.array(alphabet) % scale) / scale)))
        joint.apply(query_labels, M)  # uncompute (involution)
        branches = joint.collapse([("D",)])
        if len(branches) != 1 or branches[0][0] != (0,):
            raise AssertionError("value register failed to uncompute to zero")
        joint = branches[0][1]
    amps = np.moveaxis(joint.arr, joint.axes(labels), range(n)).reshape(-1)
    return QuantumState(RegisterLayout([("A", n)]), amps)


def amplified_protocol(target: QuantumState, provers, subv: SubVerifier,
                       cfg: ProtocolConfig, instances: int) -> RunResult:
    """Sequential repetition: run independent instances, accept iff all
    accept; the output register is a uniformly random instance's output
    (exact mode: the uniform mixture of per-instance conditioned outputs)."""
    if instances < 1:
        raise ValueError("instances must be >= 1")
    if isinstance(provers, ProverStrategy):
        provers = [provers] * instances
    if len(provers) != instances:
        raise ValueError("need one prover per instance")
    results = [run_protocol(target, p, subv, cfg) for p in provers]
    accept = float(np.prod([r.accept_probability for r in results]))
    conditioned = td_t = td_a = None
    if all(r.accept_probability > BRANCH_DROP for r in results):
        layout = results[0].conditioned_output.layout
        rho = sum(r.conditioned_output.matrix for r in results) / instances
        conditioned = DensityMatrix(layout, rho)
        tgt = QuantumState(layout, target.amplitudes)
        td_t = trace_distance(conditioned, tgt.density())
        td_a = trace_distance(conditioned, subv.approx.psi_tilde.density())
    return RunResult(accept, conditioned, td_t, td_a, mode=cfg.mode,
                     metadata={
                         "instances": instances,
                         "per_instance_acceptance": [
                             r.accept_probability for r in results]})


def _product_joint(blocks) -> Joint:
    """Joint from independent (labels, amplitudes) blocks of qubit axes."""
    vec = np.array([1.0 + 0.0j])
    labels: list = []
    for labs, amps in blocks:
        vec = np.kron(vec, np.asarray(amps, dtype=complex))
        labels.extend(labs)
    return Joint(vec.reshape([2] * len(labels)), labels)


def constant_round_protocol(target: QuantumState, prover: ProverStrategy,
                            subv: SubVerifier, cfg: ProtocolConfig,
                            messages: dict | None = None) -> RunResult:
    """Constant-round variant: the prover sends candidate prefix states
    R_1..R_n and S_1..S_(n+1) up front; the verifier samples a level k and a
    round type b, swap-tests R_k against S_k, runs a single grow/test
    iteration with R_k standing in for the built register, swap-tests the
    result against S_k (test round) or S_(k+1) (grow round), and on
    acceptance outputs S_(n+1).

    Prover messages default to the honest prefix states; ``messages`` may
    override individual registers ("R1".."Rn", "S1".."S<n+1>") with
    amplitude vectors. Sent registers are treated as unentangled across
    blocks.
    """
    approx = subv.approx
    n = approx.n
    runner = _Runner(subv, prover, cfg)

    def msg_vec(name: str, width: int) -> np.ndarray:
        if messages and name in messages:
            vec = np.asarray(messages[name], dtype=complex).reshape(-1)
            if vec.shape[0] != 2 ** width:
                raise ValueError(f"{name} must have {2 ** width} amplitudes")
            return vec
        if name == f"S{n + 1}":
            return approx.psi_tilde.amplitudes
        k = int(name[1:])
        return approx.states[k].amplitudes

    accept = 0.0
    rho_acc = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for k in range(1, n + 1):
        for b in (0, 1):
            weight = 1.0 / (2 * n)
            a_width = k + 1 if (b == 1 and k < n) else k
            blocks = [([("A", i) for i in range(a_width)],
                       np.kron(msg_vec(f"R{k}", k),
                               [1, 0] if a_width > k else [1]))]
            blocks.append(([("SK", i) for i in range(k)], msg_vec(f"S{k}", k)))
            need_sk1 = b == 1 and k < n
            if need_sk1:
                blocks.append(([("SK1", i) for i in range(k + 1)],
                               msg_vec(f"S{k + 1}", k + 1)))
            blocks.append(([("SO", i) for i in range(n)],
                           msg_vec(f"S{n + 1}", n)))
            p_width = prover.required_private_width(n)
            if p_width:
                pvec = np.zeros(2 ** p_width)
                pvec[0] = 1.0
                blocks.append(([("P", i) for i in range(p_width)], pvec))
            joint = _product_joint(blocks)

            a_labels = [("A", i) for i in range(k)]
            sk_labels = [("SK", i) for i in range(k)]
            joint.project_symmetric(a_labels, sk_labels)

            mem: dict = {}
            branches, _, _ = runner.execute_round(
                joint, k, b, mem, h=1, include_b=False)
            for core in branches:
                if b == 0:
                    core.project_symmetric(a_labels, sk_labels)
                elif k < n:
                    core.project_symmetric(
                        [("A", i) for i in range(k + 1)],
                        [("SK1", i) for i in range(k + 1)])
                else:
                    core.project_symmetric(
                        a_labels, [("SO", i) for i in range(n)])
                accept += weight * core.norm2
                rho_acc += weight * core.reduced_density(
                    [("SO", i) for i in range(n)])

    layout = RegisterLayout([("A", n)])
    conditioned = td_t = td_a = None
    if accept > BRANCH_DROP:
        rho = rho_acc / accept
        conditioned = DensityMatrix(layout, 0.5 * (rho + rho.conj().T))
        tgt = QuantumState(layout, target.amplitudes)
        td_t = trace_distance(conditioned, tgt.density())
        td_a = trace_distance(conditioned, approx.psi_tilde.density())
    return RunResult(float(accept), conditioned, td_t, td_a, mode=cfg.mode,
                     metadata={"variant": "constant-round"})


# ---------------------------------------------------------------------------
# Soundness diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundEntry:
    b_prefix: tuple
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class SoundnessCheck:
    entries: tuple
    status: str           # 'ok' | 'undefined' | 'no-branches'
    lhs: Optional[float]  # worst-case entry
    rhs: Optional[float]
    holds: bool


def check_soundness_bound(result: RunResult,
                          approx: TargetApproximation) -> SoundnessCheck:
    """Per-branch soundness inequality: on every fully grown branch d (grow
    count n+1), the conditioned output must satisfy
    td(rho_d, psi_tilde) <= 4 * (t * sum_h u_{d<h})^(1/4), where u_a sums
    the exact rejection probabilities of both children of b-prefix a.

    This is a theorem for every prover; a violation indicates an
    implementation bug. Branches with zero conditional acceptance are
    skipped with an 'undefined' status.
    """
    t = result.metadata.get("t")
    if t is None:
        raise ValueError("result lacks exact-enumeration round metadata")
    r_a = result.branch_rejections
    layout = RegisterLayout([("A", approx.n)])
    target = approx.psi_tilde.density()
    entries = []
    undefined = False
    for leaf in result.leaves:
        if leaf.k_final != approx.n + 1:
            continue
        if leaf.accept_weight <= BRANCH_DROP:
            undefined = True
            continue
        rho = leaf.rho / leaf.accept_weight
        rho = 0.5 * (rho + rho.conj().T)
        lhs = trace_distance(DensityMatrix(layout, rho), target)
        total_u = 0.0
        for h in range(1, len(leaf.b_prefix) + 1):
            a = leaf.b_prefix[:h - 1]
            for child in (a + (0,), a + (1,)):
                rec = r_a.get(child)
                if rec is not None:
                    total_u += rec["flag"] + rec["swap"]
        rhs = 4.0 * (t * total_u) ** 0.25
        entries.append(BoundEntry(leaf.b_prefix, float(lhs), float(rhs),
                                  lhs <= rhs + 1e-9))
    if not entries:
        return SoundnessCheck((), "undefined" if undefined else "no-branches",
                              None, None, True)
    worst = max(entries, key=lambda e: e.lhs - e.rhs)
    return SoundnessCheck(tuple(entries),
                          "ok" if not undefined else "ok-with-undefined",
                          worst.lhs, worst.rhs,
                          all(e.holds for e in entries))
