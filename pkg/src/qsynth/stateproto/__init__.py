"""Interactive state-synthesis protocol: target approximation, sub-verifier,
prover strategies, and protocol runners."""

from .approx import TargetApproximation, build_target_approximation
from .engine import Joint, ProverView, RoundCtx
from .protocol import (
    BoundEntry,
    LeafBranch,
    ProtocolConfig,
    ProtocolTranscript,
    RunResult,
    SoundnessCheck,
    amplified_protocol,
    check_soundness_bound,
    constant_round_protocol,
    flawed_protocol,
    run_protocol,
    trusted_oracle_synthesis,
)
from .provers import (
    EntanglementAttackProver,
    HonestProver,
    LyingProver,
    PhaseAttackProver,
    ProverStrategy,
    SwapSabotageProver,
)
from .subverifier import SubVerifier

__all__ = [
    "BoundEntry",
    "EntanglementAttackProver",
    "HonestProver",
    "Joint",
    "LeafBranch",
    "LyingProver",
    "PhaseAttackProver",
    "ProtocolConfig",
    "ProtocolTranscript",
    "ProverStrategy",
    "ProverView",
    "RoundCtx",
    "RunResult",
    "SoundnessCheck",
    "SubVerifier",
    "SwapSabotageProver",
    "TargetApproximation",
    "amplified_protocol",
    "build_target_approximation",
    "check_soundness_bound",
    "constant_round_protocol",
    "flawed_protocol",
    "run_protocol",
    "trusted_oracle_synthesis",
]
