"""Desk-scale simulator for interactive synthesis of quantum states and
unitaries: exact register-level quantum core, protocol building blocks,
state tomography oracles, the interactive state-synthesis protocol with
honest and adversarial provers, and the program-state pipeline for verified
unitary application."""

from . import cli, primitives, qcore, stateproto, targets, tomography, uniproto

__version__ = "0.1.0"

__all__ = [
    "cli",
    "primitives",
    "qcore",
    "stateproto",
    "targets",
    "tomography",
    "uniproto",
    "__version__",
]
