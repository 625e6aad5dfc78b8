"""
Gate kinds and gate sets.

Importing this package registers the standard kinds (RX, RY, RZ, RXX, CZ).
"""

from .gate_registry import GateKind, gate_registry, get_gate_kind, register_gate_kind
from .standard_gates import RX, RY, RZ, RXX, CZ, PauliRotationKind
from .gate_set import GateSet
from . import gate_factory

__all__ = [
    'GateKind',
    'GateSet',
    'gate_registry',
    'get_gate_kind',
    'register_gate_kind',
    'PauliRotationKind',
    'RX', 'RY', 'RZ', 'RXX', 'CZ',
    'gate_factory',
]
