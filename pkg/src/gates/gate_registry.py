"""
Gate Kind Registry

Every operator kind the optimizer understands is a GateKind handler held in
a registry by name. The presets (RX, RY, RZ, RXX, CZ) register themselves on
import; further parameterized kinds can be added through the gate factory
without touching the circuit, unitary or encoding code.
"""

from abc import ABC, abstractmethod
from typing import Dict, List, Optional
import logging

import numpy as np

logger = logging.getLogger(__name__)

_SWAP = np.array([[1, 0, 0, 0],
                  [0, 0, 1, 0],
                  [0, 1, 0, 0],
                  [0, 0, 0, 1]], dtype=complex)

# Arbitrary non-special angle used to test operand-swap symmetry
_SYMMETRY_PROBE_ANGLE = 0.7319


class GateKind(ABC):
    """Base class for all gate kinds"""

    def __init__(self):
        self.name = self.get_name().upper()
        self.arity = self.get_arity()
        self.parameterized = self.is_parameterized()
        self._symmetric: Optional[bool] = None
        if self.arity not in (1, 2):
            raise ValueError(f"{self.name}: arity must be 1 or 2, got {self.arity}")

    @abstractmethod
    def get_name(self) -> str:
        """Return the canonical (upper-case) kind name"""

    @abstractmethod
    def get_arity(self) -> int:
        """Return the number of qubit operands"""

    @abstractmethod
    def is_parameterized(self) -> bool:
        """Return True when the kind carries one angle (radians)"""

    @abstractmethod
    def local_matrix(self, angle: Optional[float] = None) -> np.ndarray:
        """Return the 2^arity x 2^arity matrix; first operand is the most significant bit"""

    def qasm_name(self) -> str:
        return self.name.lower()

    @property
    def symmetric(self) -> bool:
        """True if swapping the two operands leaves the matrix unchanged"""
        if self._symmetric is None:
            if self.arity == 1:
                self._symmetric = False
            else:
                angle = _SYMMETRY_PROBE_ANGLE if self.parameterized else None
                m = self.local_matrix(angle)
                self._symmetric = bool(np.allclose(_SWAP @ m @ _SWAP, m, atol=1e-12))
        return self._symmetric

    def __eq__(self, other) -> bool:
        return isinstance(other, GateKind) and other.name == self.name

    def __hash__(self) -> int:
        return hash(("GateKind", self.name))

    def __repr__(self) -> str:
        return self.name

    def __reduce__(self):
        # Unpickle to the registered instance in the receiving process
        return (get_gate_kind, (self.name,))


class GateKindRegistry:
    """Registry for gate kind handlers"""

    def __init__(self):
        self._kinds: Dict[str, GateKind] = {}

    def register_kind(self, kind: GateKind) -> GateKind:
        """Register a kind; re-registering an identical name keeps the first handler"""
        existing = self._kinds.get(kind.name)
        if existing is not None:
            if type(existing) is not type(kind):
                raise ValueError(f"Gate kind {kind.name} is already registered with a different definition")
            return existing
        self._kinds[kind.name] = kind
        logger.debug(f"Registered gate kind: {kind.name} (arity {kind.arity})")
        return kind

    def get_kind(self, name: str) -> Optional[GateKind]:
        return self._kinds.get(name.upper())

    def require_kind(self, name: str) -> GateKind:
        kind = self.get_kind(name)
        if kind is None:
            raise KeyError(f"Unknown gate kind: {name}")
        return kind

    def get_all_kinds(self) -> List[str]:
        return list(self._kinds.keys())

    def __contains__(self, name: str) -> bool:
        return name.upper() in self._kinds


# Global registry instance
gate_registry = GateKindRegistry()


def register_gate_kind(cls):
    """Class decorator: instantiate and register a GateKind subclass"""
    gate_registry.register_kind(cls())
    return cls


def get_gate_kind(name: str) -> GateKind:
    """Look up a registered kind by name"""
    return gate_registry.require_kind(name)
