"""
Standard gate kinds: RX, RY, RZ, RXX and CZ.

Rotations use the half-angle convention R_P(theta) = exp(-i theta P / 2).
"""

from typing import Optional

import numpy as np

from .gate_registry import GateKind, register_gate_kind, get_gate_kind

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_string_matrix(generator: str) -> np.ndarray:
    """Kronecker product of single-qubit Paulis, first letter most significant"""
    matrix = np.ones((1, 1), dtype=complex)
    for letter in generator.upper():
        if letter not in PAULI:
            raise ValueError(f"Invalid Pauli letter {letter!r} in generator {generator!r}")
        matrix = np.kron(matrix, PAULI[letter])
    return matrix


class PauliRotationKind(GateKind):
    """exp(-i theta P / 2) for a Pauli string P with P^2 = I"""

    generator: str = ""

    def __init__(self):
        self._pauli = pauli_string_matrix(self.generator)
        super().__init__()

    def get_arity(self) -> int:
        return len(self.generator)

    def is_parameterized(self) -> bool:
        return True

    def local_matrix(self, angle: Optional[float] = None) -> np.ndarray:
        if angle is None:
            raise ValueError(f"{self.name} requires an angle")
        dim = self._pauli.shape[0]
        return np.cos(angle / 2) * np.eye(dim, dtype=complex) - 1j * np.sin(angle / 2) * self._pauli


@register_gate_kind
class RXKind(PauliRotationKind):
    generator = "X"

    def get_name(self) -> str:
        return "RX"


@register_gate_kind
class RYKind(PauliRotationKind):
    generator = "Y"

    def get_name(self) -> str:
        return "RY"


@register_gate_kind
class RZKind(PauliRotationKind):
    generator = "Z"

    def get_name(self) -> str:
        return "RZ"


@register_gate_kind
class RXXKind(PauliRotationKind):
    generator = "XX"

    def get_name(self) -> str:
        return "RXX"


@register_gate_kind
class CZKind(GateKind):
    _MATRIX = np.diag([1, 1, 1, -1]).astype(complex)

    def get_name(self) -> str:
        return "CZ"

    def get_arity(self) -> int:
        return 2

    def is_parameterized(self) -> bool:
        return False

    def local_matrix(self, angle: Optional[float] = None) -> np.ndarray:
        if angle is not None:
            raise ValueError("CZ carries no angle")
        return self._MATRIX.copy()


RX = get_gate_kind("RX")
RY = get_gate_kind("RY")
RZ = get_gate_kind("RZ")
RXX = get_gate_kind("RXX")
CZ = get_gate_kind("CZ")
