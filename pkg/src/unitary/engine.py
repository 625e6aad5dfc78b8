"""
Dense unitary semantics.

Qubit 0 is the most significant tensor factor. Matrices are built by
contracting each gate's local matrix into a (2,)*n + (dim,) tensor, so no
full-width Kronecker products are ever formed.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from src.circuits import Circuit, Gate
from src.utils.errors import ResourceLimitError
from src.utils.settings import get_settings


def _check_cap(width: int) -> None:
    cap = get_settings().unitary_cap
    if width > cap:
        raise ResourceLimitError(f"dense unitary over {width} qubits exceeds the cap of {cap}")


def apply_local(tensor: np.ndarray, local: np.ndarray, qubits: Tuple[int, ...]) -> np.ndarray:
    """Left-multiply a local operator acting on `qubits` into a (2,)*n + rest tensor"""
    k = len(qubits)
    op = local.reshape((2,) * (2 * k))
    moved = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(moved, list(range(k)), list(qubits))


def gate_unitary(gate: Gate, width: int) -> np.ndarray:
    """Embedding of the gate's local matrix at its qubits, identity elsewhere"""
    _check_cap(width)
    if max(gate.qubits) >= width:
        raise ValueError(f"{gate} does not fit in width {width}")
    dim = 2 ** width
    identity = np.eye(dim, dtype=complex).reshape((2,) * width + (dim,))
    local = gate.kind.local_matrix(gate.angle)
    return apply_local(identity, local, gate.qubits).reshape(dim, dim)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """U(gates[-1]) ... U(gates[0])"""
    width = circuit.width
    _check_cap(width)
    dim = 2 ** width
    tensor = np.eye(dim, dtype=complex).reshape((2,) * width + (dim,))
    for gate in circuit.gates:
        tensor = apply_local(tensor, gate.kind.local_matrix(gate.angle), gate.qubits)
    return tensor.reshape(dim, dim)


@dataclass(frozen=True)
class PhaseMatch:
    """Outcome of a phase-invariant comparison; truthy iff equal"""
    equal: bool
    phase: Optional[float] = None
    distance: float = math.inf

    def __bool__(self) -> bool:
        return self.equal


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, tol: Optional[float] = None) -> PhaseMatch:
    """
    True iff min_phi ||U - e^{i phi} V||_F <= tol, with phi* = arg tr(V^dag U).
    Default tolerance: settings.equivalence_tol * dim.
    """
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    dim = u.shape[0]
    tol = get_settings().tolerance_for(dim) if tol is None else tol

    overlap = np.vdot(v, u)  # tr(V^dag U)
    if abs(overlap) > 1e-12 * dim:
        phase = float(np.angle(overlap))
    else:
        flat_v = v.reshape(-1)
        pivot = int(np.argmax(np.abs(flat_v)))
        if abs(flat_v[pivot]) == 0.0:
            phase = 0.0
        else:
            phase = float(np.angle(u.reshape(-1)[pivot] / flat_v[pivot]))

    distance = float(np.linalg.norm(u - np.exp(1j * phase) * v))
    if distance <= tol:
        return PhaseMatch(True, phase, distance)
    return PhaseMatch(False, None, distance)


def hilbert_schmidt_distance(u: np.ndarray, v: np.ndarray) -> float:
    """sqrt(1 - |tr(V^dag U)|^2 / d^2), in [0, 1]; 0 iff equal up to phase"""
    dim = u.shape[0]
    fidelity = abs(np.vdot(v, u)) ** 2 / dim ** 2
    return math.sqrt(max(0.0, 1.0 - fidelity))


def is_unitary(u: np.ndarray, tol: float = 1e-9) -> bool:
    dim = u.shape[0]
    return float(np.linalg.norm(u @ u.conj().T - np.eye(dim))) <= tol


@dataclass(frozen=True)
class CompactedBlock:
    """A sub-circuit restricted to the wires it touches"""
    sub: Circuit
    active: Tuple[int, ...]
    inverse: Dict[int, int]  # original qubit -> compacted index

    @property
    def k(self) -> int:
        return len(self.active)

    def expand(self, circuit: Circuit, width: int) -> Circuit:
        """Map a k-qubit circuit back onto the original wires"""
        return circuit.remap(dict(enumerate(self.active)), width)


def compact(sub: Circuit) -> CompactedBlock:
    """Drop wires the block never touches; remap order-preservingly"""
    if len(sub) == 0:
        raise ValueError("cannot compact an empty block")
    active = sub.active_qubits()
    inverse = {q: i for i, q in enumerate(active)}
    return CompactedBlock(sub=sub.remap(inverse, len(active)), active=active, inverse=inverse)
