"""Dense complex-matrix semantics for circuits."""

from .engine import (
    apply_local, gate_unitary, circuit_unitary, equal_up_to_phase, PhaseMatch,
    hilbert_schmidt_distance, is_unitary, compact, CompactedBlock,
)

__all__ = [
    'apply_local', 'gate_unitary', 'circuit_unitary', 'equal_up_to_phase', 'PhaseMatch',
    'hilbert_schmidt_distance', 'is_unitary', 'compact', 'CompactedBlock',
]
