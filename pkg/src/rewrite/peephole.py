"""Always-on local fusion: rotation merging, zero-angle removal, involution cancellation."""

import math
from functools import lru_cache
from typing import List, Optional

import numpy as np

from src.circuits import Circuit, Gate
from src.gates import GateKind, PauliRotationKind

ZERO_ANGLE_TOL = 1e-12


def is_zero_angle(angle: float) -> bool:
    """Angle is a multiple of 2*pi (identity up to global phase)"""
    return abs(math.remainder(angle, 2.0 * math.pi)) <= ZERO_ANGLE_TOL


@lru_cache(maxsize=None)
def _self_inverse(kind: GateKind) -> bool:
    if kind.parameterized:
        return False
    m = kind.local_matrix(None)
    return bool(np.allclose(m @ m, np.eye(m.shape[0]), atol=1e-12))


def _same_operands(a: Gate, b: Gate) -> bool:
    if a.qubits == b.qubits:
        return True
    return a.kind.symmetric and set(a.qubits) == set(b.qubits)


def _fuse_pass(width: int, gates: List[Gate]) -> List[Gate]:
    out: List[Optional[Gate]] = []
    wires: List[List[int]] = [[] for _ in range(width)]

    def drop(index: int) -> None:
        for q in out[index].qubits:
            wires[q].pop()
        out[index] = None

    for gate in gates:
        if gate.kind.parameterized and is_zero_angle(gate.angle):
            continue

        tops = {wires[q][-1] if wires[q] else None for q in gate.qubits}
        top = tops.pop() if len(tops) == 1 else None
        if top is not None:
            prev = out[top]
            if prev.kind == gate.kind and _same_operands(prev, gate):
                if isinstance(gate.kind, PauliRotationKind):
                    merged = prev.angle + gate.angle
                    if is_zero_angle(merged):
                        drop(top)
                    else:
                        out[top] = prev.with_angle(merged)
                    continue
                if _self_inverse(gate.kind):
                    drop(top)
                    continue

        out.append(gate)
        for q in gate.qubits:
            wires[q].append(len(out) - 1)

    return [g for g in out if g is not None]


def fuse_local(circuit: Circuit) -> Circuit:
    """
    Merge wire-adjacent same-kind rotations, drop angles = 0 (mod 2*pi) and
    cancel wire-adjacent involution pairs, repeated to a fixpoint.
    """
    gates = list(circuit.gates)
    while True:
        fused = _fuse_pass(circuit.width, gates)
        if fused == gates:
            return circuit.with_gates(fused)
        gates = fused
