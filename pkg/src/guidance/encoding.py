"""
Grid tensor encoding.

Channel layout for a gate set with K kinds (C = K + 5):
  0..K-1  kind one-hot
  K       role 1 (first operand; single-qubit gates too)
  K+1     role 2 (second operand)
  K+2     sin(angle)
  K+3     cos(angle)
  K+4     occupancy
Height and width are zero-padded to multiples of 4 (at least 4).
"""

import math
from typing import Optional, Tuple

import numpy as np

from src.circuits import Circuit, SlotLayout, schedule
from src.gates import GateSet
from src.utils.errors import GateSetMismatchError


def channel_count(gate_set: GateSet) -> int:
    return len(gate_set.kinds) + 5


def padded_size(n: int) -> int:
    return max(4, 4 * math.ceil(n / 4))


def padded_shape(width: int, depth: int) -> Tuple[int, int]:
    return padded_size(width), padded_size(depth)


def encode(circuit: Circuit, gate_set: GateSet, layout: Optional[SlotLayout] = None) -> np.ndarray:
    """C x pad(width) x pad(depth) float64 tensor"""
    layout = layout if layout is not None else schedule(circuit)
    k = len(gate_set.kinds)
    role1, role2, sin_ch, cos_ch, occ = k, k + 1, k + 2, k + 3, k + 4
    height, width = padded_shape(circuit.width, layout.depth)
    x = np.zeros((k + 5, height, width))

    for gate, slot in zip(circuit.gates, layout.slots):
        if gate.kind not in gate_set:
            raise GateSetMismatchError(f"{gate.kind.name} is not part of gate set {gate_set.name}")
        channel = gate_set.channel_index(gate.kind)
        for position, q in enumerate(gate.qubits):
            x[channel, q, slot] = 1.0
            x[role1 if position == 0 else role2, q, slot] = 1.0
            x[occ, q, slot] = 1.0
            if gate.angle is not None:
                x[sin_ch, q, slot] = math.sin(gate.angle)
                x[cos_ch, q, slot] = math.cos(gate.angle)
    return x


def occupancy_mask(x: np.ndarray) -> np.ndarray:
    """The occupancy channel of an encoded tensor"""
    return x[-1]


def pad_target(target: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    padded = np.zeros(shape)
    padded[:target.shape[0], :target.shape[1]] = target
    return padded
