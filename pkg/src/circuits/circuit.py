"""
Circuit representation

Gates and circuits are immutable value objects. gates[0] is applied first,
so the circuit unitary is U(gates[-1]) ... U(gates[0]).
"""

import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np

from src.gates import GateKind, GateSet
from src.utils.errors import CircuitValidationError


@dataclass(frozen=True)
class Gate:
    """One operator instance"""
    kind: GateKind
    qubits: Tuple[int, ...]
    angle: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != self.kind.arity:
            raise CircuitValidationError(
                f"{self.kind.name} expects {self.kind.arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitValidationError(f"{self.kind.name} qubits must be distinct: {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise CircuitValidationError(f"negative qubit index in {self.qubits}")
        if self.kind.parameterized:
            if self.angle is None:
                raise CircuitValidationError(f"{self.kind.name} requires an angle")
            if not math.isfinite(self.angle):
                raise CircuitValidationError(f"{self.kind.name} angle must be finite, got {self.angle}")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise CircuitValidationError(f"{self.kind.name} carries no angle")

    def remap(self, mapping: Mapping[int, int]) -> "Gate":
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.angle)

    def with_angle(self, angle: float) -> "Gate":
        return Gate(self.kind, self.qubits, angle)

    def shares_qubit(self, other: "Gate") -> bool:
        return not set(self.qubits).isdisjoint(other.qubits)

    def __str__(self) -> str:
        args = ",".join(f"q{q}" for q in self.qubits)
        if self.angle is None:
            return f"{self.kind.name} {args}"
        return f"{self.kind.name}({self.angle:.6g}) {args}"


@dataclass(frozen=True)
class Circuit:
    """Ordered gate sequence over a fixed qubit count"""
    width: int
    gates: Tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.width < 1:
            raise CircuitValidationError(f"circuit width must be >= 1, got {self.width}")
        for index, gate in enumerate(self.gates):
            if max(gate.qubits) >= self.width:
                raise CircuitValidationError(
                    f"gate {index} ({gate}) addresses a qubit outside width {self.width}")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __getitem__(self, index):
        return self.gates[index]

    def kind_counts(self) -> Dict[str, int]:
        return dict(Counter(g.kind.name for g in self.gates))

    def kinds(self) -> set:
        return {g.kind for g in self.gates}

    def active_qubits(self) -> Tuple[int, ...]:
        return tuple(sorted({q for g in self.gates for q in g.qubits}))

    def with_gates(self, gates: Iterable[Gate]) -> "Circuit":
        return Circuit(self.width, tuple(gates))

    def remap(self, mapping: Mapping[int, int], width: int) -> "Circuit":
        return Circuit(width, tuple(g.remap(mapping) for g in self.gates))

    def uses_only(self, gate_set: GateSet) -> bool:
        return all(g.kind in gate_set for g in self.gates)


def random_circuit(width: int, length: int, gate_set: GateSet, seed) -> Circuit:
    """
    Sample a random circuit: kind uniform over the gate set, operands uniform
    without replacement, angles uniform over [0, 2*pi).
    """
    if length < 0:
        raise ValueError(f"length must be >= 0, got {length}")
    if width < gate_set.max_arity:
        raise CircuitValidationError(
            f"width {width} cannot host {gate_set.max_arity}-qubit gates of gate set {gate_set.name}")

    rng = np.random.default_rng(seed)
    kinds = gate_set.kinds
    gates = []
    for _ in range(length):
        kind = kinds[int(rng.integers(len(kinds)))]
        qubits = tuple(int(q) for q in rng.choice(width, size=kind.arity, replace=False))
        angle = float(rng.uniform(0.0, 2.0 * math.pi)) if kind.parameterized else None
        gates.append(Gate(kind, qubits, angle))
    return Circuit(width, tuple(gates))
