"""Gate sets: ordered lists of kinds. Order defines the one-hot channel order."""

from dataclasses import dataclass
from typing import Dict, Any, Iterable, Tuple

from .gate_registry import GateKind, get_gate_kind


@dataclass(frozen=True)
class GateSet:
    name: str
    kinds: Tuple[GateKind, ...]

    def __post_init__(self):
        if not self.kinds:
            raise ValueError(f"Gate set {self.name!r} must contain at least one kind")
        names = [k.name for k in self.kinds]
        if len(set(names)) != len(names):
            raise ValueError(f"Gate set {self.name!r} contains duplicate kinds: {names}")

    @classmethod
    def from_names(cls, name: str, kind_names: Iterable[str]) -> "GateSet":
        return cls(name=name.lower(), kinds=tuple(get_gate_kind(n) for n in kind_names))

    @property
    def max_arity(self) -> int:
        return max(k.arity for k in self.kinds)

    def channel_index(self, kind: GateKind) -> int:
        for index, candidate in enumerate(self.kinds):
            if candidate == kind:
                return index
        raise KeyError(f"{kind.name} is not part of gate set {self.name}")

    def __contains__(self, kind: GateKind) -> bool:
        return any(k == kind for k in self.kinds)

    def descriptor(self) -> Dict[str, Any]:
        """Stable description written into file headers"""
        return {"name": self.name, "kinds": [k.name for k in self.kinds]}

    @classmethod
    def from_descriptor(cls, descriptor: Dict[str, Any]) -> "GateSet":
        return cls.from_names(descriptor["name"], descriptor["kinds"])


def write_gate_set(writer, gate_set: GateSet) -> None:
    """Serialize the descriptor into a BinaryWriter payload"""
    writer.text(gate_set.name)
    writer.u8(len(gate_set.kinds))
    for kind in gate_set.kinds:
        writer.text(kind.name)


def read_gate_set(reader) -> GateSet:
    """Inverse of write_gate_set; unknown kind names raise KeyError"""
    name = reader.text()
    count = reader.u8()
    return GateSet.from_names(name, [reader.text() for _ in range(count)])
