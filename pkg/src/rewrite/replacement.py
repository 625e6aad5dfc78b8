"""Replacement search shared by the optimizer loop and the label generator."""

from dataclasses import dataclass
from typing import Optional

from src.circuits import Circuit
from src.gates import GateSet
from src.unitary import circuit_unitary, equal_up_to_phase
from src.utils.settings import get_settings

from .database import RewriteDB, lookup
from .peephole import fuse_local
from .synthesis import SynthesisConfig, synthesize_shorter


@dataclass(frozen=True)
class Replacement:
    circuit: Circuit
    source: str  # "fusion", "database" or "synthesis"

    @property
    def length(self) -> int:
        return len(self.circuit)


def lookup_block(db: RewriteDB, block: Circuit) -> Optional[Circuit]:
    """
    Database lookup for a compacted block of k <= db.qubits wires.

    Narrower blocks are padded with idle wires; a hit is used only if it
    leaves the padding untouched.
    """
    if block.width > db.qubits:
        return None
    padded = Circuit(db.qubits, block.gates)
    hit = lookup(db, circuit_unitary(padded))
    if hit is None:
        return None
    if any(q >= block.width for g in hit.gates for q in g.qubits):
        return None
    return Circuit(block.width, hit.gates)


def find_replacement(block: Circuit, gate_set: GateSet, db: Optional[RewriteDB] = None,
                     synthesis: Optional[SynthesisConfig] = None) -> Optional[Replacement]:
    """
    Strictly shorter verified equivalent of a compacted block, or None.

    Tries local fusion, then the database, then (if configured) synthesis.
    """
    if block.width > get_settings().synth_qubit_cap:
        return None
    target = circuit_unitary(block)
    best: Optional[Replacement] = None

    fused = fuse_local(block)
    if len(fused) < len(block):
        best = Replacement(fused, "fusion")

    bound = best.length if best else len(block)
    if db is not None and bound > 0:
        hit = lookup_block(db, block)
        if hit is not None and len(hit) < bound:
            best = Replacement(hit, "database")

    bound = best.length if best else len(block)
    if synthesis is not None and bound > 0:
        found = synthesize_shorter(target, gate_set, bound, synthesis)
        if found is not None:
            best = Replacement(found, "synthesis")

    if best is None:
        return None
    tol = get_settings().tolerance_for(target.shape[0])
    if best.source == "synthesis":
        tol = synthesis.tolerance * target.shape[0]
    if not equal_up_to_phase(circuit_unitary(best.circuit), target, tol):
        return None
    return best
