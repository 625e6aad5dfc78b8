"""
Rewrite Database

Exhaustive shortest-decomposition table over a discretized gate set.
Circuits are enumerated breadth-first by length, so the first circuit that
reaches a canonical key is a shortest one. The frontier only carries
circuits that discovered a new key.
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.circuits import Circuit, Gate
from src.gates import GateSet
from src.gates.gate_set import read_gate_set, write_gate_set
from src.monitoring.logger import (
    start_performance_monitoring, end_performance_monitoring, log_stage_event,
)
from src.unitary import circuit_unitary, equal_up_to_phase, gate_unitary
from src.utils.binary_io import BinaryReader, BinaryWriter, read_framed, write_framed
from src.utils.errors import FileFormatError

from .canonical import canonical_key

logger = logging.getLogger(__name__)

DB_MAGIC = b"QRDB"
DB_FORMAT_VERSION = 2
MAX_DB_QUBITS = 3
DEFAULT_MAX_ENTRIES = 5_000_000

# Stored matrices are rounded to 6 decimals, so entry checks use this per-dim factor
QUANTIZED_MATCH_TOL = 1e-6


def angle_grid(steps_per_pi: int = 4) -> Tuple[float, ...]:
    """Nonzero multiples of pi/steps_per_pi in (-pi, pi]"""
    if steps_per_pi < 1:
        raise ValueError(f"steps_per_pi must be >= 1, got {steps_per_pi}")
    return tuple(k * math.pi / steps_per_pi
                 for k in range(-steps_per_pi + 1, steps_per_pi + 1) if k != 0)


@dataclass(frozen=True)
class DBEntry:
    quantized: np.ndarray
    circuit: Circuit


@dataclass
class RewriteDB:
    """Canonical key -> shortest circuits (a list only on a true hash collision)"""
    gate_set: GateSet
    qubits: int
    grid: Tuple[float, ...]
    depth: int
    entries: Dict[int, List[DBEntry]] = field(default_factory=dict)
    truncated: bool = False
    completed_depth: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return 2 ** self.qubits

    def __len__(self) -> int:
        return sum(len(bucket) for bucket in self.entries.values())

    def __iter__(self):
        for bucket in self.entries.values():
            yield from bucket

    def keys(self) -> set:
        return set(self.entries)

    def find(self, key: int, quantized: np.ndarray) -> Optional[DBEntry]:
        for entry in self.entries.get(key, ()):
            if np.array_equal(entry.quantized, quantized):
                return entry
        return None

    def length_histogram(self) -> Dict[int, int]:
        histogram: Dict[int, int] = {}
        for entry in self:
            histogram[len(entry.circuit)] = histogram.get(len(entry.circuit), 0) + 1
        return dict(sorted(histogram.items()))


def gate_options(gate_set: GateSet, qubits: int, grid: Sequence[float]) -> List[Gate]:
    """Every placement of every kind on `qubits` wires, one gate per grid angle"""
    options: List[Gate] = []
    for kind in gate_set.kinds:
        if kind.arity > qubits:
            continue
        if kind.arity == 1:
            placements = [(q,) for q in range(qubits)]
        elif kind.symmetric:
            placements = list(itertools.combinations(range(qubits), 2))
        else:
            placements = list(itertools.permutations(range(qubits), 2))
        for operands in placements:
            if kind.parameterized:
                options.extend(Gate(kind, operands, a) for a in grid)
            else:
                options.append(Gate(kind, operands))
    return options


def _expand_chunk(args) -> List[Tuple[int, np.ndarray, np.ndarray, Tuple[Gate, ...]]]:
    """Extend one frontier chunk by every option; first occurrence per key wins"""
    frontier, options, matrices = args
    seen: Dict[int, List[np.ndarray]] = {}
    found = []
    for unitary, gates in frontier:
        for gate, matrix in zip(options, matrices):
            extended = matrix @ unitary
            key, quantized = canonical_key(extended)
            bucket = seen.setdefault(key, [])
            if any(np.array_equal(q, quantized) for q in bucket):
                continue
            bucket.append(quantized)
            found.append((key, quantized, extended, gates + (gate,)))
    return found


def _chunks(items: List, count: int) -> List[List]:
    size = max(1, math.ceil(len(items) / count))
    return [items[i:i + size] for i in range(0, len(items), size)]


def build_db(gate_set: GateSet, qubits: int, grid: Optional[Sequence[float]] = None,
             depth: int = 3, max_entries: int = DEFAULT_MAX_ENTRIES,
             workers: int = 1) -> RewriteDB:
    """
    Enumerate circuits of length 0..depth breadth-first and keep the first
    (shortest) circuit per canonical key.

    If adding a length would exceed max_entries, that length is discarded and
    the database is flagged truncated at the last completed length.
    """
    if qubits not in (1, 2, 3):
        raise ValueError(f"database qubit count must be 1, 2 or 3, got {qubits}")
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    grid = tuple(float(a) for a in (angle_grid() if grid is None else grid))

    op_id = start_performance_monitoring("build_db")
    db = RewriteDB(gate_set=gate_set, qubits=qubits, grid=grid, depth=depth,
                   metadata={"max_entries": max_entries})

    dim = 2 ** qubits
    identity = np.eye(dim, dtype=complex)
    key, quantized = canonical_key(identity)
    db.entries[key] = [DBEntry(quantized, Circuit(qubits))]

    options = gate_options(gate_set, qubits, grid)
    matrices = [gate_unitary(g, qubits) for g in options]
    logger.info(f"🔄 Building {gate_set.name} database: q={qubits}, depth={depth}, "
                f"{len(options)} gate options")

    frontier: List[Tuple[np.ndarray, Tuple[Gate, ...]]] = [(identity, ())]
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for length in range(1, depth + 1):
            log_stage_event(f"db length {length}", "enumeration", "started",
                            {"frontier": len(frontier)})
            if executor is not None:
                parts = _chunks(frontier, workers * 4)
                results = executor.map(_expand_chunk, [(p, options, matrices) for p in parts])
            else:
                results = [_expand_chunk((frontier, options, matrices))]

            added: Dict[int, List[DBEntry]] = {}
            next_frontier = []
            overflow = False
            total = len(db)
            for found in results:
                for key, quantized, unitary, gates in found:
                    if db.find(key, quantized) is not None:
                        continue
                    bucket = added.setdefault(key, [])
                    if any(np.array_equal(e.quantized, quantized) for e in bucket):
                        continue
                    bucket.append(DBEntry(quantized, Circuit(qubits, gates)))
                    next_frontier.append((unitary, gates))
                    total += 1
                    if total > max_entries:
                        overflow = True
                        break
                if overflow:
                    break

            if overflow:
                db.truncated = True
                log_stage_event(f"db length {length}", "enumeration", "failed",
                                {"reason": "entry cap exceeded", "max_entries": max_entries})
                logger.warning(f"⚠️ Entry cap {max_entries} exceeded at length {length}; "
                               f"keeping lengths <= {db.completed_depth}")
                break

            for key, bucket in added.items():
                db.entries.setdefault(key, []).extend(bucket)
            db.completed_depth = length
            frontier = next_frontier
            log_stage_event(f"db length {length}", "enumeration", "completed",
                            {"new_entries": len(next_frontier)})
            if not frontier:
                break
    finally:
        if executor is not None:
            executor.shutdown()

    if not db.truncated:
        db.completed_depth = depth
    db.metadata["length_histogram"] = db.length_histogram()
    end_performance_monitoring(op_id, metadata={"entries": len(db), "truncated": db.truncated})
    logger.info(f"✅ Database built: {len(db)} entries")
    return db


def lookup(db: RewriteDB, unitary: np.ndarray) -> Optional[Circuit]:
    """Stored shortest circuit for the unitary, verified up to phase; None on miss"""
    if unitary.shape != (db.dim, db.dim):
        raise ValueError(f"unitary of shape {unitary.shape} does not match a {db.qubits}-qubit database")
    key, quantized = canonical_key(unitary)
    entry = db.find(key, quantized)
    if entry is None:
        return None
    if not equal_up_to_phase(circuit_unitary(entry.circuit), unitary):
        logger.debug(f"Key {key:016x} matched but failed verification")
        return None
    return entry.circuit


def verify_entries(db: RewriteDB) -> List[int]:
    """Keys whose stored circuit does not reproduce its stored matrix"""
    tol = QUANTIZED_MATCH_TOL * db.dim
    return [key for key, bucket in db.entries.items() for entry in bucket
            if not equal_up_to_phase(circuit_unitary(entry.circuit), entry.quantized, tol)]


def save_db(db: RewriteDB, path: Union[str, Path]) -> None:
    writer = BinaryWriter()
    write_gate_set(writer, db.gate_set)
    writer.u8(db.qubits)
    writer.u32(len(db.grid))
    writer.array(np.asarray(db.grid, dtype=np.float64), "<f8")
    writer.u16(db.depth).u16(db.completed_depth).u8(1 if db.truncated else 0)
    writer.u64(db.metadata.get("max_entries", DEFAULT_MAX_ENTRIES))

    writer.u64(len(db))
    for key, bucket in db.entries.items():
        for entry in bucket:
            writer.u64(key)
            writer.array(entry.quantized, "<c16")
            _write_circuit(writer, entry.circuit, db.gate_set)
    write_framed(path, DB_MAGIC, DB_FORMAT_VERSION, writer.getvalue())
    logger.info(f"💾 Saved {len(db)} database entries to {path}")


def load_db(path: Union[str, Path], verify: bool = False) -> RewriteDB:
    reader = BinaryReader(read_framed(path, DB_MAGIC, DB_FORMAT_VERSION))
    try:
        gate_set = read_gate_set(reader)
    except KeyError as e:
        raise FileFormatError(f"database uses an unregistered gate kind: {e}") from None
    qubits = reader.u8()
    if qubits not in (1, 2, 3):
        raise FileFormatError(f"invalid database qubit count {qubits}")
    grid = tuple(float(a) for a in reader.array(reader.u32(), "<f8"))
    depth = reader.u16()
    completed_depth = reader.u16()
    truncated = bool(reader.u8())
    max_entries = reader.u64()

    db = RewriteDB(gate_set=gate_set, qubits=qubits, grid=grid, depth=depth,
                   truncated=truncated, completed_depth=completed_depth,
                   metadata={"max_entries": max_entries})
    dim = 2 ** qubits
    for _ in range(reader.u64()):
        key = reader.u64()
        quantized = reader.array(dim * dim, "<c16").reshape(dim, dim)
        circuit = _read_circuit(reader, gate_set, qubits)
        db.entries.setdefault(key, []).append(DBEntry(quantized, circuit))
    if not reader.at_end():
        raise FileFormatError("trailing bytes after the last database entry")
    db.metadata["length_histogram"] = db.length_histogram()

    if verify:
        bad = verify_entries(db)
        if bad:
            raise FileFormatError(f"{len(bad)} database entries fail verification")
    logger.info(f"📂 Loaded {len(db)} database entries from {path}")
    return db


def _write_circuit(writer: BinaryWriter, circuit: Circuit, gate_set: GateSet) -> None:
    writer.u16(len(circuit))
    for gate in circuit.gates:
        writer.u8(gate_set.channel_index(gate.kind))
        for q in gate.qubits:
            writer.u8(q)
        if gate.kind.parameterized:
            writer.f64(gate.angle)


def _read_circuit(reader: BinaryReader, gate_set: GateSet, width: int) -> Circuit:
    gates = []
    for _ in range(reader.u16()):
        index = reader.u8()
        if index >= len(gate_set.kinds):
            raise FileFormatError(f"gate kind index {index} outside the gate set")
        kind = gate_set.kinds[index]
        qubits = tuple(reader.u8() for _ in range(kind.arity))
        angle = reader.f64() if kind.parameterized else None
        gates.append(Gate(kind, qubits, angle))
    return Circuit(width, tuple(gates))
