"""
Dataset Generation

Labels random circuits by trying uniform and anchored windows on them.
A window whose compacted middle has a strictly shorter verified equivalent
marks the cells of the gates it actually removes or changes; the target is
the union over windows. The circuit itself is never modified while labeling.
"""

import logging
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy.ndimage import gaussian_filter

from src.circuits import (
    Circuit, Rejected, Window, emit_qasm, parse_qasm, random_circuit, schedule, shrink_window, split,
)
from src.gates import GateSet
from src.gates.gate_set import read_gate_set, write_gate_set
from src.monitoring.logger import (
    start_performance_monitoring, end_performance_monitoring, log_stage_event,
)
from src.rewrite import RewriteDB, SynthesisConfig, find_replacement
from src.sampling import SamplerLimits, sample_2d_uniform, window_around
from src.unitary import circuit_unitary, compact, equal_up_to_phase
from src.utils.binary_io import BinaryReader, BinaryWriter, crc32, read_framed, write_framed
from src.utils.errors import ChecksumError, FileFormatError, QasmParseError
from src.utils.settings import get_settings

logger = logging.getLogger(__name__)

DATASET_MAGIC = b"QGDS"
DATASET_FORMAT_VERSION = 1


class LabelConfig(BaseModel):
    # None: twice the number of grid cells
    probes: Optional[int] = Field(None, ge=1)
    limits: SamplerLimits = Field(default_factory=SamplerLimits)
    synthesis: Optional[SynthesisConfig] = None
    # windows per occupied cell, placed around it after the uniform ones
    anchor_rounds: int = Field(2, ge=0)
    blur_sigma: float = Field(0.0, ge=0.0)
    refine: bool = True


class DatasetConfig(BaseModel):
    count: int = Field(2000, ge=0)
    width: int = Field(8, ge=1)
    length: int = Field(100, ge=0)
    seed: int = Field(0, ge=0)
    chunk_size: int = Field(100, ge=1)
    workers: int = Field(1, ge=1)
    label: LabelConfig = Field(default_factory=LabelConfig)


@dataclass(frozen=True)
class LabeledSample:
    circuit: Circuit
    target: np.ndarray  # qubits x slots, float32
    gate_set_name: str
    seed: int = 0
    index: int = 0
    probes: int = 0


@dataclass
class DatasetFile:
    gate_set: GateSet
    samples: List[LabeledSample]

    def __len__(self) -> int:
        return len(self.samples)


def reducible_gates(old: Circuit, new: Circuit, tol: Optional[float] = None) -> List[int]:
    """
    Indices of `old` gates that the replacement actually removes or changes.

    A gate that appears unchanged in `new` is dropped from the label when
    deleting it from both sides keeps the two circuits equivalent.
    """
    kept = list(range(len(old)))
    remaining = list(new.gates)
    for index, gate in enumerate(old.gates):
        if gate not in remaining:
            continue
        trial_kept = [i for i in kept if i != index]
        trial_new = list(remaining)
        trial_new.remove(gate)
        before = Circuit(old.width, tuple(old.gates[i] for i in trial_kept))
        after = Circuit(old.width, tuple(trial_new))
        if equal_up_to_phase(circuit_unitary(before), circuit_unitary(after), tol):
            kept, remaining = trial_kept, trial_new
    return kept


def label_circuit(circuit: Circuit, gate_set: GateSet, db: Optional[RewriteDB],
                  rng: np.random.Generator, config: Optional[LabelConfig] = None) -> Tuple[np.ndarray, int]:
    """
    (target grid, number of windows drawn) for a fixed circuit.

    Uniform windows come first. Then `anchor_rounds` windows are placed
    around every occupied cell and shrunk until no gate crosses them.
    """
    config = config or LabelConfig()
    layout = schedule(circuit)
    target = np.zeros((circuit.width, layout.depth))
    if len(circuit) == 0:
        return target.astype(np.float32), 0

    cap = get_settings().synth_qubit_cap
    tolerance_factor = max(get_settings().equivalence_tol,
                           config.synthesis.tolerance if config.synthesis else 0.0)
    outcomes: Dict[Tuple[int, ...], List[int]] = {}

    def label_window(window: Window):
        segments = split(circuit, window, layout)
        if isinstance(segments, Rejected) or len(segments.middle) == 0:
            return
        key = segments.middle_indices
        if key not in outcomes:
            outcomes[key] = []
            block = compact(segments.middle)
            if block.k <= cap:
                replacement = find_replacement(block.sub, gate_set, db, config.synthesis)
                if replacement is not None:
                    if config.refine:
                        local = reducible_gates(block.sub, replacement.circuit,
                                                tolerance_factor * 2 ** block.k)
                    else:
                        local = list(range(len(block.sub)))
                    outcomes[key] = [key[i] for i in local]
        for gate_index in outcomes[key]:
            slot = layout.slots[gate_index]
            for q in circuit.gates[gate_index].qubits:
                target[q, slot] = 1.0

    uniform = config.probes or 2 * circuit.width * layout.depth
    for _ in range(uniform):
        label_window(sample_2d_uniform(layout, config.limits, rng))

    cells = [(int(q), int(t)) for q, t in np.argwhere(layout.occupancy())]
    for _ in range(config.anchor_rounds):
        for cell in cells:
            anchor = layout.gate_at(*cell)
            window = shrink_window(circuit, layout, window_around(cell, layout, config.limits, rng), anchor)
            if window is not None:
                label_window(window)

    if config.blur_sigma > 0.0:
        target = np.clip(gaussian_filter(target, config.blur_sigma), 0.0, 1.0) * layout.occupancy()
    return target.astype(np.float32), uniform + config.anchor_rounds * len(cells)


def generate_sample(index: int, gate_set: GateSet, db: Optional[RewriteDB],
                    config: DatasetConfig) -> LabeledSample:
    """One sample; its RNG stream depends only on (seed, index)"""
    rng = np.random.default_rng([config.seed, index])
    circuit = random_circuit(config.width, config.length, gate_set, rng)
    target, probes = label_circuit(circuit, gate_set, db, rng, config.label)
    return LabeledSample(circuit, target, gate_set.name, config.seed, index, probes)


_worker_state: Dict[str, object] = {}


def _init_worker(gate_set, db, config):
    _worker_state.update(gate_set=gate_set, db=db, config=config)


def _generate_in_worker(index: int) -> LabeledSample:
    return generate_sample(index, _worker_state["gate_set"], _worker_state["db"], _worker_state["config"])


def _chunk_path(chunk_dir: Path, number: int) -> Path:
    return chunk_dir / f"chunk_{number:05d}.qgds"


def _load_chunk(path: Path, expected: int) -> Optional[List[LabeledSample]]:
    try:
        samples = read_dataset(path).samples
    except (FileFormatError, OSError, QasmParseError):
        return None
    return samples if len(samples) == expected else None


def generate_dataset(gate_set: GateSet, config: DatasetConfig, db: Optional[RewriteDB],
                     out_path: Union[str, Path]) -> DatasetFile:
    """
    Generate, label and write `config.count` samples.

    Samples are produced in chunks written next to the output; an interrupted
    run resumes from the completed chunks. Chunks are removed once the final
    file is written.
    """
    out_path = Path(out_path)
    chunk_dir = out_path.with_name(out_path.name + ".chunks")
    chunk_dir.mkdir(parents=True, exist_ok=True)
    op_id = start_performance_monitoring("generate_dataset")

    executor = None
    if config.workers > 1:
        executor = ProcessPoolExecutor(max_workers=config.workers, initializer=_init_worker,
                                       initargs=(gate_set, db, config))
    samples: List[LabeledSample] = []
    try:
        for number, start in enumerate(range(0, config.count, config.chunk_size)):
            indices = list(range(start, min(start + config.chunk_size, config.count)))
            path = _chunk_path(chunk_dir, number)
            chunk = _load_chunk(path, len(indices)) if path.exists() else None
            if chunk is not None:
                log_stage_event(f"chunk {number}", "dataset", "completed", {"resumed": True})
            else:
                log_stage_event(f"chunk {number}", "dataset", "started", {"samples": len(indices)})
                if executor is not None:
                    chunk = list(executor.map(_generate_in_worker, indices))
                else:
                    chunk = [generate_sample(i, gate_set, db, config) for i in indices]
                write_dataset(DatasetFile(gate_set, chunk), path)
                log_stage_event(f"chunk {number}", "dataset", "completed",
                                {"done": start + len(indices), "total": config.count})
            samples.extend(chunk)

        dataset = DatasetFile(gate_set, samples)
        try:
            write_dataset(dataset, out_path)
        except OSError:
            if out_path.exists():
                out_path.unlink()
            raise
    except Exception as e:
        end_performance_monitoring(op_id, success=False, error_message=str(e))
        raise
    finally:
        if executor is not None:
            executor.shutdown()

    shutil.rmtree(chunk_dir, ignore_errors=True)
    reducible = sum(1 for s in samples if s.target.any())
    end_performance_monitoring(op_id, metadata={"samples": len(samples), "reducible": reducible})
    logger.info(f"✅ Wrote {len(samples)} samples to {out_path} ({reducible} with a nonzero target)")
    return dataset


def _encode_sample(sample: LabeledSample) -> bytes:
    writer = BinaryWriter()
    writer.u64(sample.seed).u32(sample.index).u32(sample.probes)
    writer.text(emit_qasm(sample.circuit))
    height, width = sample.target.shape
    writer.u16(height).u32(width)
    writer.array(sample.target, "<f4")
    return writer.getvalue()


def write_dataset(dataset: DatasetFile, path: Union[str, Path]) -> None:
    """Header, then per sample: metadata, QASM text, target grid, CRC32 of those bytes"""
    writer = BinaryWriter()
    write_gate_set(writer, dataset.gate_set)
    writer.u64(len(dataset.samples))
    for sample in dataset.samples:
        data = _encode_sample(sample)
        writer.u32(len(data)).raw(data).u32(crc32(data))
    write_framed(path, DATASET_MAGIC, DATASET_FORMAT_VERSION, writer.getvalue())


def read_dataset(path: Union[str, Path]) -> DatasetFile:
    reader = BinaryReader(read_framed(path, DATASET_MAGIC, DATASET_FORMAT_VERSION))
    try:
        gate_set = read_gate_set(reader)
    except KeyError as e:
        raise FileFormatError(f"dataset uses an unregistered gate kind: {e}") from None

    samples = []
    for position in range(reader.u64()):
        data = reader.raw(reader.u32())
        if crc32(data) != reader.u32():
            raise ChecksumError(f"sample {position} failed its CRC32 check")
        sample_reader = BinaryReader(data)
        seed, index, probes = sample_reader.u64(), sample_reader.u32(), sample_reader.u32()
        circuit = parse_qasm(sample_reader.text())
        height, width = sample_reader.u16(), sample_reader.u32()
        target = sample_reader.array(height * width, "<f4").astype(np.float32).reshape(height, width)
        if (height, width) != (circuit.width, schedule(circuit).depth):
            raise FileFormatError(f"sample {position}: target shape {(height, width)} "
                                  f"does not match its circuit")
        samples.append(LabeledSample(circuit, target, gate_set.name, seed, index, probes))
    if not reader.at_end():
        raise FileFormatError("trailing bytes after the last sample")
    return DatasetFile(gate_set, samples)


def split_dataset(samples: Sequence[LabeledSample], holdout: int) -> Tuple[List[LabeledSample], List[LabeledSample]]:
    """(train, held-out) with the last `holdout` samples held out"""
    cut = max(0, len(samples) - holdout)
    return list(samples[:cut]), list(samples[cut:])
