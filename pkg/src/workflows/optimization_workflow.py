"""
Circuit Optimization Workflow

The iterated select -> compact -> replace -> splice loop. Each iteration
draws one candidate cut from the configured sampler, compacts the middle
onto the wires it touches, asks the replacement oracle for a strictly
shorter equivalent and splices it back. Every iteration is recorded in a
ConvergenceTrace, accepted or not.
"""

import csv
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.circuits import Circuit, Rejected, Window, schedule, splice
from src.gates import GateSet
from src.monitoring.logger import (
    start_performance_monitoring, end_performance_monitoring, log_stage_event,
)
from src.rewrite import RewriteDB, SynthesisConfig, find_replacement
from src.sampling import AttentionMap, SamplerLimits, create_sampler
from src.unitary import circuit_unitary, compact, equal_up_to_phase
from src.utils.errors import ConfigurationError, GateSetMismatchError, VerificationError
from src.utils.settings import get_settings

logger = logging.getLogger(__name__)

TRACE_FIELDS = ["iter", "gates", "elapsed_ms", "accepted", "q_lo", "q_hi", "t_lo", "t_hi", "reduced_by"]


class VerificationMode(str, Enum):
    EVERY = "every"
    FINAL = "final"
    OFF = "off"


class VerificationStatus(str, Enum):
    PASSED = "passed"
    FAILED = "failed"
    SKIPPED = "skipped"

    def __bool__(self) -> bool:
        return self is VerificationStatus.PASSED


class OptimizeConfig(BaseModel):
    """Run configuration; at least one stopping criterion must be set"""
    strategy: Literal["1d", "2d", "guided"] = "2d"
    max_iterations: Optional[int] = Field(2000, ge=0)
    budget_seconds: Optional[float] = Field(None, gt=0)
    target_gates: Optional[int] = Field(None, ge=0)
    limits: SamplerLimits = Field(default_factory=SamplerLimits)
    synthesis: Optional[SynthesisConfig] = None
    verification: VerificationMode = VerificationMode.FINAL
    seed: int = 0
    # Attention is recomputed after this many accepted replacements
    refresh_period: int = Field(1, ge=1)
    record_timing: bool = True

    @model_validator(mode="after")
    def _require_stop_criterion(self):
        if self.max_iterations is None and self.budget_seconds is None and self.target_gates is None:
            raise ValueError("set at least one of max_iterations, budget_seconds, target_gates")
        return self


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    gates: int
    elapsed_ms: float
    accepted: bool
    window: Optional[Window] = None
    reduced_by: int = 0

    def to_row(self) -> List:
        w = self.window
        bounds = [w.q_lo, w.q_hi, w.t_lo, w.t_hi] if w is not None else ["", "", "", ""]
        return [self.iteration, self.gates, f"{self.elapsed_ms:.3f}", int(self.accepted),
                *bounds, self.reduced_by]


@dataclass
class ConvergenceTrace:
    """Gate count after every iteration"""
    initial_gates: int
    records: List[TraceRecord] = field(default_factory=list)

    @property
    def final_gates(self) -> int:
        return self.records[-1].gates if self.records else self.initial_gates

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def accepted(self) -> int:
        return sum(1 for r in self.records if r.accepted)

    def is_monotone(self) -> bool:
        counts = [self.initial_gates] + [r.gates for r in self.records]
        return all(b <= a for a, b in zip(counts, counts[1:]))

    def gate_counts(self) -> List[int]:
        return [r.gates for r in self.records]

    def time_to_target(self, reference: int) -> Optional[Tuple[int, float]]:
        """(iteration, elapsed ms) at which the count first reached `reference`; 0 if it started there"""
        if self.initial_gates <= reference:
            return 0, 0.0
        for record in self.records:
            if record.gates <= reference:
                return record.iteration, record.elapsed_ms
        return None

    def write_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(TRACE_FIELDS)
            for record in self.records:
                writer.writerow(record.to_row())


def read_trace_csv(path: Union[str, Path], initial_gates: Optional[int] = None) -> ConvergenceTrace:
    """Inverse of ConvergenceTrace.write_csv"""
    records = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != TRACE_FIELDS:
            raise ValueError(f"unexpected trace header {reader.fieldnames}")
        for row in reader:
            window = None
            if row["q_lo"] != "":
                window = Window(int(row["q_lo"]), int(row["q_hi"]), int(row["t_lo"]), int(row["t_hi"]))
            records.append(TraceRecord(
                iteration=int(row["iter"]),
                gates=int(row["gates"]),
                elapsed_ms=float(row["elapsed_ms"]),
                accepted=row["accepted"] == "1",
                window=window,
                reduced_by=int(row["reduced_by"]),
            ))
    if initial_gates is None:
        initial_gates = records[0].gates + records[0].reduced_by if records else 0
    return ConvergenceTrace(initial_gates, records)


def verify(original: Circuit, optimized: Circuit) -> VerificationStatus:
    """Full-unitary phase equivalence; SKIPPED above the dense unitary cap"""
    if original.width != optimized.width:
        return VerificationStatus.FAILED
    cap = get_settings().unitary_cap
    if original.width > cap:
        logger.warning(f"⚠️ Verification skipped: width {original.width} exceeds cap {cap}")
        return VerificationStatus.SKIPPED
    match = equal_up_to_phase(circuit_unitary(original), circuit_unitary(optimized))
    return VerificationStatus.PASSED if match else VerificationStatus.FAILED


@dataclass
class OptimizationResult:
    circuit: Circuit
    trace: ConvergenceTrace
    verification: VerificationStatus = VerificationStatus.SKIPPED

    def __iter__(self):
        return iter((self.circuit, self.trace))


class CircuitOptimizationWorkflow:
    """One optimization run over a fixed gate set, database and optional model"""

    def __init__(self, gate_set: GateSet, db: Optional[RewriteDB] = None, model=None,
                 config: Optional[OptimizeConfig] = None):
        self.gate_set = gate_set
        self.db = db
        self.model = model
        self.config = config or OptimizeConfig()
        self.sampler = create_sampler(self.config.strategy, self.config.limits)
        self._check_configuration()

    def _check_configuration(self):
        if self.sampler.requires_attention() and self.model is None:
            raise ConfigurationError("the guided strategy requires a trained model")
        if not self.sampler.requires_attention() and self.model is not None:
            raise ConfigurationError(f"strategy {self.config.strategy!r} does not use a model")
        if self.db is not None and self.db.gate_set.descriptor() != self.gate_set.descriptor():
            raise GateSetMismatchError(
                f"database built for {self.db.gate_set.name}, run uses {self.gate_set.name}")
        if self.model is not None and self.model.gate_set.descriptor() != self.gate_set.descriptor():
            raise GateSetMismatchError(
                f"model trained for {self.model.gate_set.name}, run uses {self.gate_set.name}")

    def _validate_input(self, circuit: Circuit):
        cap = get_settings().unitary_cap
        if self.config.verification != VerificationMode.OFF and circuit.width > cap:
            raise ConfigurationError(
                f"verification {self.config.verification.value!r} needs width <= {cap}, "
                f"circuit has {circuit.width} qubits")
        if self.sampler.requires_attention() and not circuit.uses_only(self.gate_set):
            extra = sorted(k.name for k in circuit.kinds() if k not in self.gate_set)
            raise GateSetMismatchError(f"circuit uses kinds outside {self.gate_set.name}: {extra}")

    def _should_stop(self, iteration: int, gates: int, elapsed: float) -> bool:
        cfg = self.config
        if cfg.target_gates is not None and gates <= cfg.target_gates:
            return True
        if cfg.max_iterations is not None and iteration >= cfg.max_iterations:
            return True
        return cfg.budget_seconds is not None and elapsed >= cfg.budget_seconds

    def _refresh_attention(self, circuit: Circuit) -> AttentionMap:
        from src.guidance import infer
        return infer(self.model, circuit, self.gate_set)

    def _soundness_tolerance(self, dim: int) -> float:
        factor = get_settings().equivalence_tol
        if self.config.synthesis is not None:
            factor = max(factor, self.config.synthesis.tolerance)
        return factor * dim

    def run(self, circuit: Circuit) -> OptimizationResult:
        cfg = self.config
        self._validate_input(circuit)
        op_id = start_performance_monitoring(f"optimize_{cfg.strategy}")
        log_stage_event(f"optimize {cfg.strategy}", "run", "started",
                        {"gates": len(circuit), "width": circuit.width, "seed": cfg.seed})

        rng = np.random.default_rng(cfg.seed)
        current = circuit
        layout = schedule(current)
        trace = ConvergenceTrace(initial_gates=len(circuit))
        attention: Optional[AttentionMap] = None
        stale = True
        since_refresh = 0
        started = time.perf_counter()
        iteration = 0

        while not self._should_stop(iteration, len(current), time.perf_counter() - started):
            iteration += 1
            window, reduced_by = None, 0

            if len(current) > 0:
                if self.sampler.requires_attention() and stale:
                    attention = self._refresh_attention(current)
                    stale = False
                proposal = self.sampler.propose(current, layout, rng, attention)
                window = proposal.window
                if proposal.circuit is not current:
                    current = proposal.circuit
                    layout = schedule(current)

                replaced = self._try_replace(current, proposal.segments)
                if replaced is not None:
                    reduced_by = len(current) - len(replaced)
                    if cfg.verification == VerificationMode.EVERY and not verify(circuit, replaced):
                        end_performance_monitoring(op_id, success=False, error_message="verification failed")
                        raise VerificationError(f"iteration {iteration}: optimized circuit diverged")
                    current = replaced
                    layout = schedule(current)
                    since_refresh += 1
                    if since_refresh >= cfg.refresh_period:
                        stale, since_refresh = True, 0

            elapsed_ms = (time.perf_counter() - started) * 1000.0 if cfg.record_timing else 0.0
            trace.records.append(TraceRecord(iteration, len(current), elapsed_ms,
                                             reduced_by > 0, window, reduced_by))

        status = VerificationStatus.SKIPPED
        if cfg.verification != VerificationMode.OFF:
            status = verify(circuit, current)
            if status == VerificationStatus.FAILED:
                logger.error("❌ Final circuit is not equivalent to the input")

        end_performance_monitoring(op_id, success=status != VerificationStatus.FAILED,
                                   metadata={"initial": len(circuit), "final": len(current),
                                             "iterations": iteration})
        log_stage_event(f"optimize {cfg.strategy}", "run", "completed",
                        {"initial": len(circuit), "final": len(current), "iterations": iteration})
        return OptimizationResult(current, trace, status)

    def _try_replace(self, circuit: Circuit, segments) -> Optional[Circuit]:
        """Spliced circuit if the middle has a strictly shorter equivalent"""
        if isinstance(segments, Rejected) or len(segments.middle) == 0:
            return None
        block = compact(segments.middle)
        if block.k > get_settings().synth_qubit_cap:
            return None

        replacement = find_replacement(block.sub, self.gate_set, self.db, self.config.synthesis)
        if replacement is None or replacement.length >= len(block.sub):
            return None

        old = circuit_unitary(block.sub)
        if not equal_up_to_phase(circuit_unitary(replacement.circuit), old,
                                 self._soundness_tolerance(old.shape[0])):
            logger.warning(f"⚠️ Rejected unsound {replacement.source} replacement of {len(block.sub)} gates")
            return None
        return splice(segments, replacement.circuit)


def optimize(circuit: Circuit, gate_set: GateSet, db: Optional[RewriteDB] = None, model=None,
             config: Optional[OptimizeConfig] = None) -> OptimizationResult:
    """Run one optimization; see CircuitOptimizationWorkflow"""
    return CircuitOptimizationWorkflow(gate_set, db, model, config).run(circuit)
