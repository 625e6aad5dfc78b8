"""
Benchmark Orchestrator

Runs every (circuit, strategy) pair of a benchmark on a worker pool and
collects the results in one place. Circuit i is the same for every
strategy and every strategy run on it shares its seed, so the comparison
across strategies is paired.

Outputs, written by the collector only:
  traces/<strategy>_seed<seed>.csv  per-run convergence trace
  summary.csv                       per-run rows, then per-strategy aggregates
  convergence.csv                   median and quartiles per iteration
  time_to_target.csv                when a reference count is given
"""

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy.stats import wilcoxon

from src.circuits import Circuit, random_circuit
from src.gates import GateSet
from src.monitoring.logger import log_stage_event
from src.rewrite import RewriteDB, SynthesisConfig
from src.sampling import SamplerLimits, sampler_registry
from src.utils.errors import QoptError
from src.workflows.optimization_workflow import (
    ConvergenceTrace, OptimizeConfig, VerificationMode, VerificationStatus, optimize,
)

logger = logging.getLogger(__name__)

AGGREGATES = ("mean", "std", "median", "q1", "q3")


class BenchConfig(BaseModel):
    circuits: int = Field(100, ge=1)
    width: int = Field(8, ge=1)
    length: int = Field(100, ge=0)
    strategies: List[str] = Field(default_factory=lambda: ["1d", "2d", "guided"])
    iterations: int = Field(2000, ge=0)
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    verification: VerificationMode = VerificationMode.FINAL
    reference: Optional[int] = Field(None, ge=0)
    record_timing: bool = True
    limits: SamplerLimits = Field(default_factory=SamplerLimits)
    synthesis: Optional[SynthesisConfig] = None

    @field_validator("strategies")
    @classmethod
    def _known_strategies(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("at least one strategy is required")
        unknown = [s for s in value if s not in sampler_registry.get_all_strategies()]
        if unknown:
            raise ValueError(f"unknown strategies {unknown}")
        if len(set(value)) != len(value):
            raise ValueError(f"duplicate strategies in {value}")
        return value


@dataclass
class RunOutcome:
    seed: int
    strategy: str
    init_gates: int
    final_gates: int
    kind_counts: Dict[str, int]
    iterations: int
    ms: float
    verification: VerificationStatus
    trace: ConvergenceTrace
    error: Optional[str] = None


@dataclass
class BenchReport:
    outcomes: List[RunOutcome]
    kind_columns: List[str]
    strategies: List[str]
    wilcoxon_p: Optional[float] = None
    files: Dict[str, str] = field(default_factory=dict)

    @property
    def failed_runs(self) -> List[RunOutcome]:
        return [o for o in self.outcomes if o.verification == VerificationStatus.FAILED]

    def summary(self) -> Dict[str, Any]:
        medians = {s: float(np.median([o.final_gates for o in self.outcomes if o.strategy == s]))
                   for s in self.strategies}
        return {
            "runs": len(self.outcomes),
            "failed_verification": len(self.failed_runs),
            "median_final_gates": medians,
            "wilcoxon_p_guided_vs_2d": self.wilcoxon_p,
            "files": self.files,
        }


def bench_circuit(index: int, config: BenchConfig, gate_set: GateSet) -> Circuit:
    return random_circuit(config.width, config.length, gate_set, [config.seed, index])


def run_single(seed: int, index: int, strategy: str, gate_set: GateSet, db: Optional[RewriteDB],
               model, config: BenchConfig) -> RunOutcome:
    """One optimization run; failures become a row instead of an exception"""
    circuit = bench_circuit(index, config, gate_set)
    run_config = OptimizeConfig(
        strategy=strategy,
        max_iterations=config.iterations,
        limits=config.limits,
        synthesis=config.synthesis,
        verification=config.verification,
        seed=seed,
        record_timing=config.record_timing,
    )
    try:
        result = optimize(circuit, gate_set, db, model if strategy == "guided" else None, run_config)
    except QoptError as e:
        logger.error(f"❌ Run {strategy} seed {seed} failed: {e}")
        return RunOutcome(seed, strategy, len(circuit), len(circuit), circuit.kind_counts(), 0, 0.0,
                          VerificationStatus.FAILED, ConvergenceTrace(len(circuit)), str(e))

    trace = result.trace
    ms = trace.records[-1].elapsed_ms if trace.records else 0.0
    return RunOutcome(seed, strategy, len(circuit), len(result.circuit), result.circuit.kind_counts(),
                      trace.iterations, ms, result.verification, trace)


_worker_state: Dict[str, Any] = {}


def _init_worker(gate_set, db, model, config):
    _worker_state.update(gate_set=gate_set, db=db, model=model, config=config)


def _run_in_worker(job) -> RunOutcome:
    seed, index, strategy = job
    s = _worker_state
    return run_single(seed, index, strategy, s["gate_set"], s["db"], s["model"], s["config"])


def aggregate(values: Sequence[float]) -> Dict[str, float]:
    """mean, population std, median and quartiles (linear interpolation)"""
    data = np.asarray(values, dtype=np.float64)
    q1, median, q3 = np.percentile(data, [25, 50, 75])
    return {"mean": float(data.mean()), "std": float(data.std()),
            "median": float(median), "q1": float(q1), "q3": float(q3)}


def convergence_curve(traces: Sequence[ConvergenceTrace], iterations: int) -> List[List[float]]:
    """[iter, median, q1, q3] for iter 0..iterations; short traces carry their last count"""
    counts = np.empty((len(traces), iterations + 1))
    for row, trace in enumerate(traces):
        series = [trace.initial_gates] + trace.gate_counts()
        series = series[:iterations + 1]
        counts[row, :len(series)] = series
        counts[row, len(series):] = series[-1]
    q1, median, q3 = np.percentile(counts, [25, 50, 75], axis=0)
    return [[i, float(median[i]), float(q1[i]), float(q3[i])] for i in range(iterations + 1)]


def paired_wilcoxon(better: Sequence[int], baseline: Sequence[int]) -> Optional[float]:
    """One-sided p-value for `better` having smaller final counts than `baseline`"""
    diffs = np.asarray(better, dtype=np.float64) - np.asarray(baseline, dtype=np.float64)
    if diffs.size == 0 or not np.any(diffs):
        return None
    return float(wilcoxon(better, baseline, alternative="less").pvalue)


class BenchOrchestrator:
    """Plans, executes and collects one benchmark"""

    def __init__(self, gate_set: GateSet, db: Optional[RewriteDB] = None, model=None,
                 config: Optional[BenchConfig] = None):
        self.gate_set = gate_set
        self.db = db
        self.model = model
        self.config = config or BenchConfig()
        logger.info(f"🎭 Bench: {self.config.circuits} circuits x {self.config.strategies}")

    def plan_runs(self) -> List[tuple]:
        """(seed, circuit index, strategy) in output order"""
        return [(self.config.seed + i, i, strategy)
                for i in range(self.config.circuits) for strategy in self.config.strategies]

    def execute(self) -> List[RunOutcome]:
        jobs = self.plan_runs()
        if self.config.workers > 1:
            with ProcessPoolExecutor(max_workers=self.config.workers, initializer=_init_worker,
                                     initargs=(self.gate_set, self.db, self.model, self.config)) as pool:
                outcomes = list(pool.map(_run_in_worker, jobs))
        else:
            outcomes = []
            for seed, index, strategy in jobs:
                outcomes.append(run_single(seed, index, strategy, self.gate_set, self.db,
                                           self.model, self.config))
                log_stage_event(f"{strategy} seed {seed}", "bench run", "completed",
                                {"final_gates": outcomes[-1].final_gates})
        return outcomes

    def run(self, out_dir: Union[str, Path]) -> BenchReport:
        outcomes = self.execute()
        report = BenchReport(outcomes, [k.name for k in self.gate_set.kinds], list(self.config.strategies))
        if "guided" in report.strategies and "2d" in report.strategies:
            report.wilcoxon_p = paired_wilcoxon(
                [o.final_gates for o in outcomes if o.strategy == "guided"],
                [o.final_gates for o in outcomes if o.strategy == "2d"])
        self.write_outputs(report, Path(out_dir))
        return report

    def write_outputs(self, report: BenchReport, out_dir: Path) -> None:
        traces_dir = out_dir / "traces"
        traces_dir.mkdir(parents=True, exist_ok=True)
        for outcome in report.outcomes:
            outcome.trace.write_csv(traces_dir / f"{outcome.strategy}_seed{outcome.seed}.csv")

        write_summary_csv(report, out_dir / "summary.csv")
        report.files["summary"] = str(out_dir / "summary.csv")

        with open(out_dir / "convergence.csv", "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["strategy", "iter", "median", "q1", "q3"])
            for strategy in report.strategies:
                traces = [o.trace for o in report.outcomes if o.strategy == strategy]
                for row in convergence_curve(traces, self.config.iterations):
                    writer.writerow([strategy, *row])
        report.files["convergence"] = str(out_dir / "convergence.csv")

        if self.config.reference is not None:
            with open(out_dir / "time_to_target.csv", "w", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["seed", "strategy", "reference", "iter", "ms"])
                for o in report.outcomes:
                    hit = o.trace.time_to_target(self.config.reference)
                    writer.writerow([o.seed, o.strategy, self.config.reference,
                                     *(hit if hit is not None else ("", ""))])
            report.files["time_to_target"] = str(out_dir / "time_to_target.csv")
        logger.info(f"✅ Bench outputs written to {out_dir}")


def summary_header(kind_columns: Sequence[str]) -> List[str]:
    return ["seed", "strategy", "init_gates", "final_gates",
            *[k.lower() for k in kind_columns], "iters", "ms", "verified"]


def _summary_values(o: RunOutcome, kind_columns: Sequence[str]) -> List[float]:
    return [o.init_gates, o.final_gates, *[o.kind_counts.get(k, 0) for k in kind_columns],
            o.iterations, o.ms, 1 if o.verification == VerificationStatus.PASSED else 0]


def write_summary_csv(report: BenchReport, path: Path) -> None:
    """Per-run rows, then one row per aggregate and strategy (seed column holds the aggregate name)"""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(summary_header(report.kind_columns))
        for o in report.outcomes:
            writer.writerow([o.seed, o.strategy, *_summary_values(o, report.kind_columns)])
        for strategy in report.strategies:
            rows = [_summary_values(o, report.kind_columns) for o in report.outcomes if o.strategy == strategy]
            columns = [aggregate(col) for col in zip(*rows)]
            for name in AGGREGATES:
                writer.writerow([name, strategy, *[repr(c[name]) for c in columns]])


def read_summary_csv(path: Union[str, Path]) -> Dict[str, List[Dict[str, str]]]:
    """{"runs": [...], "aggregates": [...]} as raw string rows"""
    runs, aggregates = [], []
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            (aggregates if row["seed"] in AGGREGATES else runs).append(row)
    return {"runs": runs, "aggregates": aggregates}


def recompute_aggregates(runs: Sequence[Dict[str, str]], strategy: str) -> Dict[str, Dict[str, float]]:
    """Aggregate rows recomputed from the per-run rows of one strategy"""
    selected = [r for r in runs if r["strategy"] == strategy]
    columns = [c for c in selected[0] if c not in ("seed", "strategy")]
    result: Dict[str, Dict[str, float]] = {name: {} for name in AGGREGATES}
    for column in columns:
        stats = aggregate([float(r[column]) for r in selected])
        for name in AGGREGATES:
            result[name][column] = stats[name]
    return result
