"""Benchmark harness."""

from .bench_orchestrator import (
    BenchConfig, BenchOrchestrator, BenchReport, RunOutcome,
    aggregate, convergence_curve, paired_wilcoxon,
    read_summary_csv, recompute_aggregates, summary_header,
)

__all__ = [
    'BenchConfig', 'BenchOrchestrator', 'BenchReport', 'RunOutcome',
    'aggregate', 'convergence_curve', 'paired_wilcoxon',
    'read_summary_csv', 'recompute_aggregates', 'summary_header',
]
