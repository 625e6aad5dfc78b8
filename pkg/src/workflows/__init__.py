# Optimization workflows package
from .optimization_workflow import (
    OptimizeConfig, VerificationMode, VerificationStatus, ConvergenceTrace, TraceRecord,
    OptimizationResult, CircuitOptimizationWorkflow, optimize, verify, read_trace_csv,
)

__all__ = [
    'OptimizeConfig', 'VerificationMode', 'VerificationStatus', 'ConvergenceTrace', 'TraceRecord',
    'OptimizationResult', 'CircuitOptimizationWorkflow', 'optimize', 'verify', 'read_trace_csv',
]
