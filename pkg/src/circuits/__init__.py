"""Circuit IR, 2D layout algebra and QASM interchange."""

from .circuit import Gate, Circuit, random_circuit
from .layout import (
    SlotLayout, Window, Segments, Rejected, SplitResult,
    schedule, flatten, split, split_run, splice, shrink_window,
)
from .qasm_io import parse_qasm, emit_qasm, read_qasm_file, write_qasm_file

__all__ = [
    'Gate', 'Circuit', 'random_circuit',
    'SlotLayout', 'Window', 'Segments', 'Rejected', 'SplitResult',
    'schedule', 'flatten', 'split', 'split_run', 'splice', 'shrink_window',
    'parse_qasm', 'emit_qasm', 'read_qasm_file', 'write_qasm_file',
]
