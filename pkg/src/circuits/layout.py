"""
2D slot layout, windows and the three-segment split.

A circuit is laid out on a qubit x slot grid by ASAP scheduling. A window
is an axis-aligned rectangle on that grid; splitting by a window yields
prefix, middle and suffix circuits whose concatenation is equivalent to
the source. The middle can then be replaced and spliced back.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .circuit import Circuit, Gate

EMPTY = -1


@dataclass(frozen=True, eq=False)
class SlotLayout:
    """Per-gate slot indices plus the (qubit, slot) -> gate index grid"""
    slots: Tuple[int, ...]
    depth: int
    grid: np.ndarray  # shape (width, depth), EMPTY where no gate

    @property
    def width(self) -> int:
        return self.grid.shape[0]

    def occupancy(self) -> np.ndarray:
        return self.grid != EMPTY

    def gate_at(self, qubit: int, slot: int) -> Optional[int]:
        index = int(self.grid[qubit, slot])
        return None if index == EMPTY else index


def schedule(circuit: Circuit) -> SlotLayout:
    """ASAP: each gate goes one slot after the latest earlier gate sharing a qubit"""
    last = [-1] * circuit.width
    slots: List[int] = []
    for gate in circuit.gates:
        slot = max(last[q] for q in gate.qubits) + 1
        for q in gate.qubits:
            last[q] = slot
        slots.append(slot)

    depth = max(slots) + 1 if slots else 0
    grid = np.full((circuit.width, depth), EMPTY, dtype=np.int64)
    for index, (gate, slot) in enumerate(zip(circuit.gates, slots)):
        for q in gate.qubits:
            grid[q, slot] = index
    grid.setflags(write=False)
    return SlotLayout(slots=tuple(slots), depth=depth, grid=grid)


def flatten(circuit: Circuit, layout: SlotLayout) -> Circuit:
    """Read the grid column by column, ties broken by original gate order"""
    order = sorted(range(len(circuit)), key=lambda i: (layout.slots[i], i))
    return circuit.with_gates(circuit.gates[i] for i in order)


@dataclass(frozen=True)
class Window:
    """Inclusive qubit range [q_lo, q_hi] x inclusive slot range [t_lo, t_hi]"""
    q_lo: int
    q_hi: int
    t_lo: int
    t_hi: int

    @property
    def qubit_span(self) -> int:
        return self.q_hi - self.q_lo + 1

    @property
    def slot_span(self) -> int:
        return self.t_hi - self.t_lo + 1

    def contains(self, qubit: int, slot: int) -> bool:
        return self.q_lo <= qubit <= self.q_hi and self.t_lo <= slot <= self.t_hi

    def is_valid_for(self, width: int, depth: int, max_qubits: Optional[int] = None) -> bool:
        if not (0 <= self.q_lo <= self.q_hi < width and 0 <= self.t_lo <= self.t_hi < depth):
            return False
        return max_qubits is None or self.qubit_span <= max_qubits


@dataclass(frozen=True)
class Segments:
    prefix: Circuit
    middle: Circuit
    suffix: Circuit
    middle_qubits: Tuple[int, ...]
    # Indices of the middle gates in the source circuit
    middle_indices: Tuple[int, ...] = ()

    def concatenated(self, middle: Optional[Sequence[Gate]] = None) -> Circuit:
        """prefix + middle + suffix, optionally with other middle gates (already on source wires)"""
        middle = self.middle.gates if middle is None else tuple(middle)
        return self.prefix.with_gates(self.prefix.gates + middle + self.suffix.gates)


@dataclass(frozen=True)
class Rejected:
    """A window that cannot be cut; the caller resamples"""
    reason: str


SplitResult = Union[Segments, Rejected]


def _segments(circuit: Circuit, prefix: List[int], middle: List[int], suffix: List[int]) -> Segments:
    gates = circuit.gates
    middle_qubits = tuple(sorted({q for i in middle for q in gates[i].qubits}))
    return Segments(
        prefix=circuit.with_gates(gates[i] for i in prefix),
        middle=circuit.with_gates(gates[i] for i in middle),
        suffix=circuit.with_gates(gates[i] for i in suffix),
        middle_qubits=middle_qubits,
        middle_indices=tuple(middle),
    )


def split(circuit: Circuit, window: Window, layout: Optional[SlotLayout] = None) -> SplitResult:
    """
    Cut the circuit into prefix / middle / suffix by a window.

    Gates in the slot range that act entirely outside the qubit rows go to
    the prefix. A gate in the slot range straddling the row boundary
    invalidates the cut.
    """
    layout = layout if layout is not None else schedule(circuit)
    if not window.is_valid_for(circuit.width, layout.depth):
        return Rejected(f"window {window} outside the {circuit.width}x{layout.depth} grid")

    prefix: List[int] = []
    middle: List[int] = []
    suffix: List[int] = []
    for index, (gate, slot) in enumerate(zip(circuit.gates, layout.slots)):
        if slot < window.t_lo:
            prefix.append(index)
        elif slot > window.t_hi:
            suffix.append(index)
        else:
            inside = [window.q_lo <= q <= window.q_hi for q in gate.qubits]
            if all(inside):
                middle.append(index)
            elif any(inside):
                return Rejected(f"gate {index} ({gate}) crosses the window boundary")
            else:
                prefix.append(index)
    return _segments(circuit, prefix, middle, suffix)


def _first_crossing(circuit: Circuit, layout: SlotLayout, window: Window) -> Optional[int]:
    for slot in range(window.t_lo, window.t_hi + 1):
        for qubit in range(window.q_lo, window.q_hi + 1):
            index = layout.gate_at(qubit, slot)
            if index is None:
                continue
            if not all(window.q_lo <= q <= window.q_hi for q in circuit.gates[index].qubits):
                return index
    return None


def shrink_window(circuit: Circuit, layout: SlotLayout, window: Window, anchor: int) -> Optional[Window]:
    """
    A cuttable window obtained from `window` by shrinking, with gate
    `anchor` kept inside.

    The rows are first widened to cover the anchor gate. Each crossing gate
    is then excluded by moving a row edge when its in-window qubits lie
    entirely to one side of the anchor's rows, otherwise by moving the slot
    edge on its side of the anchor. None if the anchor's own slot cannot be
    cleared.
    """
    qubits = circuit.gates[anchor].qubits
    a_lo, a_hi, a_slot = min(qubits), max(qubits), layout.slots[anchor]
    window = Window(min(window.q_lo, a_lo), max(window.q_hi, a_hi),
                    min(window.t_lo, a_slot), max(window.t_hi, a_slot))
    while True:
        crossing = _first_crossing(circuit, layout, window)
        if crossing is None:
            return window
        inside = [q for q in circuit.gates[crossing].qubits if window.q_lo <= q <= window.q_hi]
        slot = layout.slots[crossing]
        if max(inside) < a_lo:
            window = Window(max(inside) + 1, window.q_hi, window.t_lo, window.t_hi)
        elif min(inside) > a_hi:
            window = Window(window.q_lo, min(inside) - 1, window.t_lo, window.t_hi)
        elif slot < a_slot:
            window = Window(window.q_lo, window.q_hi, slot + 1, window.t_hi)
        elif slot > a_slot:
            window = Window(window.q_lo, window.q_hi, window.t_lo, slot - 1)
        else:
            return None


def split_run(circuit: Circuit, start: int, length: int) -> Segments:
    """Token-chain cut: gates[start:start+length] become the middle"""
    end = start + length
    if not (0 <= start and length >= 0 and end <= len(circuit)):
        raise ValueError(f"run [{start}, {end}) outside a circuit of length {len(circuit)}")
    return _segments(circuit, list(range(start)), list(range(start, end)), list(range(end, len(circuit))))


def splice(segments: Segments, new_middle: Circuit) -> Circuit:
    """Replace the middle: qubit i of new_middle maps to middle_qubits[i]"""
    if new_middle.width != len(segments.middle_qubits):
        raise ValueError(
            f"replacement width {new_middle.width} does not match "
            f"{len(segments.middle_qubits)} middle qubits")
    mapping = {local: original for local, original in enumerate(segments.middle_qubits)}
    return segments.concatenated(g.remap(mapping) for g in new_middle.gates)
