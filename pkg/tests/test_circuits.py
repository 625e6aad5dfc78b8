"""Circuit IR, scheduling, split and splice"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from config.presets import get_gate_set
from src.circuits import (
    Circuit, Gate, Rejected, Segments, Window, flatten, random_circuit, schedule, splice, split,
    shrink_window, split_run,
)
from src.gates import CZ, RX, RZ
from src.unitary import circuit_unitary, equal_up_to_phase
from src.utils.errors import CircuitValidationError


class TestGate:

    def test_normalizes_qubits_and_angle(self):
        gate = Gate(RX, [2], 1)
        assert gate.qubits == (2,)
        assert isinstance(gate.angle, float)

    @pytest.mark.parametrize("kind,qubits,angle", [
        (CZ, (0,), None),
        (CZ, (1, 1), None),
        (RX, (-1,), 0.2),
        (RX, (0,), None),
        (RX, (0,), math.nan),
        (CZ, (0, 1), 0.5),
    ])
    def test_rejects_invalid_gates(self, kind, qubits, angle):
        with pytest.raises(CircuitValidationError):
            Gate(kind, qubits, angle)

    def test_circuit_rejects_out_of_range_qubits(self):
        with pytest.raises(CircuitValidationError):
            Circuit(2, (Gate(CZ, (0, 2)),))
        with pytest.raises(CircuitValidationError):
            Circuit(0)


def test_random_circuit_is_reproducible(nisq):
    first = random_circuit(5, 40, nisq, seed=7)
    second = random_circuit(5, 40, nisq, seed=7)
    assert first == second
    assert len(first) == 40
    assert first.uses_only(nisq)
    assert all(0.0 <= g.angle < 2 * math.pi for g in first if g.angle is not None)


def test_random_circuit_needs_room_for_two_qubit_gates(nisq):
    with pytest.raises(CircuitValidationError):
        random_circuit(1, 5, nisq, seed=0)


def test_schedule_is_asap(fig2_circuit):
    layout = schedule(fig2_circuit)
    assert layout.slots == (0, 0, 0, 1)
    assert layout.depth == 2
    assert layout.gate_at(0, 1) == 3
    assert layout.gate_at(2, 1) is None
    assert layout.occupancy().sum() == 6


def test_schedule_of_empty_circuit():
    layout = schedule(Circuit(3))
    assert layout.depth == 0
    assert layout.grid.shape == (3, 0)


def test_flatten_orders_by_slot():
    circuit = Circuit(2, (Gate(RX, (0,), 0.1), Gate(RX, (0,), 0.2), Gate(RZ, (1,), 0.3)))
    flat = flatten(circuit, schedule(circuit))
    assert [g.angle for g in flat] == [0.1, 0.3, 0.2]
    assert equal_up_to_phase(circuit_unitary(flat), circuit_unitary(circuit))


def test_split_moves_outside_rows_to_prefix(fig2_circuit):
    segments = split(fig2_circuit, Window(0, 1, 0, 1))
    assert isinstance(segments, Segments)
    assert [g.kind for g in segments.middle] == [CZ, CZ]
    assert [g.kind for g in segments.prefix] == [RX, RZ]
    assert len(segments.suffix) == 0
    assert segments.middle_qubits == (0, 1)
    assert segments.middle_indices == (0, 3)


def test_split_rejects_crossing_gates():
    circuit = Circuit(3, (Gate(CZ, (1, 2)), Gate(RX, (0,), 0.4)))
    result = split(circuit, Window(0, 1, 0, 0))
    assert isinstance(result, Rejected)
    assert "crosses" in result.reason


def test_split_rejects_windows_off_the_grid(fig2_circuit):
    assert isinstance(split(fig2_circuit, Window(0, 4, 0, 0)), Rejected)
    assert isinstance(split(fig2_circuit, Window(0, 1, 1, 2)), Rejected)


def test_shrink_window_moves_slot_edges_around_the_anchor():
    circuit = Circuit(3, (Gate(CZ, (1, 2)), Gate(CZ, (0, 1)), Gate(CZ, (0, 1)), Gate(CZ, (1, 2))))
    layout = schedule(circuit)
    assert isinstance(split(circuit, Window(0, 1, 0, 3), layout), Rejected)
    assert shrink_window(circuit, layout, Window(0, 1, 0, 3), 1) == Window(0, 1, 1, 2)


def test_shrink_window_moves_row_edges_and_covers_the_anchor():
    circuit = Circuit(4, (Gate(CZ, (2, 3)), Gate(RX, (0,), 0.1)))
    layout = schedule(circuit)
    assert shrink_window(circuit, layout, Window(1, 2, 0, 0), 1) == Window(0, 1, 0, 0)


def test_shrink_window_gives_up_when_the_anchor_slot_is_crossed():
    circuit = Circuit(4, (Gate(CZ, (0, 2)), Gate(CZ, (1, 3))))
    assert shrink_window(circuit, schedule(circuit), Window(0, 2, 0, 0), 0) is None


def test_splice_with_empty_middle_removes_cancelling_pair(fig2_circuit):
    segments = split(fig2_circuit, Window(0, 1, 0, 1))
    shorter = splice(segments, Circuit(2))
    assert len(shorter) == 2
    assert equal_up_to_phase(circuit_unitary(shorter), circuit_unitary(fig2_circuit))


def test_splice_checks_replacement_width(fig2_circuit):
    segments = split(fig2_circuit, Window(0, 1, 0, 1))
    with pytest.raises(ValueError):
        splice(segments, Circuit(3))


def test_splice_maps_local_wires_back():
    circuit = Circuit(4, (Gate(CZ, (1, 3)), Gate(RX, (0,), 0.3)))
    segments = split_run(circuit, 0, 1)
    assert segments.middle_qubits == (1, 3)
    replaced = splice(segments, Circuit(2, (Gate(CZ, (1, 0)),)))
    assert replaced.gates[0].qubits == (3, 1)


def test_split_run_bounds(fig2_circuit):
    segments = split_run(fig2_circuit, 1, 2)
    assert len(segments.prefix) == 1 and len(segments.middle) == 2 and len(segments.suffix) == 1
    with pytest.raises(ValueError):
        split_run(fig2_circuit, 3, 2)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), data=st.data())
def test_accepted_splits_preserve_the_unitary(seed, data):
    circuit = random_circuit(3, 12, get_gate_set("nisq"), seed)
    layout = schedule(circuit)
    q_lo = data.draw(st.integers(0, 2))
    q_hi = data.draw(st.integers(q_lo, 2))
    t_lo = data.draw(st.integers(0, layout.depth - 1))
    t_hi = data.draw(st.integers(t_lo, layout.depth - 1))
    result = split(circuit, Window(q_lo, q_hi, t_lo, t_hi), layout)
    if isinstance(result, Rejected):
        return
    assert len(result.prefix) + len(result.middle) + len(result.suffix) == len(circuit)
    assert all(q_lo <= q <= q_hi for g in result.middle for q in g.qubits)
    assert np.allclose(circuit_unitary(result.concatenated()), circuit_unitary(circuit), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), data=st.data())
def test_shrunk_windows_always_split(seed, data):
    circuit = random_circuit(4, 16, get_gate_set("nisq"), seed)
    layout = schedule(circuit)
    anchor = data.draw(st.integers(0, len(circuit) - 1))
    q_lo = data.draw(st.integers(0, 3))
    q_hi = data.draw(st.integers(q_lo, 3))
    t_lo = data.draw(st.integers(0, layout.depth - 1))
    t_hi = data.draw(st.integers(t_lo, layout.depth - 1))
    window = shrink_window(circuit, layout, Window(q_lo, q_hi, t_lo, t_hi), anchor)
    if window is None:
        return
    segments = split(circuit, window, layout)
    assert isinstance(segments, Segments)
    assert anchor in segments.middle_indices
