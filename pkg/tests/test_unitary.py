"""Dense unitary semantics"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from config.presets import get_gate_set
from src.circuits import Circuit, Gate, random_circuit
from src.gates import CZ, RX, RXX, RZ, GateSet
from src.unitary import (
    circuit_unitary, compact, equal_up_to_phase, gate_unitary, hilbert_schmidt_distance, is_unitary,
)
from src.utils.errors import ResourceLimitError

from conftest import rotation


def test_qubit_zero_is_most_significant():
    rx = rotation("x", 0.6)
    np.testing.assert_allclose(gate_unitary(Gate(RX, (0,), 0.6), 2), np.kron(rx, np.eye(2)), atol=1e-12)
    np.testing.assert_allclose(gate_unitary(Gate(RX, (1,), 0.6), 2), np.kron(np.eye(2), rx), atol=1e-12)


def test_two_qubit_embedding_skips_middle_wire():
    u = gate_unitary(Gate(CZ, (0, 2)), 3)
    expected = np.diag([1, 1, 1, 1, 1, -1, 1, -1])
    np.testing.assert_allclose(u, expected, atol=1e-12)


def test_symmetric_kinds_ignore_operand_order():
    local = RXX.local_matrix(0.3)
    np.testing.assert_allclose(gate_unitary(Gate(RXX, (1, 0), 0.3), 2), local, atol=1e-12)


def test_circuit_unitary_applies_first_gate_first():
    circuit = Circuit(1, (Gate(RX, (0,), 0.4), Gate(RZ, (0,), 1.1)))
    expected = rotation("z", 1.1) @ rotation("x", 0.4)
    np.testing.assert_allclose(circuit_unitary(circuit), expected, atol=1e-12)


def test_empty_circuit_is_identity():
    np.testing.assert_array_equal(circuit_unitary(Circuit(2)), np.eye(4))


def test_equal_up_to_phase_recovers_phase():
    u = circuit_unitary(random_circuit(2, 6, get_gate_set("nisq"), seed=3))
    match = equal_up_to_phase(np.exp(0.3j) * u, u)
    assert match
    assert match.phase == pytest.approx(0.3)
    assert match.distance < 1e-12


def test_equal_up_to_phase_rejects_different_operators():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.diag([1, -1]).astype(complex)
    match = equal_up_to_phase(x, z)
    assert not match
    assert match.phase is None
    assert hilbert_schmidt_distance(x, z) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        equal_up_to_phase(x, np.eye(4))


def test_explicit_tolerance():
    u = np.eye(2, dtype=complex)
    v = rotation("z", 1e-4)
    assert not equal_up_to_phase(u, v, tol=1e-9)
    assert equal_up_to_phase(u, v, tol=1e-3)


def test_rotation_by_two_pi_is_minus_identity():
    u = circuit_unitary(Circuit(1, (Gate(RX, (0,), 2 * math.pi),)))
    np.testing.assert_allclose(u, -np.eye(2), atol=1e-12)
    assert equal_up_to_phase(u, np.eye(2, dtype=complex))


def test_cap_is_read_from_settings(settings_env):
    settings_env(QOPT_UNITARY_CAP=2)
    with pytest.raises(ResourceLimitError):
        circuit_unitary(Circuit(3))
    with pytest.raises(ResourceLimitError):
        gate_unitary(Gate(RX, (0,), 0.1), 3)


def test_compact_keeps_only_touched_wires():
    sub = Circuit(5, (Gate(CZ, (3, 1)), Gate(RX, (3,), 0.2)))
    block = compact(sub)
    assert block.active == (1, 3)
    assert block.k == 2
    assert block.sub.gates[0].qubits == (1, 0)
    assert block.expand(block.sub, 5) == sub
    with pytest.raises(ValueError):
        compact(Circuit(2))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), width=st.integers(1, 4))
def test_circuit_unitaries_are_unitary(seed, width):
    gs = get_gate_set("iontrap") if width > 1 else GateSet.from_names("single", ["RX", "RZ"])
    u = circuit_unitary(random_circuit(width, 15, gs, seed))
    assert is_unitary(u)
