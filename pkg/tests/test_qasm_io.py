"""QASM 2.0 subset reader and writer"""

import math

import numpy as np
import pytest

from src.circuits import Circuit, Gate, emit_qasm, parse_qasm, read_qasm_file, write_qasm_file
from src.circuits.qasm_io import evaluate_angle
from src.gates import CZ, RX, RXX, RZ
from src.unitary import circuit_unitary, equal_up_to_phase
from src.utils.errors import QasmParseError

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\n'


def test_parses_native_gates_and_angle_expressions():
    circuit = parse_qasm(HEADER + "rx(pi/2) q[0];\nrz(-pi/4*2) q[1];\ncz q[0],q[2];\nrxx(0.5) q[1],q[2];\n")
    assert circuit.width == 3
    assert [g.kind for g in circuit] == [RX, RZ, CZ, RXX]
    assert circuit[0].angle == pytest.approx(math.pi / 2)
    assert circuit[1].angle == pytest.approx(-math.pi / 2)
    assert circuit[2].qubits == (0, 2)


def test_ignores_comments_and_barriers():
    text = HEADER + "// leading comment\nrx(0.1) q[0]; // trailing\nbarrier q[0],q[1];\n"
    assert len(parse_qasm(text)) == 1


def test_statements_may_span_lines():
    assert len(parse_qasm(HEADER + "cz q[0],\n  q[1];")) == 1


def test_emitted_angles_parse_back_exactly():
    circuit = Circuit(2, (Gate(RX, (0,), 0.1 + 1e-13), Gate(CZ, (1, 0)), Gate(RZ, (1,), -2.718281828459045)))
    assert parse_qasm(emit_qasm(circuit)) == circuit


def test_file_helpers(tmp_path, fig2_circuit):
    path = tmp_path / "fig2.qasm"
    write_qasm_file(fig2_circuit, path)
    assert read_qasm_file(path) == fig2_circuit


H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
TOFFOLI = np.eye(8)
TOFFOLI[6:, 6:] = [[0, 1], [1, 0]]


@pytest.mark.parametrize("statement,width,expected", [
    ("h q[0];", 1, H),
    ("x q[0];", 1, np.array([[0, 1], [1, 0]])),
    ("s q[0];", 1, np.diag([1, 1j])),
    ("tdg q[0];", 1, np.diag([1, np.exp(-1j * math.pi / 4)])),
    ("cx q[0],q[1];", 2, CNOT),
    ("cp(0.8) q[0],q[1];", 2, np.diag([1, 1, 1, np.exp(0.8j)])),
    ("ccx q[0],q[1],q[2];", 3, TOFFOLI),
])
def test_desugared_gates_match_up_to_phase(statement, width, expected):
    circuit = parse_qasm(f'OPENQASM 2.0;\nqreg q[{width}];\n{statement}\n')
    assert equal_up_to_phase(circuit_unitary(circuit), expected.astype(complex))


@pytest.mark.parametrize("body,line", [
    ("creg c[1];", 3),
    ("measure q[0] -> c[0];", 3),
    ("foo q[0];", 3),
    ("rx(0.1) q[5];", 3),
    ("rx(pi/0) q[0];", 3),
    ("rx(bogus) q[0];", 3),
    ("cz q[0],q[0];", 3),
    ("cz q[0];", 3),
    ("rx q[0];", 3),
    ("cz r[0],q[1];", 3),
])
def test_reports_errors_with_line_numbers(body, line):
    with pytest.raises(QasmParseError) as info:
        parse_qasm(f"OPENQASM 2.0;\nqreg q[2];\n{body}\n")
    assert info.value.line == line


@pytest.mark.parametrize("text", [
    "OPENQASM 3.0;\nqreg q[1];\n",
    "OPENQASM 2.0;\nrx(0.1) q[0];\n",
    "OPENQASM 2.0;\n",
    "OPENQASM 2.0;\nqreg q[1];\nrx(0.1) q[0]",
    "OPENQASM 2.0;\nqreg q[1];\nqreg r[1];\n",
])
def test_rejects_malformed_programs(text):
    with pytest.raises(QasmParseError):
        parse_qasm(text)


def test_evaluate_angle():
    assert evaluate_angle("2*pi/3") == pytest.approx(2 * math.pi / 3)
    assert evaluate_angle("-(pi)") == pytest.approx(-math.pi)
    with pytest.raises(QasmParseError):
        evaluate_angle("__import__('os')")
