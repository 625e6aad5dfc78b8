"""
OpenQASM 2.0 subset reader/writer

Natively understood: rx, ry, rz, rxx, cz and any registered gate kind by
its lower-case name. Desugared on import (up to global phase):
h, x, y, z, s, sdg, t, tdg, cx, cp/cu1, ccx.
Comments, include lines and barriers are ignored. Classical registers,
measurement, conditionals and gate definitions are rejected.
"""

import ast
import math
import operator
import re
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

from src.gates import gate_registry, RX, RY, RZ, CZ
from src.utils.errors import QasmParseError

from .circuit import Circuit, Gate

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'

_QREG = re.compile(r"^qreg\s+(?P<name>[A-Za-z_]\w*)\s*\[\s*(?P<size>\d+)\s*\]$")
_GATE = re.compile(
    r"^(?P<name>[A-Za-z_]\w*)\s*(?:\((?P<params>[^()]*(?:\([^()]*\)[^()]*)*)\))?\s*(?P<args>.*)$")
_ARG = re.compile(r"^(?P<reg>[A-Za-z_]\w*)\s*\[\s*(?P<index>\d+)\s*\]$")

_UNSUPPORTED = {"creg", "measure", "reset", "if", "gate", "opaque"}

_BINARY_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY_OPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def evaluate_angle(expression: str, line: Optional[int] = None) -> float:
    """Evaluate numeric literals, pi, and + - * / ** combinations of them"""

    def _eval(node):
        if isinstance(node, ast.Expression):
            return _eval(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY_OPS:
            return _BINARY_OPS[type(node.op)](_eval(node.left), _eval(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY_OPS:
            return _UNARY_OPS[type(node.op)](_eval(node.operand))
        raise QasmParseError(f"malformed angle expression {expression!r}", line)

    try:
        tree = ast.parse(expression.strip(), mode="eval")
        value = _eval(tree)
    except (SyntaxError, ZeroDivisionError, OverflowError) as e:
        raise QasmParseError(f"malformed angle expression {expression!r}: {e}", line) from None
    if not math.isfinite(value):
        raise QasmParseError(f"angle expression {expression!r} is not finite", line)
    return value


# Desugaring: (params, qubits) -> gates in application order
Expansion = Callable[[List[float], List[int]], List[Gate]]


def _h(q: int) -> List[Gate]:
    half = math.pi / 2
    return [Gate(RZ, (q,), half), Gate(RX, (q,), half), Gate(RZ, (q,), half)]


def _cx(c: int, t: int) -> List[Gate]:
    return _h(t) + [Gate(CZ, (c, t))] + _h(t)


def _cp(lam: float, a: int, b: int) -> List[Gate]:
    return ([Gate(RZ, (a,), lam / 2), Gate(RZ, (b,), lam / 2)]
            + _cx(a, b) + [Gate(RZ, (b,), -lam / 2)] + _cx(a, b))


def _ccx(a: int, b: int, c: int) -> List[Gate]:
    quarter = math.pi / 4

    def t(q):
        return [Gate(RZ, (q,), quarter)]

    def tdg(q):
        return [Gate(RZ, (q,), -quarter)]

    return (_h(c) + _cx(b, c) + tdg(c) + _cx(a, c) + t(c) + _cx(b, c) + tdg(c)
            + _cx(a, c) + t(b) + t(c) + _h(c) + _cx(a, b) + t(a) + tdg(b) + _cx(a, b))


# name -> (parameter count, qubit count, expansion)
SUGAR: Dict[str, Tuple[int, int, Expansion]] = {
    "h": (0, 1, lambda p, q: _h(q[0])),
    "x": (0, 1, lambda p, q: [Gate(RX, (q[0],), math.pi)]),
    "y": (0, 1, lambda p, q: [Gate(RY, (q[0],), math.pi)]),
    "z": (0, 1, lambda p, q: [Gate(RZ, (q[0],), math.pi)]),
    "s": (0, 1, lambda p, q: [Gate(RZ, (q[0],), math.pi / 2)]),
    "sdg": (0, 1, lambda p, q: [Gate(RZ, (q[0],), -math.pi / 2)]),
    "t": (0, 1, lambda p, q: [Gate(RZ, (q[0],), math.pi / 4)]),
    "tdg": (0, 1, lambda p, q: [Gate(RZ, (q[0],), -math.pi / 4)]),
    "cx": (0, 2, lambda p, q: _cx(q[0], q[1])),
    "cp": (1, 2, lambda p, q: _cp(p[0], q[0], q[1])),
    "cu1": (1, 2, lambda p, q: _cp(p[0], q[0], q[1])),
    "ccx": (0, 3, lambda p, q: _ccx(q[0], q[1], q[2])),
}


def _statements(text: str) -> List[Tuple[str, int]]:
    """Split into ';'-terminated statements tagged with their starting line"""
    statements = []
    buffer: List[str] = []
    start_line = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0]
        while line:
            head, sep, line = line.partition(";")
            if head.strip() and start_line is None:
                start_line = line_no
            buffer.append(head)
            if sep:
                statement = " ".join(part.strip() for part in buffer).strip()
                if statement:
                    statements.append((statement, start_line))
                buffer, start_line = [], None
            else:
                break
    if " ".join(buffer).strip():
        raise QasmParseError("statement is missing its terminating ';'", start_line)
    return statements


def parse_qasm(text: str) -> Circuit:
    """Parse the supported QASM 2.0 subset into a Circuit"""
    register: Optional[Tuple[str, int]] = None
    gates: List[Gate] = []

    for statement, line in _statements(text):
        keyword = statement.split(None, 1)[0].split("(", 1)[0]

        if keyword == "OPENQASM":
            version = statement.split(None, 1)[1].strip() if " " in statement else ""
            if version != "2.0":
                raise QasmParseError(f"unsupported OPENQASM version {version!r}", line)
            continue
        if keyword in ("include", "barrier"):
            continue
        if keyword in _UNSUPPORTED:
            raise QasmParseError(f"unsupported statement {keyword!r}", line)
        if keyword == "qreg":
            match = _QREG.match(statement)
            if not match:
                raise QasmParseError(f"malformed register declaration {statement!r}", line)
            if register is not None:
                raise QasmParseError("only one quantum register is supported", line)
            register = (match.group("name"), int(match.group("size")))
            if register[1] < 1:
                raise QasmParseError("register size must be >= 1", line)
            continue

        if register is None:
            raise QasmParseError("gate used before the qreg declaration", line)
        gates.extend(_parse_gate(statement, register, line))

    if register is None:
        raise QasmParseError("no qreg declaration found")
    return Circuit(register[1], tuple(gates))


def _parse_gate(statement: str, register: Tuple[str, int], line: int) -> List[Gate]:
    match = _GATE.match(statement)
    if not match:
        raise QasmParseError(f"malformed statement {statement!r}", line)
    name = match.group("name").lower()
    params_text = match.group("params")
    params = [evaluate_angle(p, line) for p in params_text.split(",")] if params_text else []

    qubits = []
    for arg in (a.strip() for a in match.group("args").split(",")):
        arg_match = _ARG.match(arg)
        if not arg_match:
            raise QasmParseError(f"malformed qubit argument {arg!r}", line)
        if arg_match.group("reg") != register[0]:
            raise QasmParseError(f"unknown register {arg_match.group('reg')!r}", line)
        index = int(arg_match.group("index"))
        if index >= register[1]:
            raise QasmParseError(f"qubit {index} out of range for {register[0]}[{register[1]}]", line)
        qubits.append(index)
    if len(set(qubits)) != len(qubits):
        raise QasmParseError(f"repeated qubit operand in {statement!r}", line)

    if name in SUGAR:
        n_params, n_qubits, expand = SUGAR[name]
        _check_arity(name, params, qubits, n_params, n_qubits, line)
        return expand(params, qubits)

    kind = gate_registry.get_kind(name)
    if kind is None:
        raise QasmParseError(f"unknown gate {name!r}", line)
    _check_arity(name, params, qubits, 1 if kind.parameterized else 0, kind.arity, line)
    return [Gate(kind, tuple(qubits), params[0] if params else None)]


def _check_arity(name, params, qubits, n_params, n_qubits, line):
    if len(params) != n_params:
        raise QasmParseError(f"{name} takes {n_params} parameter(s), got {len(params)}", line)
    if len(qubits) != n_qubits:
        raise QasmParseError(f"{name} acts on {n_qubits} qubit(s), got {len(qubits)}", line)


def emit_qasm(circuit: Circuit, register: str = "q") -> str:
    """Serialize; angles keep 17 significant digits so parsing is exact"""
    lines = [HEADER, f"qreg {register}[{circuit.width}];\n"]
    for gate in circuit.gates:
        args = ",".join(f"{register}[{q}]" for q in gate.qubits)
        name = gate.kind.qasm_name()
        if gate.angle is None:
            lines.append(f"{name} {args};\n")
        else:
            lines.append(f"{name}({format(gate.angle, '.17g')}) {args};\n")
    return "".join(lines)


def read_qasm_file(path: Union[str, Path]) -> Circuit:
    return parse_qasm(Path(path).read_text(encoding="utf-8"))


def write_qasm_file(circuit: Circuit, path: Union[str, Path]) -> None:
    Path(path).write_text(emit_qasm(circuit), encoding="utf-8")
