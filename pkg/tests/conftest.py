"""Shared fixtures"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from config.presets import get_gate_set  # noqa: E402
from src.circuits import Circuit, Gate  # noqa: E402
from src.gates import CZ, RX, RZ  # noqa: E402
from src.rewrite import angle_grid, build_db  # noqa: E402
from src.utils.settings import get_settings  # noqa: E402


@pytest.fixture
def nisq():
    return get_gate_set("nisq")


@pytest.fixture
def iontrap():
    return get_gate_set("iontrap")


@pytest.fixture
def fig2_circuit():
    """CZ(0,1), RX(2), RZ(3), CZ(0,1) on four qubits; the CZ pair cancels"""
    return Circuit(4, (
        Gate(CZ, (0, 1)),
        Gate(RX, (2,), 0.7),
        Gate(RZ, (3,), 1.3),
        Gate(CZ, (0, 1)),
    ))


@pytest.fixture(scope="session")
def nisq_db_q1():
    return build_db(get_gate_set("nisq"), 1, angle_grid(4), depth=3)


@pytest.fixture(scope="session")
def nisq_db_q2():
    return build_db(get_gate_set("nisq"), 2, angle_grid(4), depth=2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def settings_env(monkeypatch):
    """Set QOPT_* variables for one test; settings are re-read before and after"""
    settings = get_settings()

    def apply(**values):
        for key, value in values.items():
            monkeypatch.setenv(key, str(value))
        settings.reload()
        return settings

    yield apply
    monkeypatch.undo()
    settings.reload()


def rotation(axis: str, angle: float) -> np.ndarray:
    """Independent reference matrices for the half-angle rotations"""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[c - 1j * s, 0], [0, c + 1j * s]])
