"""Gate kinds, registry, factory and gate sets"""

import math
import pickle

import numpy as np
import pytest

from config.presets import get_gate_set
from src.gates import CZ, RX, RXX, RY, RZ, GateSet, gate_registry, get_gate_kind
from src.gates.gate_factory import (
    GateKindTemplate, bulk_register_kinds, register_kind_from_config, register_predefined_kinds,
)
from src.gates.gate_set import read_gate_set, write_gate_set
from src.utils.binary_io import BinaryReader, BinaryWriter

from conftest import rotation


@pytest.mark.parametrize("kind,axis", [(RX, "x"), (RY, "y"), (RZ, "z")])
def test_single_qubit_rotations_match_reference(kind, axis):
    for angle in (0.0, 0.3, -1.7, math.pi):
        np.testing.assert_allclose(kind.local_matrix(angle), rotation(axis, angle), atol=1e-12)


def test_rxx_is_exponential_of_xx():
    angle = 0.9
    xx = np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]])
    expected = math.cos(angle / 2) * np.eye(4) - 1j * math.sin(angle / 2) * xx
    np.testing.assert_allclose(RXX.local_matrix(angle), expected, atol=1e-12)


def test_cz_matrix_and_arity():
    np.testing.assert_array_equal(CZ.local_matrix(), np.diag([1, 1, 1, -1]))
    assert CZ.arity == 2 and not CZ.parameterized
    with pytest.raises(ValueError):
        CZ.local_matrix(0.1)


def test_symmetry_is_derived_numerically():
    assert CZ.symmetric
    assert RXX.symmetric
    assert not RX.symmetric


def test_registry_lookup_is_case_insensitive():
    assert get_gate_kind("rx") is RX
    assert "cz" in gate_registry
    with pytest.raises(KeyError):
        get_gate_kind("NOPE")


def test_kinds_unpickle_to_registered_instance():
    assert pickle.loads(pickle.dumps(RZ)) is RZ


def test_factory_registers_rotation_kind():
    assert register_kind_from_config({"name": "RYY", "generator": "YY"})
    ryy = get_gate_kind("RYY")
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    angle = 0.4
    expected = math.cos(angle / 2) * np.eye(4) - 1j * math.sin(angle / 2) * yy
    np.testing.assert_allclose(ryy.local_matrix(angle), expected, atol=1e-12)
    # idempotent for the same definition, refused for another
    assert register_kind_from_config({"name": "RYY", "generator": "YY"})
    assert not register_kind_from_config({"name": "RYY", "generator": "ZZ"})


def test_factory_rejects_bad_configs():
    assert not register_kind_from_config({"name": "BAD"})
    assert not register_kind_from_config({"name": "BAD", "generator": "XYZ"})
    with pytest.raises(ValueError):
        GateKindTemplate.create_rotation_kind("RII", "II")


def test_bulk_and_predefined_registration():
    results = register_predefined_kinds(["RZZ"])
    assert results == {"RZZ": True}
    assert get_gate_kind("RZZ").symmetric
    assert bulk_register_kinds([{"name": "RZX", "generator": "ZX"}]) == {"RZX": True}
    assert not get_gate_kind("RZX").symmetric
    assert register_predefined_kinds(["rzx"]) == {"RZX": True}
    assert set(register_predefined_kinds()) == {"RYY", "RZZ", "RZX"}


def test_presets_define_channel_order():
    nisq = get_gate_set("NISQ")
    assert [k.name for k in nisq.kinds] == ["RX", "RZ", "CZ"]
    assert nisq.channel_index(CZ) == 2
    assert RY not in nisq
    assert get_gate_set("iontrap").max_arity == 2
    with pytest.raises(KeyError):
        get_gate_set("superconducting")


def test_gate_set_validation():
    with pytest.raises(ValueError):
        GateSet("empty", ())
    with pytest.raises(ValueError):
        GateSet("dup", (RX, RX))


def test_gate_set_descriptor_and_binary_form():
    gs = get_gate_set("iontrap")
    assert GateSet.from_descriptor(gs.descriptor()) == gs
    writer = BinaryWriter()
    write_gate_set(writer, gs)
    assert read_gate_set(BinaryReader(writer.getvalue())) == gs
