"""Binary framing, settings, presets and monitoring"""

import json

import numpy as np
import pytest

from config.presets import (
    get_available_templates, get_config_template, get_gate_set, merge_with_template,
)
from src.monitoring.logger import EnhancedLogger, PerformanceMonitor, RunMonitor
from src.utils.binary_io import (
    BinaryReader, BinaryWriter, frame, read_framed, unframe, write_framed,
)
from src.utils.errors import ChecksumError, FileFormatError, FormatVersionError


class TestBinaryIO:

    def test_fields_read_back_in_order(self):
        payload = (BinaryWriter().u8(7).u16(513).u32(70000).u64(2 ** 40).f64(-0.25)
                   .text("ψ gate").array(np.arange(3), "<f4").getvalue())
        reader = BinaryReader(payload)
        assert (reader.u8(), reader.u16(), reader.u32(), reader.u64(), reader.f64()) == (7, 513, 70000, 2 ** 40, -0.25)
        assert reader.text() == "ψ gate"
        np.testing.assert_array_equal(reader.array(3, "<f4"), [0.0, 1.0, 2.0])
        assert reader.at_end()

    def test_reads_past_the_end_fail(self):
        with pytest.raises(FileFormatError):
            BinaryReader(b"\x01\x02").u32()

    def test_frame_checks(self):
        data = frame(b"TEST", 3, b"payload")
        assert unframe(data, b"TEST", 3) == b"payload"
        with pytest.raises(FormatVersionError):
            unframe(data, b"TEST", 4)
        with pytest.raises(FileFormatError):
            unframe(data, b"OTHR", 3)
        flipped = bytearray(data)
        flipped[7] ^= 0xFF
        with pytest.raises(ChecksumError):
            unframe(bytes(flipped), b"TEST", 3)
        with pytest.raises(ChecksumError):
            unframe(b"TE", b"TEST", 3)

    def test_framed_files_replace_atomically(self, tmp_path):
        path = tmp_path / "f.bin"
        write_framed(path, b"TEST", 1, b"one")
        write_framed(path, b"TEST", 1, b"two")
        assert read_framed(path, b"TEST", 1) == b"two"
        assert sorted(p.name for p in tmp_path.iterdir()) == ["f.bin"]


class TestSettings:

    def test_defaults(self, settings_env):
        settings = settings_env()
        assert settings.unitary_cap == 12
        assert settings.equivalence_tol == 1e-8
        assert settings.synth_qubit_cap == 3
        assert settings.tolerance_for(8) == pytest.approx(8e-8)

    def test_environment_overrides(self, settings_env):
        settings = settings_env(QOPT_UNITARY_CAP=5, QOPT_EQUIVALENCE_TOL="1e-6", QOPT_WORKERS=0,
                                QOPT_LOG_LEVEL="debug")
        assert settings.unitary_cap == 5
        assert settings.equivalence_tol == 1e-6
        assert settings.workers == 1
        assert settings.log_level == "DEBUG"

    def test_malformed_values_fall_back(self, settings_env):
        settings = settings_env(QOPT_UNITARY_CAP="many", QOPT_EQUIVALENCE_TOL="tight")
        assert settings.unitary_cap == 12
        assert settings.equivalence_tol == 1e-8


class TestPresets:

    def test_gate_sets(self):
        assert [k.name for k in get_gate_set("NISQ").kinds] == ["RX", "RZ", "CZ"]
        assert [k.name for k in get_gate_set("iontrap").kinds] == ["RX", "RY", "RZ", "RXX"]
        with pytest.raises(KeyError):
            get_gate_set("superconducting")

    def test_templates_are_copies(self):
        template = get_config_template("optimize")
        template["seed"] = 99
        assert get_config_template("optimize")["seed"] == 0
        assert get_config_template("optimize", "missing") == get_config_template("optimize")
        assert get_config_template("nowhere") == {}
        assert get_available_templates("train") == ["default", "overfit"]

    def test_merge_keeps_template_for_none(self):
        merged = merge_with_template("db", {"qubits": 1, "depth": None})
        assert merged["qubits"] == 1
        assert merged["depth"] == 3
        assert merge_with_template("optimize", {}, "strict")["verification"] == "every"


class TestMonitoring:

    def test_operation_statistics(self):
        monitor = PerformanceMonitor()
        first = monitor.start_operation("build")
        second = monitor.start_operation("build")
        assert first != second
        monitor.end_operation(first)
        monitor.end_operation(second, success=False, error_message="boom")
        assert monitor.end_operation("build#99") is None
        stats = monitor.get_operation_stats("build")
        assert stats["count"] == 2 and stats["success_count"] == 1
        assert monitor.get_operation_stats("train") == {"operation": "train", "count": 0}
        assert monitor.get_overall_stats()["unique_operations"] == 1

    def test_run_events(self):
        monitor = RunMonitor()
        monitor.end_run()
        assert monitor.events == []
        monitor.start_run("bench", {"circuits": 2})
        monitor.log_stage_event("chunk 0", "dataset", "started")
        monitor.log_stage_event("chunk 0", "dataset", "completed")
        monitor.end_run(success=False, error_message="stopped")
        summary = monitor.get_run_summary()
        assert summary["total_events"] == 4
        assert summary["run_events"] == 2
        assert summary["stage_breakdown"] == {"chunk 0": {"started": 1, "completed": 1, "failed": 0}}
        assert summary["current_run"] is None
        assert monitor.events[-1].status == "failed"

    def test_export_metrics(self, tmp_path):
        log = EnhancedLogger("src.tests.export")
        op = log.performance_monitor.start_operation("train")
        log.performance_monitor.end_operation(op, metadata={"epochs": 2})
        log.run_monitor.start_run("train")
        path = tmp_path / "metrics.json"
        assert log.export_metrics(str(path)) is True
        data = json.loads(path.read_text())
        assert data["performance_metrics"][0]["metadata"] == {"epochs": 2}
        assert data["run_summary"]["current_run"] == "train"
        assert log.export_metrics(str(tmp_path / "missing" / "m.json")) is False
