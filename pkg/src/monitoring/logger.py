"""
Logging and Monitoring for the Circuit Optimizer

Every package module logs through logging.getLogger(__name__); the handlers
live on the "src" logger and tag each record with the command currently
running. Long operations (database builds, training, dataset generation,
optimization runs) are timed by the PerformanceMonitor, and stage-level
progress (one DB length, one epoch, one chunk, one bench run) is recorded by
the RunMonitor. Both can be exported as JSON with --metrics-out.
"""

import json
import logging
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from src.utils.settings import get_settings

ROOT_LOGGER_NAME = "src"

STATUS_EMOJI = {"started": "🔄", "completed": "✅", "failed": "❌"}


@dataclass
class OperationTiming:
    operation: str
    started_at: float
    duration: float
    success: bool
    error_message: Optional[str] = None
    metadata: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class RunEvent:
    event_type: str
    timestamp: float
    stage: Optional[str] = None
    status: str = "unknown"
    details: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _duration_stats(durations: List[float]) -> Dict[str, float]:
    values = np.asarray(durations, dtype=np.float64)
    return {
        "total_duration": float(values.sum()),
        "median_duration": float(np.median(values)),
        "max_duration": float(values.max()),
    }


class PerformanceMonitor:
    """Wall-clock timings of named operations; ids are "<operation>#<n>" """

    def __init__(self):
        self.metrics: List[OperationTiming] = []
        self._open: Dict[str, float] = {}
        self._counter = 0

    def start_operation(self, operation: str) -> str:
        self._counter += 1
        operation_id = f"{operation}#{self._counter}"
        self._open[operation_id] = time.perf_counter()
        return operation_id

    def end_operation(self, operation_id: str, success: bool = True,
                      error_message: Optional[str] = None,
                      metadata: Optional[Dict[str, Any]] = None) -> Optional[OperationTiming]:
        log = logging.getLogger(ROOT_LOGGER_NAME)
        started = self._open.pop(operation_id, None)
        if started is None:
            log.warning(f"⚠️ Timer {operation_id} was never started")
            return None

        operation = operation_id.rsplit("#", 1)[0]
        timing = OperationTiming(operation, time.time(), time.perf_counter() - started,
                                 success, error_message, metadata)
        self.metrics.append(timing)
        if success:
            log.debug(f"⏱️ {operation} took {timing.duration:.2f}s")
        else:
            log.error(f"❌ {operation} failed after {timing.duration:.2f}s: {error_message or 'no details'}")
        return timing

    def get_operation_stats(self, operation: str) -> Dict[str, Any]:
        selected = [m for m in self.metrics if m.operation == operation]
        if not selected:
            return {"operation": operation, "count": 0}
        return {
            "operation": operation,
            "count": len(selected),
            "success_count": sum(1 for m in selected if m.success),
            **_duration_stats([m.duration for m in selected]),
        }

    def get_overall_stats(self) -> Dict[str, Any]:
        if not self.metrics:
            return {"total_operations": 0}
        names = sorted({m.operation for m in self.metrics})
        return {
            "total_operations": len(self.metrics),
            "failed_operations": sum(1 for m in self.metrics if not m.success),
            "unique_operations": len(names),
            **_duration_stats([m.duration for m in self.metrics]),
            "by_operation": {name: self.get_operation_stats(name) for name in names},
        }


class RunMonitor:
    """The command being run and the stage events it emits"""

    def __init__(self):
        self.events: List[RunEvent] = []
        self.current_run: Optional[str] = None
        self._run_started: Optional[float] = None

    def start_run(self, run_name: str, details: Optional[Dict[str, Any]] = None):
        self.current_run = run_name
        self._run_started = time.perf_counter()
        self.events.append(RunEvent("run_start", time.time(), status="started",
                                    details={"run_name": run_name, **(details or {})}))
        logging.getLogger(ROOT_LOGGER_NAME).info(f"🚀 {run_name} started")

    def end_run(self, success: bool = True, error_message: Optional[str] = None):
        log = logging.getLogger(ROOT_LOGGER_NAME)
        if self.current_run is None:
            log.warning("⚠️ end_run called with no active run")
            return

        duration = time.perf_counter() - self._run_started
        status = "completed" if success else "failed"
        self.events.append(RunEvent("run_end", time.time(), status=status, details={
            "run_name": self.current_run, "duration": duration, "error_message": error_message}))
        log.info(f"{STATUS_EMOJI[status]} {self.current_run} {status} in {duration:.2f}s")
        self.current_run = None
        self._run_started = None

    def log_stage_event(self, stage: str, event_type: str, status: str,
                        details: Optional[Dict[str, Any]] = None):
        self.events.append(RunEvent(event_type, time.time(), stage, status, details))
        suffix = f" {details}" if details else ""
        logging.getLogger(ROOT_LOGGER_NAME).info(
            f"{STATUS_EMOJI.get(status, 'ℹ️')} {event_type} | {stage}: {status}{suffix}")

    def get_run_summary(self) -> Dict[str, Any]:
        if not self.events:
            return {"total_events": 0}

        breakdown: Dict[str, Dict[str, int]] = {}
        for event in self.events:
            if event.stage is None:
                continue
            counts = breakdown.setdefault(event.stage, dict.fromkeys(STATUS_EMOJI, 0))
            if event.status in counts:
                counts[event.status] += 1
        return {
            "total_events": len(self.events),
            "run_events": sum(1 for e in self.events if e.stage is None),
            "stage_events": sum(1 for e in self.events if e.stage is not None),
            "stage_breakdown": breakdown,
            "current_run": self.current_run,
        }


class _RunTagFilter(logging.Filter):
    """Adds %(run)s: the active command, or "-" outside a run"""

    def __init__(self, run_monitor: RunMonitor):
        super().__init__()
        self.run_monitor = run_monitor

    def filter(self, record: logging.LogRecord) -> bool:
        record.run = self.run_monitor.current_run or "-"
        return True


class EnhancedLogger:
    """Handlers for the package logger plus the two monitors"""

    def __init__(self, name: str, log_file: Optional[str] = None):
        self.logger = logging.getLogger(name)
        self.performance_monitor = PerformanceMonitor()
        self.run_monitor = RunMonitor()
        if not self.logger.handlers:
            self._attach_handlers(log_file)

    def _attach_handlers(self, log_file: Optional[str]):
        settings = get_settings()
        formatter = logging.Formatter("%(asctime)s %(levelname)-7s [%(run)s] %(name)s: %(message)s")
        run_tag = _RunTagFilter(self.run_monitor)

        # StreamHandler defaults to stderr; stdout carries the JSON summary lines
        handlers: List[logging.Handler] = [logging.StreamHandler()]
        if log_file or settings.log_file:
            handlers.append(logging.FileHandler(log_file or settings.log_file))
        for handler in handlers:
            handler.setFormatter(formatter)
            handler.addFilter(run_tag)
            self.logger.addHandler(handler)
        self.set_level(settings.log_level)

    def set_level(self, level: str):
        self.logger.setLevel(getattr(logging, level.upper(), logging.INFO))

    def info(self, message: str):
        self.logger.info(message)

    def warning(self, message: str):
        self.logger.warning(message)

    def error(self, message: str):
        self.logger.error(message)

    def debug(self, message: str):
        self.logger.debug(message)

    def export_metrics(self, file_path: str) -> bool:
        """Timings and run events as one JSON document; False if it cannot be written"""
        payload = {
            "performance_metrics": [m.to_dict() for m in self.performance_monitor.metrics],
            "run_events": [e.to_dict() for e in self.run_monitor.events],
            "performance_summary": self.performance_monitor.get_overall_stats(),
            "run_summary": self.run_monitor.get_run_summary(),
            "exported_at": time.time(),
        }
        try:
            with open(file_path, "w") as handle:
                json.dump(payload, handle, indent=2, default=str)
        except OSError as e:
            self.error(f"❌ Could not export metrics to {file_path}: {e}")
            return False
        self.info(f"📊 Metrics written to {file_path}")
        return True


enhanced_logger = EnhancedLogger(ROOT_LOGGER_NAME)


def get_logger() -> EnhancedLogger:
    return enhanced_logger


def start_performance_monitoring(operation: str) -> str:
    return enhanced_logger.performance_monitor.start_operation(operation)


def end_performance_monitoring(operation_id: str, success: bool = True,
                               error_message: Optional[str] = None,
                               metadata: Optional[Dict[str, Any]] = None) -> Optional[OperationTiming]:
    return enhanced_logger.performance_monitor.end_operation(operation_id, success, error_message, metadata)


def start_run_monitoring(run_name: str, details: Optional[Dict[str, Any]] = None):
    enhanced_logger.run_monitor.start_run(run_name, details)


def end_run_monitoring(success: bool = True, error_message: Optional[str] = None):
    enhanced_logger.run_monitor.end_run(success, error_message)


def log_stage_event(stage: str, event_type: str, status: str,
                    details: Optional[Dict[str, Any]] = None):
    enhanced_logger.run_monitor.log_stage_event(stage, event_type, status, details)
