"""
Engine Settings
Process-wide knobs read from the environment (and an optional .env file)
"""

import os
import logging
from typing import Optional

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"⚠️ Ignoring non-integer {name}={raw!r}, using {default}")
        return default


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        logger.warning(f"⚠️ Ignoring non-numeric {name}={raw!r}, using {default}")
        return default


class EngineSettings:
    """Settings container with Singleton pattern"""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(EngineSettings, cls).__new__(cls)
        return cls._instance

    def __init__(self):
        # Only initialize once
        if not hasattr(self, "_initialized"):
            self.reload()
            self._initialized = True

    def reload(self) -> None:
        """Re-read every knob from the environment"""
        # Full dense unitaries above this width are refused
        self.unitary_cap: int = _env_int("QOPT_UNITARY_CAP", 12)
        # Phase-equivalence tolerance is this factor times the matrix dimension
        self.equivalence_tol: float = _env_float("QOPT_EQUIVALENCE_TOL", 1e-8)
        self.synth_qubit_cap: int = _env_int("QOPT_SYNTH_QUBIT_CAP", 3)
        self.log_level: str = os.getenv("QOPT_LOG_LEVEL", "INFO").upper()
        self.log_file: Optional[str] = os.getenv("QOPT_LOG_FILE") or None
        self.workers: int = max(1, _env_int("QOPT_WORKERS", 1))

    def tolerance_for(self, dim: int) -> float:
        """Default phase-equivalence tolerance for a dim x dim unitary"""
        return self.equivalence_tol * dim


def get_settings() -> EngineSettings:
    """Get the global settings instance"""
    return EngineSettings()
