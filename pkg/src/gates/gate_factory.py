"""
Gate Factory - Registering Additional Gate Kinds

This module creates parameterized rotation kinds from configuration
dictionaries so gate sets beyond the presets can be assembled at runtime.
"""

from typing import Dict, Any, List, Optional, Type
import logging

from .gate_registry import GateKind, gate_registry
from .standard_gates import PauliRotationKind

logger = logging.getLogger(__name__)


class GateKindTemplate:
    """Template for creating rotation kinds quickly"""

    @staticmethod
    def create_rotation_kind(name: str, generator: str) -> Type[GateKind]:
        """
        Create a Pauli-rotation kind class dynamically

        Args:
            name: Kind name (e.g. "RYY"); stored upper-case
            generator: Pauli string of length 1 or 2 (e.g. "YY", "ZX")
        """
        generator = generator.upper()
        if not 1 <= len(generator) <= 2:
            raise ValueError(f"{name}: generator must have 1 or 2 Pauli letters, got {generator!r}")
        if set(generator) <= {"I"}:
            raise ValueError(f"{name}: identity generator does not define a gate")

        class DynamicRotationKind(PauliRotationKind):
            def get_name(self) -> str:
                return name

        DynamicRotationKind.generator = generator
        DynamicRotationKind.__name__ = f"{name.upper()}Kind"
        DynamicRotationKind.__qualname__ = f"{name.upper()}Kind"
        return DynamicRotationKind


def register_kind_from_config(config: Dict[str, Any]) -> bool:
    """
    Register a gate kind from a configuration dictionary

    Example config:
    {
        "name": "RYY",
        "generator": "YY"
    }
    """
    for field in ("name", "generator"):
        if field not in config:
            logger.error(f"❌ Missing required field: {field}")
            return False

    try:
        kind_class = GateKindTemplate.create_rotation_kind(config["name"], config["generator"])
        existing = gate_registry.get_kind(config["name"])
        if existing is not None:
            if getattr(existing, "generator", None) == config["generator"].upper():
                return True
            logger.error(f"❌ Gate kind {config['name']} already registered with another definition")
            return False
        gate_registry.register_kind(kind_class())
        logger.info(f"✅ Gate kind registered from config: {config['name'].upper()}")
        return True

    except ValueError as e:
        logger.error(f"❌ Failed to register gate kind from config: {e}")
        return False


def bulk_register_kinds(kinds_config: List[Dict[str, Any]]) -> Dict[str, bool]:
    """Register multiple kinds from a configuration list"""
    results = {}

    for config in kinds_config:
        results[str(config.get("name", "unknown")).upper()] = register_kind_from_config(config)

    successful = sum(1 for success in results.values() if success)
    logger.info(f"📊 Gate kind registration completed: {successful}/{len(results)} kinds registered")
    return results


# Predefined extra rotation kinds, registered on request only
PREDEFINED_KINDS = {
    "RYY": {"name": "RYY", "generator": "YY"},
    "RZZ": {"name": "RZZ", "generator": "ZZ"},
    "RZX": {"name": "RZX", "generator": "ZX"},
}


def register_predefined_kinds(names: Optional[List[str]] = None) -> Dict[str, bool]:
    """Register predefined extra kinds"""
    if names is None:
        names = list(PREDEFINED_KINDS.keys())
    configs = [PREDEFINED_KINDS[n.upper()] for n in names if n.upper() in PREDEFINED_KINDS]
    return bulk_register_kinds(configs)
