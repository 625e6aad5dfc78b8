"""
Predefined Presets for the Circuit Optimizer
Gate-set presets and named configuration templates for each command
"""

import copy
from typing import Dict, Any, List

from src.gates import GateSet


# GATE SET PRESETS; list order is the one-hot channel order of the encoder
GATE_SET_PRESETS = {
    "nisq": ["RX", "RZ", "CZ"],
    "iontrap": ["RX", "RY", "RZ", "RXX"],
}


# CONFIGURATION TEMPLATES per command
CONFIG_TEMPLATES = {
    "optimize": {
        "default": {
            "strategy": "2d",
            "max_iterations": 2000,
            "verification": "final",
            "seed": 0,
        },
        "strict": {
            "strategy": "2d",
            "max_iterations": 2000,
            "verification": "every",
            "seed": 0,
        },
    },
    "sampler": {
        "default": {
            "max_qubit_span": 3,
            "max_slot_span": 8,
            "max_run": 6,
            "shuffle_moves": 3,
            "attention_floor": 0.02,
        },
    },
    "synthesis": {
        "default": {
            "max_length": 3,
            "restarts": 4,
            "tolerance": 1e-6,
            "evaluation_budget": 2000,
            "seed": 0,
        },
    },
    "train": {
        "default": {
            "batch_size": 20,
            "learning_rate": 0.002,
            "beta1": 0.9,
            "beta2": 0.999,
            "epsilon": 1e-8,
            "epochs": 30,
            "shuffle": True,
            "seed": 0,
        },
        "overfit": {
            "batch_size": 1,
            "learning_rate": 0.002,
            "epochs": 200,
            "shuffle": True,
            "seed": 0,
        },
    },
    "dataset": {
        "default": {
            "count": 2000,
            "width": 8,
            "length": 100,
            "probes": None,
            "anchor_rounds": 2,
            "seed": 0,
            "chunk_size": 100,
        },
    },
    "db": {
        "default": {
            "qubits": 2,
            "depth": 3,
            "angle_steps": 4,
            "max_entries": 5_000_000,
        },
    },
}


def get_gate_set(name: str) -> GateSet:
    """
    Resolve a preset gate set by name

    Args:
        name: "nisq" or "iontrap" (case-insensitive)

    Returns:
        GateSet with the preset kind order
    """
    key = name.lower()
    if key not in GATE_SET_PRESETS:
        raise KeyError(f"Unknown gate set {name!r}; available: {sorted(GATE_SET_PRESETS)}")
    return GateSet.from_names(key, GATE_SET_PRESETS[key])


def get_config_template(section: str, template_name: str = "default") -> Dict[str, Any]:
    """
    Get a configuration template for a command section

    Args:
        section: Template section (optimize, sampler, synthesis, train, dataset, db)
        template_name: Template name; falls back to "default"

    Returns:
        Deep copy of the template dictionary
    """
    if section not in CONFIG_TEMPLATES:
        return {}

    templates = CONFIG_TEMPLATES[section]
    if template_name not in templates:
        template_name = "default"

    return copy.deepcopy(templates.get(template_name, {}))


def get_available_templates(section: str) -> List[str]:
    """List template names for a section"""
    return list(CONFIG_TEMPLATES.get(section, {}).keys())


def merge_with_template(section: str, user_config: Dict[str, Any], template_name: str = "default") -> Dict[str, Any]:
    """
    Merge user configuration with a predefined template

    Keys whose user value is None are left at the template value.
    """
    merged = get_config_template(section, template_name)
    merged.update({k: v for k, v in user_config.items() if v is not None})
    return merged
