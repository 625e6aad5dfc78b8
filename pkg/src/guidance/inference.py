"""Inference and attention-quality evaluation."""

import math
from typing import Dict, Iterable

import numpy as np
from scipy.stats import rankdata

from src.circuits import Circuit, schedule
from src.gates import GateSet
from src.sampling import AttentionMap
from src.utils.errors import GateSetMismatchError

from .encoding import encode
from .unet import UNetModel


def infer(model: UNetModel, circuit: Circuit, gate_set: GateSet) -> AttentionMap:
    """Attention over the circuit's qubits x slots grid (padding cropped)"""
    if model.gate_set.descriptor() != gate_set.descriptor():
        raise GateSetMismatchError(
            f"model has {model.in_channels} channels for {model.gate_set.name}, "
            f"run uses {gate_set.name}")
    layout = schedule(circuit)
    values = model.forward(encode(circuit, gate_set, layout), training=False)[0]
    return AttentionMap(np.clip(values[:circuit.width, :layout.depth], 0.0, 1.0))


def ranking_auc(positive: np.ndarray, negative: np.ndarray) -> float:
    """Probability that a random positive outranks a random negative (ties count half)"""
    if positive.size == 0 or negative.size == 0:
        return math.nan
    ranks = rankdata(np.concatenate([positive, negative]))
    n_pos = positive.size
    return float((ranks[:n_pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * negative.size))


def evaluate_attention(model: UNetModel, samples: Iterable, gate_set: GateSet) -> Dict[str, float]:
    """
    Compare attention on labeled-reducible occupied cells with attention on
    the remaining occupied cells.
    """
    positive, negative = [], []
    count = 0
    for sample in samples:
        count += 1
        layout = schedule(sample.circuit)
        attention = infer(model, sample.circuit, gate_set).values
        occupied = layout.occupancy()
        labeled = np.asarray(sample.target) > 0.5
        positive.append(attention[occupied & labeled])
        negative.append(attention[occupied & ~labeled])

    pos = np.concatenate(positive) if positive else np.zeros(0)
    neg = np.concatenate(negative) if negative else np.zeros(0)
    return {
        "samples": count,
        "reducible_cells": int(pos.size),
        "other_cells": int(neg.size),
        "mean_reducible": float(pos.mean()) if pos.size else math.nan,
        "mean_other": float(neg.mean()) if neg.size else math.nan,
        "auc": ranking_auc(pos, neg),
    }
