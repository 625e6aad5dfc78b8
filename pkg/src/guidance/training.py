"""
Training loop

Samples are bucketed by padded spatial shape so every mini-batch stacks
into one array. Loss is the masked binary cross-entropy over occupied
cells; parameters are updated with Adam.
"""

import csv
import logging
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from src.circuits import schedule
from src.monitoring.logger import (
    start_performance_monitoring, end_performance_monitoring, log_stage_event,
)

from .encoding import encode, occupancy_mask, pad_target
from .layers import masked_bce_with_logits
from .unet import UNetModel

logger = logging.getLogger(__name__)


class TrainConfig(BaseModel):
    batch_size: int = Field(20, ge=1)
    # 0 is accepted and leaves the weights untouched
    learning_rate: float = Field(0.002, ge=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    epsilon: float = Field(1e-8, gt=0.0)
    epochs: int = Field(30, ge=0)
    shuffle: bool = True
    seed: int = 0


@dataclass(frozen=True)
class TrainingExample:
    x: np.ndarray       # C x H x W
    target: np.ndarray  # H x W
    mask: np.ndarray    # H x W

    @property
    def shape(self) -> Tuple[int, int]:
        return self.x.shape[1], self.x.shape[2]


def prepare_examples(samples: Iterable, gate_set) -> List[TrainingExample]:
    """Encode labeled samples (anything with .circuit and .target)"""
    examples = []
    for sample in samples:
        x = encode(sample.circuit, gate_set, schedule(sample.circuit))
        examples.append(TrainingExample(x, pad_target(sample.target, x.shape[1:]), occupancy_mask(x).copy()))
    return examples


class AdamOptimizer:
    """Adam with float64 moment estimates"""

    def __init__(self, params: Dict[str, np.ndarray], config: TrainConfig):
        self.config = config
        self.m = {k: np.zeros(v.shape) for k, v in params.items()}
        self.v = {k: np.zeros(v.shape) for k, v in params.items()}
        self.t = 0

    def step(self, params: "OrderedDict[str, np.ndarray]", grads: Dict[str, np.ndarray]) -> None:
        cfg = self.config
        self.t += 1
        if cfg.learning_rate == 0.0:
            return
        correction1 = 1.0 - cfg.beta1 ** self.t
        correction2 = 1.0 - cfg.beta2 ** self.t
        for name, param in params.items():
            g = grads[name]
            self.m[name] = cfg.beta1 * self.m[name] + (1.0 - cfg.beta1) * g
            self.v[name] = cfg.beta2 * self.v[name] + (1.0 - cfg.beta2) * g * g
            update = cfg.learning_rate * (self.m[name] / correction1) / (np.sqrt(self.v[name] / correction2) + cfg.epsilon)
            params[name] = (param.astype(np.float64) - update).astype(param.dtype)


def make_batches(examples: Sequence[TrainingExample], batch_size: int,
                 rng: np.random.Generator, shuffle: bool) -> List[List[int]]:
    """Same-shape index batches; sample order and batch order shuffled per epoch"""
    order = rng.permutation(len(examples)) if shuffle else np.arange(len(examples))
    buckets: Dict[Tuple[int, int], List[int]] = {}
    for index in order:
        buckets.setdefault(examples[int(index)].shape, []).append(int(index))
    batches = [bucket[i:i + batch_size]
               for bucket in buckets.values() for i in range(0, len(bucket), batch_size)]
    if shuffle:
        batches = [batches[int(i)] for i in rng.permutation(len(batches))]
    return batches


def train_step(model: UNetModel, optimizer: AdamOptimizer, batch: Sequence[TrainingExample],
               rng: np.random.Generator) -> float:
    x = np.stack([e.x for e in batch])
    target = np.stack([e.target for e in batch])[:, None]
    mask = np.stack([e.mask for e in batch])[:, None]
    logits, cache = model.forward_logits(x, training=True, rng=rng)
    loss, grad = masked_bce_with_logits(logits, target, mask)
    optimizer.step(model.params, model.backward(cache, grad))
    return loss


def train(model: UNetModel, examples: Sequence[TrainingExample],
          config: TrainConfig = None) -> Tuple[UNetModel, List[float]]:
    """Train in place; returns (model, per-epoch mean batch loss)"""
    config = config or TrainConfig()
    if not examples:
        raise ValueError("cannot train on an empty dataset")
    channels = {e.x.shape[0] for e in examples}
    if channels != {model.in_channels}:
        raise ValueError(f"examples have {sorted(channels)} channels, model expects {model.in_channels}")

    rng = np.random.default_rng(config.seed)
    optimizer = AdamOptimizer(model.params, config)
    history: List[float] = []
    op_id = start_performance_monitoring("train")
    logger.info(f"🚀 Training on {len(examples)} samples for {config.epochs} epochs "
                f"({model.parameter_count()} parameters)")

    for epoch in range(1, config.epochs + 1):
        losses = [train_step(model, optimizer, [examples[i] for i in batch], rng)
                  for batch in make_batches(examples, config.batch_size, rng, config.shuffle)]
        history.append(float(np.mean(losses)))
        log_stage_event(f"epoch {epoch}", "training", "completed", {"mean_loss": history[-1]})

    end_performance_monitoring(op_id, metadata={"epochs": config.epochs,
                                                "final_loss": history[-1] if history else None})
    return model, history


def write_loss_history(history: Sequence[float], path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["epoch", "mean_loss"])
        for epoch, loss in enumerate(history, start=1):
            writer.writerow([epoch, repr(float(loss))])


def read_loss_history(path: Union[str, Path]) -> List[float]:
    with open(path, newline="") as handle:
        return [float(row["mean_loss"]) for row in csv.DictReader(handle)]
