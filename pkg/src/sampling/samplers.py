"""
Window Sampler Registry

The three window-selection strategies share one interface so the optimizer
loop never branches on strategy:
  - "1d":     token-chain runs after a few commuting shuffles
  - "2d":     uniform rectangles on the qubit x slot grid
  - "guided": rectangles anchored on cells drawn from an attention map
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Type

import numpy as np
from pydantic import BaseModel, Field

from src.circuits import Circuit, SlotLayout, SplitResult, Window, split, split_run

logger = logging.getLogger(__name__)


class SamplerLimits(BaseModel):
    """Window size limits shared by all strategies"""
    max_qubit_span: int = Field(3, ge=1)
    max_slot_span: int = Field(8, ge=1)
    max_run: int = Field(6, ge=1)
    shuffle_moves: int = Field(3, ge=0)
    attention_floor: float = Field(0.02, ge=0.0)


@dataclass(frozen=True)
class AttentionMap:
    """Per-cell reducibility scores over a qubits x slots grid"""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"attention map must be 2D, got shape {values.shape}")
        if not np.all(np.isfinite(values)) or values.min(initial=0.0) < 0.0 or values.max(initial=0.0) > 1.0:
            raise ValueError("attention values must be finite and inside [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @classmethod
    def constant(cls, width: int, depth: int, value: float = 1.0) -> "AttentionMap":
        return cls(np.full((width, depth), value))

    def fit_to(self, layout: SlotLayout) -> "AttentionMap":
        """Crop or zero-pad to the layout's grid"""
        shape = (layout.width, layout.depth)
        if self.shape == shape:
            return self
        fitted = np.zeros(shape)
        h, w = min(shape[0], self.shape[0]), min(shape[1], self.shape[1])
        fitted[:h, :w] = self.values[:h, :w]
        return AttentionMap(fitted)


def shuffle_commuting(circuit: Circuit, moves: int, rng: np.random.Generator) -> Circuit:
    """Attempt `moves` random adjacent swaps; only qubit-disjoint neighbours are exchanged"""
    if moves <= 0 or len(circuit) < 2:
        return circuit
    gates = list(circuit.gates)
    for _ in range(moves):
        i = int(rng.integers(len(gates) - 1))
        if not gates[i].shares_qubit(gates[i + 1]):
            gates[i], gates[i + 1] = gates[i + 1], gates[i]
    return circuit.with_gates(gates)


def draw_run(length: int, max_run: int, rng: np.random.Generator) -> Tuple[int, int]:
    """(m, n): m uniform over starts admitting a run of 2, n uniform in [2, min(max_run, L-m)]"""
    if length < 1:
        raise ValueError("cannot draw a run from an empty circuit")
    if length == 1 or max_run == 1:
        return int(rng.integers(length)), 1
    m = int(rng.integers(length - 1))
    n = int(rng.integers(2, min(max_run, length - m) + 1))
    return m, n


def sample_1d(circuit: Circuit, limits: SamplerLimits,
              rng: np.random.Generator) -> Tuple[Circuit, int, int]:
    """Shuffle step, then a uniform run on the shuffled gate order"""
    shuffled = shuffle_commuting(circuit, limits.shuffle_moves, rng)
    m, n = draw_run(len(shuffled), limits.max_run, rng)
    return shuffled, m, n


def _span(anchor: int, span: int, size: int, offset: int) -> Tuple[int, int]:
    """Range of `span` cells starting `offset` before the anchor, shifted inside [0, size)"""
    span = min(span, size)
    lo = min(max(anchor - offset, 0), size - span)
    return lo, lo + span - 1


def sample_2d_uniform(layout: SlotLayout, limits: SamplerLimits,
                      rng: np.random.Generator) -> Window:
    if layout.depth < 1:
        raise ValueError("cannot sample a window on an empty layout")
    q_lo = int(rng.integers(layout.width))
    t_lo = int(rng.integers(layout.depth))
    q_span = int(rng.integers(1, limits.max_qubit_span + 1))
    t_span = int(rng.integers(1, limits.max_slot_span + 1))
    return Window(q_lo, min(layout.width - 1, q_lo + q_span - 1),
                  t_lo, min(layout.depth - 1, t_lo + t_span - 1))


def draw_anchor(attention: AttentionMap, floor: float,
                rng: np.random.Generator) -> Tuple[int, int]:
    """Cell drawn with probability proportional to attention + floor"""
    weights = attention.values.reshape(-1) + floor
    cumulative = np.cumsum(weights)
    total = cumulative[-1]
    if total <= 0.0:
        index = int(rng.integers(weights.size))
    else:
        index = int(np.searchsorted(cumulative, rng.random() * total, side="right"))
        index = min(index, weights.size - 1)
    return divmod(index, attention.shape[1])


def sample_2d_guided(layout: SlotLayout, attention: AttentionMap, limits: SamplerLimits,
                     rng: np.random.Generator) -> Window:
    if attention.shape != (layout.width, layout.depth):
        raise ValueError(
            f"attention shape {attention.shape} does not match layout {(layout.width, layout.depth)}")
    return window_around(draw_anchor(attention, limits.attention_floor, rng), layout, limits, rng)


def window_around(cell: Tuple[int, int], layout: SlotLayout, limits: SamplerLimits,
                  rng: np.random.Generator) -> Window:
    """Random-size window containing `cell`, at a uniform offset, shifted inside the grid"""
    qa, ta = cell
    q_span = int(rng.integers(1, limits.max_qubit_span + 1))
    t_span = int(rng.integers(1, limits.max_slot_span + 1))
    q_lo, q_hi = _span(qa, q_span, layout.width, int(rng.integers(min(q_span, layout.width))))
    t_lo, t_hi = _span(ta, t_span, layout.depth, int(rng.integers(min(t_span, layout.depth))))
    return Window(q_lo, q_hi, t_lo, t_hi)


@dataclass(frozen=True)
class Proposal:
    """A candidate cut; `circuit` is the (possibly reordered) circuit it refers to"""
    circuit: Circuit
    window: Window
    segments: SplitResult


class BaseWindowSampler(ABC):
    """Base class for all window sampling strategies"""

    def __init__(self, limits: Optional[SamplerLimits] = None):
        self.limits = limits or SamplerLimits()
        self.strategy_name = self.get_strategy_name()

    @abstractmethod
    def get_strategy_name(self) -> str:
        """Return the strategy name used on the command line"""

    def requires_attention(self) -> bool:
        return False

    @abstractmethod
    def propose(self, circuit: Circuit, layout: SlotLayout, rng: np.random.Generator,
                attention: Optional[AttentionMap] = None) -> Proposal:
        """Draw one candidate cut of a nonempty circuit"""


class SamplerRegistry:
    """Registry for window sampler classes"""

    def __init__(self):
        self._samplers: Dict[str, Type[BaseWindowSampler]] = {}

    def register_sampler(self, name: str, sampler_class: Type[BaseWindowSampler]):
        self._samplers[name] = sampler_class
        logger.debug(f"Registered sampler: {name}")

    def get_sampler_class(self, name: str) -> Optional[Type[BaseWindowSampler]]:
        return self._samplers.get(name)

    def get_all_strategies(self) -> List[str]:
        return list(self._samplers.keys())

    def create(self, name: str, limits: Optional[SamplerLimits] = None) -> BaseWindowSampler:
        sampler_class = self.get_sampler_class(name)
        if sampler_class is None:
            raise ValueError(f"Unknown strategy {name!r}; available: {self.get_all_strategies()}")
        return sampler_class(limits)


sampler_registry = SamplerRegistry()


def register_sampler(name: str):
    """Decorator for registering sampler classes"""
    def decorator(sampler_class: Type[BaseWindowSampler]):
        sampler_registry.register_sampler(name, sampler_class)
        return sampler_class
    return decorator


def create_sampler(name: str, limits: Optional[SamplerLimits] = None) -> BaseWindowSampler:
    return sampler_registry.create(name, limits)


@register_sampler("1d")
class TokenChainSampler(BaseWindowSampler):
    """Runs of consecutive gates in the flat gate order"""

    def get_strategy_name(self) -> str:
        return "1d"

    def propose(self, circuit, layout, rng, attention=None) -> Proposal:
        shuffled, m, n = sample_1d(circuit, self.limits, rng)
        window = Window(0, circuit.width - 1, m, m + n - 1)
        return Proposal(shuffled, window, split_run(shuffled, m, n))


@register_sampler("2d")
class UniformWindowSampler(BaseWindowSampler):

    def get_strategy_name(self) -> str:
        return "2d"

    def propose(self, circuit, layout, rng, attention=None) -> Proposal:
        window = sample_2d_uniform(layout, self.limits, rng)
        return Proposal(circuit, window, split(circuit, window, layout))


@register_sampler("guided")
class GuidedWindowSampler(BaseWindowSampler):
    """Windows anchored on attention-weighted cells"""

    def get_strategy_name(self) -> str:
        return "guided"

    def requires_attention(self) -> bool:
        return True

    def propose(self, circuit, layout, rng, attention=None) -> Proposal:
        if attention is None:
            raise ValueError("guided sampling requires an attention map")
        window = sample_2d_guided(layout, attention.fit_to(layout), self.limits, rng)
        return Proposal(circuit, window, split(circuit, window, layout))
