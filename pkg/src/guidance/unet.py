"""
UNet attention model

Two down blocks, a bottleneck and two up blocks with skip connections,
followed by a 1x1 head and logistic squashing. A block is two 3x3
same-padded convolutions, each followed by leaky rectification, then
dropout while training. Parameters live in float32 in a fixed canonical
order; the forward pass computes in float64.
"""

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.gates import GateSet

from .encoding import channel_count
from .layers import (
    concat_backward, concat_forward, conv2d_backward, conv2d_forward, dropout_mask,
    leaky_relu_backward, leaky_relu_forward, maxpool2x2_backward, maxpool2x2_forward,
    sigmoid, upsample2x_backward, upsample2x_forward,
)

BLOCKS = ("e1", "e2", "b", "d1", "d2")


class ArchitectureConfig(BaseModel):
    base_channels: int = Field(16, ge=1)
    bottleneck_channels: int = Field(32, ge=1)
    leak: float = Field(0.01, ge=0.0, lt=1.0)
    dropout: float = Field(0.1, ge=0.0, lt=1.0)


def block_channels(in_channels: int, arch: ArchitectureConfig) -> Dict[str, Tuple[int, int]]:
    """(input, output) channels per block"""
    f, g = arch.base_channels, arch.bottleneck_channels
    return {"e1": (in_channels, f), "e2": (f, f), "b": (f, g), "d1": (g + f, f), "d2": (f + f, f)}


def parameter_shapes(in_channels: int, arch: ArchitectureConfig) -> "OrderedDict[str, Tuple[int, ...]]":
    """Canonical parameter order: blocks e1, e2, b, d1, d2 (conv1 w, b, conv2 w, b), then head w, b"""
    shapes: "OrderedDict[str, Tuple[int, ...]]" = OrderedDict()
    for name, (cin, cout) in block_channels(in_channels, arch).items():
        shapes[f"{name}.conv1.w"] = (cout, cin, 3, 3)
        shapes[f"{name}.conv1.b"] = (cout,)
        shapes[f"{name}.conv2.w"] = (cout, cout, 3, 3)
        shapes[f"{name}.conv2.b"] = (cout,)
    shapes["head.w"] = (1, arch.base_channels, 1, 1)
    shapes["head.b"] = (1,)
    return shapes


@dataclass
class UNetModel:
    gate_set: GateSet
    architecture: ArchitectureConfig
    params: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)

    @property
    def in_channels(self) -> int:
        return channel_count(self.gate_set)

    @classmethod
    def initialize(cls, gate_set: GateSet, architecture: Optional[ArchitectureConfig] = None,
                   seed: int = 0) -> "UNetModel":
        """He-normal weights, zero biases"""
        architecture = architecture or ArchitectureConfig()
        rng = np.random.default_rng(seed)
        params: "OrderedDict[str, np.ndarray]" = OrderedDict()
        for name, shape in parameter_shapes(channel_count(gate_set), architecture).items():
            if name.endswith(".b"):
                params[name] = np.zeros(shape, dtype=np.float32)
            else:
                fan_in = shape[1] * shape[2] * shape[3]
                params[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in), shape).astype(np.float32)
        return cls(gate_set, architecture, params)

    @classmethod
    def zeros(cls, gate_set: GateSet, architecture: Optional[ArchitectureConfig] = None) -> "UNetModel":
        architecture = architecture or ArchitectureConfig()
        params = OrderedDict((name, np.zeros(shape, dtype=np.float32))
                             for name, shape in parameter_shapes(channel_count(gate_set), architecture).items())
        return cls(gate_set, architecture, params)

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def check_shapes(self) -> List[str]:
        expected = parameter_shapes(self.in_channels, self.architecture)
        problems = [f"missing {name}" for name in expected if name not in self.params]
        problems += [f"{name}: {self.params[name].shape} != {shape}"
                     for name, shape in expected.items()
                     if name in self.params and self.params[name].shape != shape]
        problems += [f"unexpected {name}" for name in self.params if name not in expected]
        return problems

    def _p(self, name: str) -> np.ndarray:
        return np.asarray(self.params[name], dtype=np.float64)

    def _block_forward(self, name: str, x: np.ndarray, training: bool,
                       rng: Optional[np.random.Generator], cache: Optional[dict]) -> np.ndarray:
        leak = self.architecture.leak
        z1 = conv2d_forward(x, self._p(f"{name}.conv1.w"), self._p(f"{name}.conv1.b"))
        a1 = leaky_relu_forward(z1, leak)
        z2 = conv2d_forward(a1, self._p(f"{name}.conv2.w"), self._p(f"{name}.conv2.b"))
        out = leaky_relu_forward(z2, leak)
        mask = None
        if training and self.architecture.dropout > 0.0:
            mask = dropout_mask(out.shape, self.architecture.dropout, rng)
            out = out * mask
        if cache is not None:
            cache[name] = {"x": x, "z1": z1, "a1": a1, "z2": z2, "mask": mask}
        return out

    def _block_backward(self, name: str, cache: dict, grad: np.ndarray,
                        grads: Dict[str, np.ndarray]) -> np.ndarray:
        leak = self.architecture.leak
        c = cache[name]
        if c["mask"] is not None:
            grad = grad * c["mask"]
        grad = leaky_relu_backward(c["z2"], grad, leak)
        grad, grads[f"{name}.conv2.w"], grads[f"{name}.conv2.b"] = \
            conv2d_backward(c["a1"], self._p(f"{name}.conv2.w"), grad)
        grad = leaky_relu_backward(c["z1"], grad, leak)
        grad, grads[f"{name}.conv1.w"], grads[f"{name}.conv1.b"] = \
            conv2d_backward(c["x"], self._p(f"{name}.conv1.w"), grad)
        return grad

    def forward_logits(self, x: np.ndarray, training: bool = False,
                       rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, Optional[dict]]:
        """
        x: (N, C, H, W) or (C, H, W), H and W divisible by 4.
        Returns logits (N, 1, H, W) and, when training, the activation cache.
        """
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 3:
            x = x[None]
        if x.shape[1] != self.in_channels:
            raise ValueError(f"model expects {self.in_channels} channels, got {x.shape[1]}")
        if x.shape[2] % 4 or x.shape[3] % 4:
            raise ValueError(f"spatial shape {x.shape[2:]} must be divisible by 4")
        if training and rng is None:
            rng = np.random.default_rng()
        cache = {} if training else None

        s1 = self._block_forward("e1", x, training, rng, cache)
        p1, arg1 = maxpool2x2_forward(s1)
        s2 = self._block_forward("e2", p1, training, rng, cache)
        p2, arg2 = maxpool2x2_forward(s2)
        bottom = self._block_forward("b", p2, training, rng, cache)
        up1 = upsample2x_forward(bottom)
        d1 = self._block_forward("d1", concat_forward(up1, s2), training, rng, cache)
        up2 = upsample2x_forward(d1)
        d2 = self._block_forward("d2", concat_forward(up2, s1), training, rng, cache)
        logits = conv2d_forward(d2, self._p("head.w"), self._p("head.b"))

        if cache is not None:
            cache.update({"arg1": arg1, "arg2": arg2, "d2_out": d2,
                          "split1": up1.shape[1], "split2": up2.shape[1]})
        return logits, cache

    def forward(self, x: np.ndarray, training: bool = False,
                rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """Attention values in (0, 1), shape (N, H, W)"""
        logits, _ = self.forward_logits(x, training, rng)
        return sigmoid(logits)[:, 0]

    def backward(self, cache: dict, grad_logits: np.ndarray) -> "OrderedDict[str, np.ndarray]":
        """
        Parameter gradients given d(loss)/d(logits) of shape (N, 1, H, W) or (N, H, W).
        Dropout masks are taken from the cache.
        """
        if grad_logits.ndim == 3:
            grad_logits = grad_logits[:, None]
        grads: Dict[str, np.ndarray] = {}

        g, grads["head.w"], grads["head.b"] = conv2d_backward(cache["d2_out"], self._p("head.w"), grad_logits)
        g = self._block_backward("d2", cache, g, grads)
        g_up2, g_s1 = concat_backward(g, cache["split2"])
        g = self._block_backward("d1", cache, upsample2x_backward(g_up2), grads)
        g_up1, g_s2 = concat_backward(g, cache["split1"])
        g = self._block_backward("b", cache, upsample2x_backward(g_up1), grads)
        g = maxpool2x2_backward(g, cache["arg2"]) + g_s2
        g = self._block_backward("e2", cache, g, grads)
        g = maxpool2x2_backward(g, cache["arg1"]) + g_s1
        self._block_backward("e1", cache, g, grads)

        return OrderedDict((name, grads[name]) for name in self.params)
