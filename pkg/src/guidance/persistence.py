"""Model weight files (QGNW)."""

import logging
from collections import OrderedDict
from pathlib import Path
from typing import Union

import numpy as np

from src.gates.gate_set import read_gate_set, write_gate_set
from src.utils.binary_io import BinaryReader, BinaryWriter, read_framed, write_framed
from src.utils.errors import FileFormatError

from .encoding import channel_count
from .unet import ArchitectureConfig, UNetModel, parameter_shapes

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"QGNW"
MODEL_FORMAT_VERSION = 1


def save_model(model: UNetModel, path: Union[str, Path]) -> None:
    """
    Layout: gate set, architecture constants, parameter count, then per
    parameter in canonical order: name, rank, dims (u32), float32 data.
    """
    problems = model.check_shapes()
    if problems:
        raise ValueError(f"refusing to save a model with mismatched parameters: {'; '.join(problems)}")
    arch = model.architecture
    writer = BinaryWriter()
    write_gate_set(writer, model.gate_set)
    writer.u16(model.in_channels).u16(arch.base_channels).u16(arch.bottleneck_channels)
    writer.f64(arch.leak).f64(arch.dropout)
    writer.u32(len(model.params))
    for name, value in model.params.items():
        writer.text(name).u8(value.ndim)
        for dim in value.shape:
            writer.u32(dim)
        writer.array(value, "<f4")
    write_framed(path, MODEL_MAGIC, MODEL_FORMAT_VERSION, writer.getvalue())
    logger.info(f"💾 Saved model ({model.parameter_count()} parameters) to {path}")


def load_model(path: Union[str, Path]) -> UNetModel:
    reader = BinaryReader(read_framed(path, MODEL_MAGIC, MODEL_FORMAT_VERSION))
    try:
        gate_set = read_gate_set(reader)
    except KeyError as e:
        raise FileFormatError(f"model uses an unregistered gate kind: {e}") from None
    in_channels = reader.u16()
    if in_channels != channel_count(gate_set):
        raise FileFormatError(f"model declares {in_channels} channels, gate set implies {channel_count(gate_set)}")
    architecture = ArchitectureConfig(base_channels=reader.u16(), bottleneck_channels=reader.u16(),
                                      leak=reader.f64(), dropout=reader.f64())

    expected = parameter_shapes(in_channels, architecture)
    count = reader.u32()
    if count != len(expected):
        raise FileFormatError(f"model stores {count} parameters, architecture needs {len(expected)}")

    params: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for expected_name, expected_shape in expected.items():
        name = reader.text()
        shape = tuple(reader.u32() for _ in range(reader.u8()))
        if name != expected_name or shape != expected_shape:
            raise FileFormatError(f"parameter {name}{shape} does not match {expected_name}{expected_shape}")
        params[name] = reader.array(int(np.prod(shape)), "<f4").astype(np.float32).reshape(shape)
    if not reader.at_end():
        raise FileFormatError("trailing bytes after the last parameter")

    logger.info(f"📂 Loaded {gate_set.name} model from {path}")
    return UNetModel(gate_set, architecture, params)
