"""Attention model: encoding, UNet, training, persistence and inference."""

from .encoding import encode, channel_count, padded_size, padded_shape, pad_target
from .unet import UNetModel, ArchitectureConfig, parameter_shapes
from .training import (
    TrainConfig, TrainingExample, AdamOptimizer, prepare_examples, train,
    write_loss_history, read_loss_history,
)
from .persistence import save_model, load_model, MODEL_FORMAT_VERSION
from .inference import infer, evaluate_attention, ranking_auc

__all__ = [
    'encode', 'channel_count', 'padded_size', 'padded_shape', 'pad_target',
    'UNetModel', 'ArchitectureConfig', 'parameter_shapes',
    'TrainConfig', 'TrainingExample', 'AdamOptimizer', 'prepare_examples', 'train',
    'write_loss_history', 'read_loss_history',
    'save_model', 'load_model', 'MODEL_FORMAT_VERSION',
    'infer', 'evaluate_attention', 'ranking_auc',
]
