"""Self-supervised attention labels."""

from .dataset_gen import (
    LabelConfig, DatasetConfig, LabeledSample, DatasetFile,
    label_circuit, reducible_gates, generate_sample, generate_dataset,
    write_dataset, read_dataset, split_dataset, DATASET_FORMAT_VERSION,
)

__all__ = [
    'LabelConfig', 'DatasetConfig', 'LabeledSample', 'DatasetFile',
    'label_circuit', 'reducible_gates', 'generate_sample', 'generate_dataset',
    'write_dataset', 'read_dataset', 'split_dataset', 'DATASET_FORMAT_VERSION',
]
