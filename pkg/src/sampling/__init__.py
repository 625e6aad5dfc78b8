"""Window sampling strategies."""

from .samplers import (
    SamplerLimits, AttentionMap, Proposal, BaseWindowSampler,
    sampler_registry, register_sampler, create_sampler,
    shuffle_commuting, draw_run, draw_anchor,
    sample_1d, sample_2d_uniform, sample_2d_guided, window_around,
)

__all__ = [
    'SamplerLimits', 'AttentionMap', 'Proposal', 'BaseWindowSampler',
    'sampler_registry', 'register_sampler', 'create_sampler',
    'shuffle_commuting', 'draw_run', 'draw_anchor',
    'sample_1d', 'sample_2d_uniform', 'sample_2d_guided', 'window_around',
]
