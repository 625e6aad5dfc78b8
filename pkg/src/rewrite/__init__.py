"""Replacement oracle: rewrite database, local fusion and continuous synthesis."""

from .canonical import canonical_key
from .database import (
    RewriteDB, DBEntry, angle_grid, build_db, lookup, save_db, load_db, verify_entries,
    DB_FORMAT_VERSION,
)
from .peephole import fuse_local, is_zero_angle
from .synthesis import SynthesisConfig, synthesize_shorter
from .replacement import Replacement, find_replacement, lookup_block

__all__ = [
    'canonical_key',
    'RewriteDB', 'DBEntry', 'angle_grid', 'build_db', 'lookup', 'save_db', 'load_db',
    'verify_entries', 'DB_FORMAT_VERSION',
    'fuse_local', 'is_zero_angle',
    'SynthesisConfig', 'synthesize_shorter',
    'Replacement', 'find_replacement', 'lookup_block',
]
