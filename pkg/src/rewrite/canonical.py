"""
Canonical keys for unitaries.

A unitary is phase-normalized so that its largest-magnitude entry (first
in row-major order among near-ties) becomes real positive, quantized to 6
decimals and hashed to 64 bits. The quantized matrix is kept alongside
the hash so collisions are resolved exactly.
"""

import hashlib
from typing import Tuple

import numpy as np

QUANTIZE_DECIMALS = 6
# Magnitudes within this margin of the maximum count as tied
_TIE_MARGIN = 1e-6


def phase_normalize(u: np.ndarray) -> np.ndarray:
    flat = u.reshape(-1)
    magnitudes = np.abs(flat)
    pivot = int(np.flatnonzero(magnitudes >= magnitudes.max() - _TIE_MARGIN)[0])
    return u * np.exp(-1j * np.angle(flat[pivot]))


def quantize(u: np.ndarray) -> np.ndarray:
    # + 0.0 folds -0.0 into 0.0 so the byte string is canonical
    real = np.round(u.real, QUANTIZE_DECIMALS) + 0.0
    imag = np.round(u.imag, QUANTIZE_DECIMALS) + 0.0
    return real + 1j * imag


def hash_quantized(quantized: np.ndarray) -> int:
    data = np.ascontiguousarray(quantized, dtype=np.complex128).tobytes()
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def canonical_key(u: np.ndarray) -> Tuple[int, np.ndarray]:
    """Return (64-bit key, quantized phase-normalized matrix)"""
    quantized = quantize(phase_normalize(u))
    return hash_quantized(quantized), quantized
