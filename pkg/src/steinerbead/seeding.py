"""Deterministic per-instance random streams.

Experiment rows must be reproducible in isolation, so each row derives its
own 64-bit key from (seed, instanceIndex) with a splitmix64 mix, and that key
seeds a NumPy generator.
"""
from __future__ import annotations

import numpy as np

DEFAULT_SEED = 0xBEAD5EED

_MASK = (1 << 64) - 1


def splitmix64(seed: int, index: int = 0) -> int:
    """Mix (seed, index) into a well-scrambled 64-bit value."""
    z = (seed + 0x9E3779B97F4A7C15 * (index + 1)) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for instance ``index`` under ``seed``."""
    return np.random.default_rng(splitmix64(seed, index))
