"""Seeded, counter-based random streams.

Row ``i`` of any draw depends only on ``(seed, stream, i)``: Philox is a
counter-based generator and every sample consumes a fixed number of outputs.
"""
import numpy as np

from .core import InvalidParameterError


def generator(seed: int, stream: int = 0) -> np.random.Generator:
    if int(seed) != seed or seed < 0:
        raise InvalidParameterError(f"seed must be a nonnegative integer, got {seed!r}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def torus_samples(n: int, seed: int, stream: int = 0) -> np.ndarray:
    """``n`` points uniform in ``[0, 1)^2``, shape ``(n, 2)``."""
    return generator(seed, stream).random((int(n), 2))
