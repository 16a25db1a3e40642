"""Seeded, label-addressed random streams.

Every random quantity in a run is drawn from a stream named by
``(seed, *labels)``. Within a stream, node ``i`` always reads the same
positions, so a node's randomness does not depend on how many other nodes
exist or in which order they are simulated.
"""

from __future__ import annotations

import zlib

import numpy as np

_TINY = np.nextafter(0.0, 1.0)


def _label_word(label) -> int:
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError(f"integer stream labels must be non-negative, got {label}")
        return int(label)
    return zlib.crc32(str(label).encode("utf-8"))


def stream(seed: int, *labels) -> np.random.Generator:
    """Return a Philox generator keyed by the seed and the stream labels."""
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *(_label_word(x) for x in labels)])
    return np.random.Generator(np.random.Philox(ss))


def open_uniforms(rng: np.random.Generator, size) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    u = rng.random(size)
    u[u == 0.0] = _TINY
    return u


def derive_seed(seed: int, *labels) -> int:
    """A 63-bit child seed for the stream ``(seed, *labels)``."""
    return int(stream(seed, "derive", *labels).integers(0, 2**63 - 1))
