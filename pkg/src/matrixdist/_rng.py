"""Counter-based random streams keyed by (seed, replica, label)."""
from __future__ import annotations

import zlib

import numpy as np


def _label_code(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def stream(seed: int, label: str, replica: int = 0) -> np.random.Generator:
    """Return a fresh Philox generator for one named stream.

    Draws from a stream depend only on the key, never on how many values other
    streams consumed, so replicas can be generated in any order.
    """
    if seed < 0 or replica < 0:
        raise ValueError("seed and replica must be nonnegative")
    key = np.random.SeedSequence([int(seed), int(replica), _label_code(label)])
    return np.random.Generator(np.random.Philox(key))


def uniforms(seed: int, label: str, size, replica: int = 0) -> np.ndarray:
    """Uniform draws on [0, 1); prefixes of longer requests agree with shorter ones."""
    return stream(seed, label, replica).random(size)


def derive_seeds(seed: int, count: int) -> list[int]:
    """Independent child seeds, used where an operation needs several base seeds."""
    state = np.random.SeedSequence(int(seed)).generate_state(count, dtype=np.uint32)
    return [int(s) for s in state]
