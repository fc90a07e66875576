"""Counter-based random streams for reproducible, parallel-safe simulation.

Every stream is a Philox generator keyed by (seed, purpose, indices...), so
the numbers a trial block or vertex receives depend only on its key and
never on execution order or worker count.
"""

import hashlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _key_word(part: Key) -> int:
    """Map a key component to a 32-bit word (strings via SHA-256)."""
    if isinstance(part, str):
        return int.from_bytes(hashlib.sha256(part.encode("utf-8")).digest()[:4], "little")
    if part < 0:
        raise ValueError(f"stream key components must be non-negative, got {part}")
    return int(part)


class StreamFactory:
    """Creates independent named streams from one 64-bit seed."""

    def __init__(self, seed: int):
        if not 0 <= seed < 2 ** 64:
            raise ValueError(f"seed must fit in 64 bits, got {seed}")
        self.seed = int(seed)

    def stream(self, *key: Key) -> np.random.Generator:
        """Generator for one named stream.

        Args:
            *key: Purpose string followed by integer indices, e.g.
                ``("vertex", partition, index)`` or ``("block", trial_block)``

        Returns:
            Philox-backed numpy Generator
        """
        sequence = np.random.SeedSequence(self.seed, spawn_key=tuple(_key_word(p) for p in key))
        return np.random.Generator(np.random.Philox(sequence))

    def child_seed(self, *key: Key) -> int:
        """Derive a 64-bit seed for a nested factory."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=tuple(_key_word(p) for p in key))
        return int(sequence.generate_state(1, dtype=np.uint64)[0])
