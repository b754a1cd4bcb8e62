"""Counter-based, order-independent random streams.

Every trial owns a Philox-4x64 generator whose 128-bit key is

    key[0] = splitmix64(master_seed ^ splitmix64(stream_id))
    key[1] = trial_index

and whose counter starts at zero.  ``splitmix64`` is the standard finalizer
(constants 0x9E3779B97F4A7C15, 0xBF58476D1CE4E5B9, 0x94D049BB133111EB).
The stream for a trial is therefore a pure function of the triple
(master_seed, stream_id, trial_index), whatever the scheduling.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, replace

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def stream_id_for(name: str) -> int:
    """Stable 64-bit stream id for a textual label (CRC32 fed through splitmix64)."""
    return splitmix64(zlib.crc32(name.encode("utf-8")))


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 0
    stream_id: int = 0
    trial_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id", "trial_index"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value) & MASK64)

    @classmethod
    def coerce(cls, seed: "SeedSpec | int | None") -> "SeedSpec":
        if seed is None:
            return cls()
        if isinstance(seed, SeedSpec):
            return seed
        return cls(master_seed=int(seed))

    def trial(self, i: int) -> "SeedSpec":
        """Seed of the i-th trial relative to this one."""
        return replace(self, trial_index=(self.trial_index + int(i)) & MASK64)

    def stream(self, stream_id: int) -> "SeedSpec":
        return replace(self, stream_id=int(stream_id) & MASK64)

    def key(self) -> tuple[int, int]:
        return splitmix64(self.master_seed ^ splitmix64(self.stream_id)), self.trial_index

    def generator(self) -> np.random.Generator:
        k0, k1 = self.key()
        return np.random.Generator(np.random.Philox(key=[k0, k1], counter=0))
