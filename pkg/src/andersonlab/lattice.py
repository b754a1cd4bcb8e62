"""Potential paths indexed by lattice site, and centered boxes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from andersonlab.distributions import DistributionSpec, sample
from andersonlab.errors import DomainError, PathRangeError
from andersonlab.rng import SeedSpec


@dataclass(frozen=True, eq=False)
class PotentialPath:
    """Values V_n for the sites offset, offset+1, ..., offset+len-1."""

    values: np.ndarray
    offset: int = 0

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise DomainError("a potential path is one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise DomainError("potential values must be finite")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "offset", int(self.offset))

    def __len__(self) -> int:
        return self.values.size

    @property
    def first(self) -> int:
        return self.offset

    @property
    def last(self) -> int:
        return self.offset + self.values.size - 1

    def sites(self, lo: int, hi: int) -> np.ndarray:
        """V_lo..V_hi inclusive (empty when hi < lo)."""
        if hi < lo:
            return self.values[:0]
        if lo < self.first or hi > self.last:
            raise PathRangeError(f"sites [{lo}, {hi}] not covered by path [{self.first}, {self.last}]")
        return self.values[lo - self.offset : hi - self.offset + 1]


def as_path(path) -> PotentialPath:
    if isinstance(path, PotentialPath):
        return path
    return PotentialPath(np.asarray(path, dtype=np.float64))


@dataclass(frozen=True)
class Box:
    """The interval [center - L/2, center + L/2] of L + 1 sites, L even."""

    center: int
    length: int

    def __post_init__(self):
        if self.length <= 0 or self.length % 2:
            raise DomainError(f"box length must be a positive even integer, got {self.length}")

    @property
    def a(self) -> int:
        return self.center - self.length // 2

    @property
    def b(self) -> int:
        return self.center + self.length // 2

    @property
    def size(self) -> int:
        return self.length + 1


def sample_box_path(dist: DistributionSpec, box: Box, seed: SeedSpec | int | None) -> PotentialPath:
    """Fresh i.i.d. potential on exactly the sites of ``box``."""
    return PotentialPath(sample(dist, box.size, seed), offset=box.a)
