"""Trial fan-out with schedule-independent results."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from andersonlab.rng import SeedSpec

WORKERS_ENV = "ANDERSONLAB_WORKERS"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def map_trials(fn, seed: SeedSpec, trials: int, workers: int = 1) -> list:
    """[fn(seed.trial(i)) for i in range(trials)], possibly computed concurrently.

    Each trial's randomness depends only on its own seed, and results come back
    in trial-index order, so the output never depends on ``workers``.
    """
    seeds = [seed.trial(i) for i in range(trials)]
    if workers <= 1 or trials <= 1:
        return [fn(s) for s in seeds]
    chunk = max(1, trials // (4 * workers))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds, chunksize=chunk))
