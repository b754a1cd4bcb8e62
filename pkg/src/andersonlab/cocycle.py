"""Schrödinger cocycle: transfer-matrix products, Lyapunov exponents, LDE tails.

Site convention: the product over the window (a, b] is
``T_b T_{b-1} ... T_{a+1}`` with one-step matrices ``[[E - V_n, -1], [1, 0]]``.
It maps (psi(a+1), psi(a)) to (psi(b+1), psi(b)) for solutions of H psi = E psi.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from andersonlab import _kernels as K
from andersonlab.distributions import DistributionSpec, median_of_means_stderr, sample
from andersonlab.errors import DomainError, UnsupportedError
from andersonlab.lattice import as_path
from andersonlab.parallel import map_trials
from andersonlab.rng import SeedSpec
from andersonlab.signedlog import SignedLog

WILSON_Z = 1.959963984540054


def one_step(E: float, v: float) -> np.ndarray:
    if not (math.isfinite(E) and math.isfinite(v)):
        raise DomainError("one_step needs finite E and v")
    return np.array([[E - v, -1.0], [1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class ScaledMatrix:
    """The matrix exp(log_scale) * body, with max|body| == 1."""

    body: np.ndarray
    log_scale: float
    log_det_body: float = 0.0
    factors: int = 0

    def log_norm(self) -> float:
        """log of the spectral norm of the represented matrix."""
        b = self.body
        return self.log_scale + math.log(K.op_norm(b[0, 0], b[0, 1], b[1, 0], b[1, 1]))

    def det_defect(self) -> float:
        """|log|det(body)| + 2 log_scale|; zero for an exact SL(2, R) product."""
        return abs(self.log_det_body + 2.0 * self.log_scale)

    def direct_log_abs_det(self) -> float:
        """log|det(body)| evaluated from the entries (only meaningful for short products)."""
        b = self.body
        return math.log(abs(b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0]))

    def to_array(self) -> np.ndarray:
        return math.exp(self.log_scale) * self.body


def _window(E: float, path, a: int, b: int) -> np.ndarray:
    if not math.isfinite(E):
        raise DomainError("energy must be finite")
    if a > b:
        raise UnsupportedError("backward products (a > b) are not supported")
    return as_path(path).sites(a + 1, b)


def scaled_product(E: float, path, a: int, b: int) -> ScaledMatrix:
    """T_{[a,b]} over sites a+1..b, renormalized at every step."""
    v = _window(E, path, a, b)
    m11, m12, m21, m22, ls, ld = K.product(float(E), v)
    return ScaledMatrix(np.array([[m11, m12], [m21, m22]]), ls, ld, v.size)


def product_apply(E: float, path, a: int, b: int, x) -> tuple[SignedLog, np.ndarray]:
    """(||T_{[a,b]} x||, T_{[a,b]} x / ||T_{[a,b]} x||) for a unit vector x."""
    x = np.asarray(x, dtype=float)
    nx = math.hypot(x[0], x[1])
    if nx == 0:
        raise DomainError("product_apply needs a nonzero vector")
    if abs(nx - 1.0) > 1e-12:
        raise DomainError("product_apply needs a unit vector")
    v = _window(E, path, a, b)
    if v.size == 0:
        return SignedLog.one(), x.copy()
    ln, u0, u1 = K.apply(float(E), v, float(x[0]), float(x[1]))
    return SignedLog(1, ln), np.array([u0, u1])


def entry_11_signed_log(E: float, path, a: int, b: int) -> SignedLog:
    """<e1, T_{[a,b]} e1> = det(E - H) restricted to sites a+1..b (1 when a == b)."""
    v = _window(E, path, a, b)
    if v.size == 0:
        return SignedLog.one()
    ln, u0, _ = K.apply(float(E), v, 1.0, 0.0)
    if u0 == 0.0:
        return SignedLog(0, -math.inf)
    return SignedLog(1 if u0 > 0 else -1, ln + math.log(abs(u0)))


# -- Lyapunov exponents ------------------------------------------------------

@dataclass(frozen=True)
class LyapunovEstimate:
    lambda_hat: float
    stderr: float
    steps: int
    trials: int
    degenerate: bool = False

    @property
    def lower(self) -> float:
        return self.lambda_hat - 3.0 * self.stderr


def lloyd_lyapunov(E: float, gamma: float) -> float:
    """Closed-form Lyapunov exponent of the Cauchy (Lloyd) model.

    Re log(z + sqrt(z^2 - 1)) with z = (E + i gamma) / 2; the two branches are
    reciprocal so the absolute value picks the nonnegative one.
    """
    if gamma < 0:
        raise DomainError("gamma must be >= 0")
    if gamma == 0 and abs(E) <= 2:
        raise DomainError("free case inside the band [-2, 2] is excluded")
    z = complex(E, gamma) / 2.0
    return abs(math.log(abs(z + cmath.sqrt(z * z - 1.0))))


def _trial_rate(dist, E, steps, seed):
    v = sample(dist, steps, seed)
    return K.log_norm_product(float(E), v) / steps


def lyapunov_estimate(
    dist: DistributionSpec,
    E: float,
    steps: int,
    trials: int,
    seed: SeedSpec | int | None = None,
    workers: int = 1,
) -> LyapunovEstimate:
    """Mean of (1/steps) log||T_{[0,steps]}|| over independent trials.

    The error bar is a MAD-based median-of-means spread across trials; a
    single trial falls back to ten consecutive blocks of its own path.
    """
    if steps < 1000:
        raise DomainError("lyapunov_estimate needs steps >= 1000")
    if trials < 1:
        raise DomainError("lyapunov_estimate needs trials >= 1")
    seed = SeedSpec.coerce(seed)
    if trials == 1:
        v = sample(dist, steps, seed)
        block = steps // 10
        marks = K.log_norm_blocks(float(E), v, block)
        lam = K.log_norm_product(float(E), v) / steps
        incr = np.diff(np.concatenate(([0.0], marks))) / block
        stderr = median_of_means_stderr(incr, 10)
    else:
        rates = np.array(map_trials(lambda s: _trial_rate(dist, E, steps, s), seed, trials, workers))
        lam = float(rates.mean())
        stderr = median_of_means_stderr(rates, min(trials, 10))
    return LyapunovEstimate(float(lam), float(stderr), steps, trials, degenerate=not dist.nontrivial)


def lambda_min_estimate(
    dist: DistributionSpec,
    energy_grid,
    steps: int,
    trials: int,
    seed: SeedSpec | int | None = None,
    workers: int = 1,
) -> float:
    """min over the grid of lambda_hat - 3 stderr (common random numbers across energies)."""
    grid = np.atleast_1d(np.asarray(energy_grid, dtype=float))
    if grid.size == 0:
        raise DomainError("energy grid is empty")
    return min(lyapunov_estimate(dist, E, steps, trials, seed, workers).lower for E in grid)


# -- large-deviation tails ---------------------------------------------------

@dataclass(frozen=True)
class TailEstimate:
    hits: int
    trials: int
    point: float
    ci_low: float
    ci_high: float
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_counts(cls, hits: int, trials: int, meta: dict | None = None) -> "TailEstimate":
        """Point estimate with the 95% Wilson score interval."""
        if trials < 1 or not 0 <= hits <= trials:
            raise DomainError("need 0 <= hits <= trials, trials >= 1")
        n, p, z2 = trials, hits / trials, WILSON_Z**2
        centre = (p + z2 / (2 * n)) / (1 + z2 / n)
        half = WILSON_Z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n)
        lo = 0.0 if hits == 0 else min(p, max(0.0, centre - half))
        hi = 1.0 if hits == trials else max(p, min(1.0, centre + half))
        return cls(int(hits), int(trials), p, lo, hi, dict(meta or {}))

    @property
    def stderr(self) -> float:
        return math.sqrt(self.point * (1 - self.point) / self.trials)


def _unit(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    r = math.hypot(x[0], x[1])
    if r == 0:
        raise DomainError("zero vector")
    return float(x[0] / r), float(x[1] / r)


def _log_quantity(E, v, mode, x, y):
    if mode == "norm":
        return K.log_norm_product(E, v)
    if mode == "vector":
        return K.apply(E, v, x[0], x[1])[0]
    ln, u0, u1 = K.apply(E, v, y[0], y[1])
    c = x[0] * u0 + x[1] * u1
    return ln + math.log(abs(c)) if c != 0 else -math.inf


def lde_deviations(
    dist: DistributionSpec,
    E: float,
    L: int,
    lambda_ref: float,
    trials: int,
    seed: SeedSpec | int | None = None,
    mode: str = "norm",
    x=(1.0, 0.0),
    y=(1.0, 0.0),
    workers: int = 1,
) -> np.ndarray:
    """Per-trial |log(quantity) - L lambda_ref| for fresh length-L products."""
    if L < 10:
        raise DomainError("lde needs L >= 10")
    if mode not in ("norm", "vector", "entry"):
        raise DomainError(f"unknown mode {mode!r}")
    xu, yu = _unit(x), _unit(y)
    E = float(E)

    def one(s):
        q = _log_quantity(E, sample(dist, L, s), mode, xu, yu)
        return abs(q - L * lambda_ref)

    return np.array(map_trials(one, SeedSpec.coerce(seed), trials, workers))


def lde_tail(
    dist: DistributionSpec,
    E: float,
    L: int,
    eps: float,
    lambda_ref: float,
    trials: int,
    seed: SeedSpec | int | None = None,
    mode: str = "norm",
    x=(1.0, 0.0),
    y=(1.0, 0.0),
    workers: int = 1,
    lambda_source: str = "given",
) -> TailEstimate:
    """Frequency of |log(quantity) - L lambda_ref| > L eps.

    ``mode`` selects the quantity: ``norm`` (||T||), ``vector`` (||T x||) or
    ``entry`` (|<x, T y>|).
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    dev = lde_deviations(dist, E, L, lambda_ref, trials, seed, mode, x, y, workers)
    hits = int(np.count_nonzero(dev > L * eps))
    meta = {"mode": mode, "L": L, "eps": eps, "lambda_ref": lambda_ref, "lambda_source": lambda_source}
    return TailEstimate.from_counts(hits, trials, meta)
