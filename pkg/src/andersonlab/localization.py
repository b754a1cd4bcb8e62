"""Box regularity, Wegner probabilities, eigenfunction decay and the MSA recipe."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from andersonlab.cocycle import TailEstimate
from andersonlab.distributions import DistributionSpec
from andersonlab.errors import DomainError, InsufficientDataError
from andersonlab.lattice import Box, sample_box_path
from andersonlab.parallel import map_trials
from andersonlab.rng import SeedSpec
from andersonlab.spectrum import (
    TridiagonalHamiltonian,
    greens_entry,
    has_eigenvalue_within,
    spectral_distance,
)


@dataclass(frozen=True)
class RegularityVerdict:
    box: Box
    E: float
    m: float
    left_log: float
    right_log: float
    regular: bool


def is_regular(path, box: Box, E: float, m: float) -> RegularityVerdict:
    """(m, E)-regularity: both boundary |G| at most exp(-m L / 2), and not resonant."""
    if not m > 0:
        raise DomainError("m must be positive")
    right = greens_entry(path, box, E, "right")
    left = greens_entry(path, box, E, "left")
    bound = -m * box.length / 2.0
    regular = not (left.resonant or right.resonant) and left.log_abs <= bound and right.log_abs <= bound
    return RegularityVerdict(box, float(E), float(m), left.log_abs, right.log_abs, bool(regular))


def regularity_probability(
    dist: DistributionSpec,
    E: float,
    m: float,
    L: int,
    trials: int,
    seed: SeedSpec | int | None = None,
    workers: int = 1,
) -> TailEstimate:
    """Fraction of fresh boxes Lambda_L(0) that are (m, E)-regular."""
    box = Box(0, L)

    def one(s):
        return is_regular(sample_box_path(dist, box, s), box, E, m).regular

    flags = map_trials(one, SeedSpec.coerce(seed), trials, workers)
    return TailEstimate.from_counts(sum(flags), trials, {"L": L, "m": m, "E": E})


def wegner_hits(
    dist: DistributionSpec,
    E: float,
    L: int,
    log_thresholds,
    trials: int,
    seed: SeedSpec | int | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Hit counts of {dist(sigma(H_box), E) <= exp(t)} for each log-threshold t, on shared boxes.

    Thresholds are handled in log space; exp(t) is never formed when it would
    underflow the resolution of E.
    """
    box = Box(0, L)
    ts = np.atleast_1d(np.asarray(log_thresholds, dtype=float))

    def one(s):
        H = TridiagonalHamiltonian(sample_box_path(dist, box, s).values, offset=box.a)
        return [_within_log(H, float(E), t) for t in ts]

    rows = map_trials(one, SeedSpec.coerce(seed), trials, workers)
    return np.asarray(rows, dtype=int).reshape(trials, ts.size).sum(axis=0)


def _within_log(H, E, log_t):
    if log_t == math.inf:
        return True
    if log_t < -700.0:
        d = spectral_distance(H, E, tol=0.0)
        return d == 0.0 or math.log(d) <= log_t
    return has_eigenvalue_within(H, E, math.exp(log_t))


def wegner_probability(
    dist: DistributionSpec,
    E: float,
    L: int,
    beta: float,
    trials: int,
    seed: SeedSpec | int | None = None,
    workers: int = 1,
    log_threshold: float | None = None,
) -> TailEstimate:
    """Empirical P[dist(sigma(H_{Lambda_L}), E) <= exp(-L^beta)].

    ``log_threshold`` overrides -L^beta (``math.inf`` gives the full event).
    """
    if trials < 1000:
        raise DomainError("wegner_probability needs trials >= 1000")
    if not 0 < beta < 1:
        raise DomainError("beta must lie in (0, 1)")
    t = -(L**beta) if log_threshold is None else log_threshold
    hits = int(wegner_hits(dist, E, L, [t], trials, seed, workers)[0])
    return TailEstimate.from_counts(hits, trials, {"L": L, "beta": beta, "log_threshold": t})


def decay_rate(v) -> float:
    """Exponential decay rate of |v| away from its peak.

    On each side of the peak, log|v| is fitted linearly against distance over
    the outer half of that side (entries below 1e-300 dropped); sides with
    fewer than 4 usable points are skipped and the remaining slopes averaged.
    """
    v = np.abs(np.asarray(v, dtype=float))
    if v.size < 16:
        raise InsufficientDataError("decay_rate needs at least 16 entries")
    peak = int(np.argmax(v))
    slopes = []
    for side in (v[peak::-1], v[peak:]):
        span = side.size - 1
        dist = np.arange(side.size)
        keep = (dist >= math.ceil(span / 2)) & (dist > 0) & (side >= 1e-300)
        if np.count_nonzero(keep) < 4:
            continue
        slopes.append(np.polyfit(dist[keep], np.log(side[keep]), 1)[0])
    if not slopes:
        raise InsufficientDataError("fewer than 4 usable points on every side of the peak")
    return float(-np.mean(slopes)) + 0.0


# -- MSA parameter recipe ----------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    name: str
    satisfied: bool
    slack: float


@dataclass(frozen=True)
class MsaParams:
    p: float
    beta: float
    kappa: float
    q1: float
    q2: float
    eta: float
    p_prime: float
    m0: float
    constraint_report: tuple[Constraint, ...]

    def violations(self) -> list[str]:
        return [c.name for c in self.constraint_report if not c.satisfied]

    def identity_lhs(self) -> float:
        """1 + eta - eta p' (equals -10 - kappa/2 by construction)."""
        return 1.0 + self.eta - self.eta * self.p_prime


def msa_parameter_suite(p: float, beta: float, lambda_min: float | None = None) -> MsaParams:
    """Parameters of the localization recipe for moment exponent p > 11.

    kappa = min(p - 11, 1/100), q1 = 1 + kappa/16, q2 = 10 + kappa/4,
    eta = (11 + kappa/4) / (11 + kappa/2), p' = (11 + eta + kappa/2) / eta.
    The constraints are evaluated in exact rational arithmetic, so a slack of
    exactly zero on a strict inequality is reported as a violation; nothing is
    adjusted.  m0 is lambda_min / 8 when a Lyapunov lower bound is supplied.
    """
    if not p > 11:
        raise DomainError("the recipe needs p > 11")
    P, B = Fraction(p), Fraction(beta)
    kappa = min(P - 11, Fraction(1, 100))
    q1 = 1 + kappa / 16
    q2 = 10 + kappa / 4
    eta = (11 + kappa / 4) / (11 + kappa / 2)
    pp = (11 + eta + kappa / 2) / eta
    lhs = 1 + eta - eta * pp

    def gt(name, big, small):
        return Constraint(name, big > small, float(big - small))

    report = (
        gt("q1 > 1", q1, 1),
        gt("q2 > 4*q1 + 6", q2, 4 * q1 + 6),
        Constraint("beta in (0,1)", 0 < B < 1, float(min(B, 1 - B))),
        Constraint("eta in (0,beta)", 0 < eta < B, float(min(eta, B - eta))),
        Constraint("p_prime in (1,p)", 1 < pp < P, float(min(pp - 1, P - pp))),
        gt("1 + eta - eta*p_prime < -q2", -q2, lhs),
    )
    m0 = math.nan if lambda_min is None else lambda_min / 8.0
    return MsaParams(
        float(P), float(B), float(kappa), float(q1), float(q2), float(eta), float(pp), m0, report
    )


def lower_bound_m(lambda_hat: float) -> float:
    """Default regularity rate m = lambda_hat / 8, inside the m < lambda_min / 4 window."""
    return lambda_hat / 8.0
