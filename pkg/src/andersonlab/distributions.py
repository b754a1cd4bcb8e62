"""Single-site laws with only logarithmic moments, and the log^{p*} calculus.

Distribution strings use the grammar::

    spec   := kind [ "{" [ param ("," param)* ] "}" ]
    param  := name "=" number

e.g. ``cauchy{center=0,gamma=1}``, ``logpareto{p_tail=3}``,
``bernoulli{a=-1,b=1,q=0.5}``.  Missing parameters take the defaults listed in
``KINDS``; whitespace is ignored.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from andersonlab.errors import (
    DomainError,
    EmptyPathError,
    InsufficientDataError,
    UnsupportedError,
)
from andersonlab.rng import SeedSpec

KINDS: dict[str, dict[str, float]] = {
    "bernoulli": {"a": -1.0, "b": 1.0, "q": 0.5},
    "uniform": {"lo": -1.0, "hi": 1.0},
    "cauchy": {"center": 0.0, "gamma": 1.0},
    "logpareto": {"p_tail": 3.0},
    "pointmass": {"value": 0.0},
}

_TWO53 = float(2**53)


@dataclass(frozen=True)
class DistributionSpec:
    """A single-site law.

    ``bernoulli`` puts mass ``q`` on ``b`` and ``1 - q`` on ``a``.
    ``logpareto`` is symmetric with ``P[|X| > x] = (log x)^(-p_tail)`` for
    ``x >= e``; its q-th log-moment is finite iff ``q < p_tail``.
    """

    kind: str
    params: tuple[tuple[str, float], ...] = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown distribution kind {self.kind!r}; expected one of {sorted(KINDS)}")
        merged = dict(KINDS[self.kind])
        for name, value in dict(self.params).items():
            if name not in merged:
                raise DomainError(f"{self.kind} has no parameter {name!r}")
            merged[name] = float(value)
        _validate(self.kind, merged)
        object.__setattr__(self, "params", tuple(sorted(merged.items())))
        if not self.label:
            object.__setattr__(self, "label", self.to_string())

    # constructors
    @classmethod
    def bernoulli(cls, a=-1.0, b=1.0, q=0.5):
        return cls("bernoulli", (("a", a), ("b", b), ("q", q)))

    @classmethod
    def uniform(cls, lo=-1.0, hi=1.0):
        return cls("uniform", (("lo", lo), ("hi", hi)))

    @classmethod
    def cauchy(cls, center=0.0, gamma=1.0):
        return cls("cauchy", (("center", center), ("gamma", gamma)))

    @classmethod
    def logpareto(cls, p_tail=3.0):
        return cls("logpareto", (("p_tail", p_tail),))

    @classmethod
    def pointmass(cls, value=0.0):
        return cls("pointmass", (("value", value),))

    def __getitem__(self, name: str) -> float:
        return dict(self.params)[name]

    @property
    def nontrivial(self) -> bool:
        """True iff the law is not concentrated on a single point."""
        p = dict(self.params)
        if self.kind == "bernoulli":
            return p["a"] != p["b"] and 0.0 < p["q"] < 1.0
        if self.kind == "uniform":
            return p["lo"] < p["hi"]
        if self.kind == "cauchy":
            return p["gamma"] > 0
        return self.kind == "logpareto"

    @property
    def symmetric(self) -> bool:
        """Law invariant under x -> -x."""
        p = dict(self.params)
        if self.kind == "bernoulli":
            return (p["a"] == -p["b"] and p["q"] == 0.5) or (p["a"] == p["b"] == 0.0)
        if self.kind == "uniform":
            return p["lo"] == -p["hi"]
        if self.kind == "cauchy":
            return p["center"] == 0.0
        if self.kind == "pointmass":
            return p["value"] == 0.0
        return True

    def log_moment_finite(self, q: float) -> bool:
        """Whether E[(log+|X|)^q] is finite."""
        if self.kind == "logpareto":
            return q < self["p_tail"]
        return True

    def to_string(self) -> str:
        body = ",".join(f"{k}={_fmt(v)}" for k, v in self.params)
        return f"{self.kind}{{{body}}}"

    def __str__(self) -> str:
        return self.to_string()


def _fmt(v: float) -> str:
    return repr(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(float(v))


def _validate(kind: str, p: dict[str, float]) -> None:
    for name, value in p.items():
        if not math.isfinite(value):
            raise DomainError(f"{kind}.{name} must be finite")
    if kind == "bernoulli" and not 0.0 <= p["q"] <= 1.0:
        raise DomainError("bernoulli.q must lie in [0, 1]")
    if kind == "uniform" and not p["lo"] <= p["hi"]:
        raise DomainError("uniform needs lo <= hi")
    if kind == "cauchy" and not p["gamma"] >= 0:
        raise DomainError("cauchy.gamma must be >= 0")
    if kind == "logpareto" and not p["p_tail"] > 1:
        raise DomainError("logpareto.p_tail must exceed 1")


_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\{(.*)\})?\s*$", re.S)


def parse_distribution(text: str) -> DistributionSpec:
    """Parse ``kind{name=value,...}``; raises DomainError with the offending token."""
    m = _SPEC_RE.match(text)
    if not m:
        raise DomainError(f"malformed distribution string {text!r}")
    kind, body = m.group(1), m.group(2)
    params = []
    if body and body.strip():
        for item in body.split(","):
            if "=" not in item:
                raise DomainError(f"malformed parameter {item.strip()!r} in {text!r}")
            name, value = (s.strip() for s in item.split("=", 1))
            try:
                params.append((name, float(value)))
            except ValueError:
                raise DomainError(f"parameter {name!r} is not a number: {value!r}") from None
    return DistributionSpec(kind, tuple(params))


def _open_uniform(gen: np.random.Generator, n: int) -> np.ndarray:
    # midpoints of the 2^53 dyadic grid: never exactly 0 or 1
    return (gen.integers(0, 2**53, size=n, dtype=np.uint64).astype(np.float64) + 0.5) / _TWO53


def quantile(dist: DistributionSpec, u):
    """Inverse CDF; accepts scalars or arrays with entries in (0, 1)."""
    if dist.kind in ("bernoulli", "pointmass"):
        raise UnsupportedError(f"{dist.kind} is sampled directly and has no quantile function here")
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise DomainError("quantile needs u in (0, 1)")
    p = dict(dist.params)
    if dist.kind == "uniform":
        out = p["lo"] + (p["hi"] - p["lo"]) * arr
    elif dist.kind == "cauchy":
        out = p["center"] + p["gamma"] * np.tan(np.pi * (arr - 0.5))
    else:
        # upper half maps to the positive branch with tail variable w = 2(1-u)
        upper = arr >= 0.5
        w = np.where(upper, 2.0 * (1.0 - arr), 2.0 * arr)
        mag = np.exp(w ** (-1.0 / p["p_tail"]))
        out = np.where(upper, mag, -mag)
    return float(out) if np.ndim(u) == 0 else out


def sample(dist: DistributionSpec, n: int, seed: SeedSpec | int | None = None) -> np.ndarray:
    """n i.i.d. draws, a deterministic function of (dist, n, seed)."""
    if n < 1:
        raise EmptyPathError("sample needs n >= 1")
    return sample_with(dist, n, SeedSpec.coerce(seed).generator())


def sample_with(dist: DistributionSpec, n: int, gen: np.random.Generator) -> np.ndarray:
    p = dict(dist.params)
    if dist.kind == "pointmass":
        return np.full(n, p["value"])
    if dist.kind == "bernoulli":
        return np.where(_open_uniform(gen, n) < p["q"], p["b"], p["a"])
    return quantile(dist, _open_uniform(gen, n))


# -- log^{p*} calculus -------------------------------------------------------

def log_p_star(x, p: float):
    """(log x)^p for x >= e^p, (p/e)^p * x below; vectorized over x."""
    if p < 1:
        raise DomainError("log_p_star needs p >= 1")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("log_p_star needs x >= 0")
    knee = math.exp(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = np.log(np.maximum(arr, knee)) ** p
    out = np.where(arr >= knee, big, (p / math.e) ** p * arr)
    return float(out) if np.ndim(x) == 0 else out


def submultiplicative_constant(p: float) -> float:
    """C_p in log*(xy) <= C_p log*(x) log*(y).

    The package works with C_p = 1, which is valid for p >= e; below that a
    rescaling would be needed and a RuntimeWarning is emitted.
    """
    if p < 1:
        raise DomainError("p must be >= 1")
    if p < math.e:
        warnings.warn(f"C_p = 1 is only guaranteed for p >= e (got p={p})", RuntimeWarning, stacklevel=2)
    return 1.0


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    stderr: float
    batch_means: tuple[float, ...]
    divergence_suspected: bool


def median_of_means_stderr(values: np.ndarray, groups: int = 10) -> float:
    """Robust standard error of the mean of ``values``.

    The sample is cut into ``groups`` contiguous blocks; the spread of the
    block means is measured by 1.4826 * MAD and scaled by 1/sqrt(groups).
    """
    values = np.asarray(values, dtype=float)
    groups = max(1, min(groups, values.size))
    if groups < 2:
        return 0.0
    means = np.array([b.mean() for b in np.array_split(values, groups)])
    mad = np.median(np.abs(means - np.median(means)))
    return float(1.4826 * mad / math.sqrt(groups))


def log_plus_moment_estimate(
    dist: DistributionSpec, p: float, trials: int, seed: SeedSpec | int | None = None, batches: int = 10
) -> MomentEstimate:
    """Monte-Carlo estimate of E[(log+|X|)^p].

    Divergence is suspected when the median of batch means keeps rising as the
    batch size is doubled (a finite mean makes it settle).
    """
    if trials < 100:
        raise InsufficientDataError("log_plus_moment_estimate needs at least 100 trials")
    x = sample(dist, trials, seed)
    with np.errstate(divide="ignore"):
        g = np.maximum(np.log(np.abs(x)), 0.0) ** p
    means = tuple(float(b.mean()) for b in np.array_split(g, batches))
    stderr = median_of_means_stderr(g, batches)
    return MomentEstimate(float(g.mean()), stderr, means, _growth_suspected(g))


def _growth_suspected(g: np.ndarray) -> bool:
    mom = []
    size = 16
    while g.size // size >= 8:
        k = g.size // size
        blocks = g[: k * size].reshape(k, size).mean(axis=1)
        mom.append(float(np.median(blocks)))
        size *= 4
    if len(mom) < 3 or mom[0] <= 0:
        return False
    rising = all(b > a for a, b in zip(mom, mom[1:]))
    return rising and mom[-1] > 1.25 * mom[0]
