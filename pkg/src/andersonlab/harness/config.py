"""Experiment configuration: flat ``key = value`` files plus CLI overrides.

File grammar: one ``key = value`` per line, ``#`` starts a comment, blank
lines are ignored.  List-valued keys (``energy_grid``, ``length_grid``) take
comma-separated numbers.  The distribution is the only nested value, written
in the ``kind{name=value,...}`` form, e.g. ``dist = cauchy{center=0,gamma=1}``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from andersonlab.distributions import DistributionSpec, parse_distribution
from andersonlab.errors import ConfigError, DomainError
from andersonlab.parallel import default_workers

EXPERIMENTS = ("lyapunov", "lde-tail", "wegner", "regularity", "eigenmodes", "ids", "msa-params")

# key -> value parser ("floats"/"ints" are comma lists)
KEYS = {
    "experiment": str,
    "dist": str,
    "energy": float,
    "energy_grid": "floats",
    "length": int,
    "length_grid": "ints",
    "trials": int,
    "steps": int,
    "eps": float,
    "eps_factor": float,
    "lambda_ref": float,
    "mode": str,
    "m": float,
    "beta": float,
    "p": float,
    "lambda_min": float,
    "seed": int,
    "workers": int,
    "out": str,
    "format": str,
}

REQUIRED = {
    "lyapunov": ("dist", "energy", "steps"),
    "lde-tail": ("dist", "energy", "length"),
    "wegner": ("dist", "energy", "length", "beta"),
    "regularity": ("dist", "energy", "length"),
    "eigenmodes": ("dist", "energy", "length"),
    "ids": ("dist", "energy", "length"),
    "msa-params": ("p", "beta"),
}

_COMMON = ("experiment", "seed", "workers", "out", "format")
_GRID = ("dist", "energy", "energy_grid", "length", "length_grid", "trials")
ALLOWED = {
    "lyapunov": _COMMON + ("dist", "energy", "energy_grid", "trials", "steps"),
    "lde-tail": _COMMON + _GRID + ("eps", "eps_factor", "lambda_ref", "mode"),
    "wegner": _COMMON + _GRID + ("beta",),
    "regularity": _COMMON + _GRID + ("m", "lambda_ref"),
    "eigenmodes": _COMMON + _GRID,
    "ids": _COMMON + _GRID,
    "msa-params": _COMMON + ("p", "beta", "lambda_min"),
}

DEFAULT_TRIALS = 10_000


@dataclass
class ExperimentConfig:
    experiment: str
    dist: DistributionSpec | None = None
    energies: list[float] = field(default_factory=list)
    lengths: list[int] = field(default_factory=list)
    trials: int = DEFAULT_TRIALS
    steps: int | None = None
    eps: float | None = None
    eps_factor: float | None = None
    lambda_ref: float | None = None
    mode: str = "norm"
    m: float | None = None
    beta: float | None = None
    p: float | None = None
    lambda_min: float | None = None
    master_seed: int = 0
    workers: int = 1
    out: str | None = None
    format: str = "csv"
    overridden: list[str] = field(default_factory=list)

    def echo(self) -> dict:
        """Plain-data echo; feeding it to ``config_from_echo`` rebuilds this config."""
        d = asdict(self)
        d["dist"] = None if self.dist is None else self.dist.to_string()
        return d


def config_from_echo(echo: dict) -> ExperimentConfig:
    d = dict(echo)
    if d.get("dist") is not None:
        d["dist"] = parse_distribution(d["dist"])
    return ExperimentConfig(**d)


def convert_value(key: str, raw: str, line: int | None = None):
    kind = KEYS[key]
    try:
        if kind == "floats":
            return [float(x) for x in raw.split(",") if x.strip()]
        if kind == "ints":
            return [_int(x) for x in raw.split(",") if x.strip()]
        if kind is int:
            return _int(raw)
        return kind(raw.strip())
    except ValueError:
        raise ConfigError(f"cannot parse {raw.strip()!r}", field=key, line=line) from None


def _int(text: str) -> int:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        f = float(text)  # allows 1e5
        if not f.is_integer():
            raise
        return int(f)


def parse_config_text(text: str) -> dict:
    """Parse a config file body into {key: value}; unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", field=key, line=lineno)
        values[key] = convert_value(key, value, lineno)
    return values


def build_config(file_values: dict, flag_values: dict) -> ExperimentConfig:
    """Merge file and flag values (flags win), validate, and build the config."""
    merged = dict(file_values)
    overridden = sorted(k for k, v in flag_values.items() if v is not None and k in file_values and file_values[k] != v)
    merged.update({k: v for k, v in flag_values.items() if v is not None})

    exp = merged.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown or missing experiment {exp!r}; expected one of {EXPERIMENTS}", field="experiment")

    stray = sorted(k for k in merged if k not in ALLOWED[exp])
    if stray:
        raise ConfigError(f"not used by {exp}", field=stray[0])

    energies = list(merged.get("energy_grid") or [])
    if "energy" in merged and not energies:
        energies = [merged["energy"]]
    lengths = list(merged.get("length_grid") or [])
    if "length" in merged and not lengths:
        lengths = [merged["length"]]

    for req in REQUIRED[exp]:
        present = {
            "energy": bool(energies),
            "length": bool(lengths),
        }.get(req, merged.get(req) is not None)
        if not present:
            flag = {"energy": "--energy/--energy-grid", "length": "--length/--length-grid"}.get(req, "--" + req.replace("_", "-"))
            raise ConfigError(f"{exp} requires {flag}", field=req)

    dist = None
    if merged.get("dist") is not None:
        try:
            dist = parse_distribution(merged["dist"])
        except DomainError as err:
            raise ConfigError(str(err), field="dist") from None

    cfg = ExperimentConfig(
        experiment=exp,
        dist=dist,
        energies=[float(e) for e in energies],
        lengths=[int(n) for n in lengths],
        trials=int(merged.get("trials", DEFAULT_TRIALS)),
        steps=merged.get("steps"),
        eps=merged.get("eps"),
        eps_factor=merged.get("eps_factor"),
        lambda_ref=merged.get("lambda_ref"),
        mode=merged.get("mode", "norm"),
        m=merged.get("m"),
        beta=merged.get("beta"),
        p=merged.get("p"),
        lambda_min=merged.get("lambda_min"),
        master_seed=int(merged.get("seed", 0)),
        workers=int(merged.get("workers") or default_workers()),
        out=merged.get("out"),
        format=merged.get("format", "csv"),
        overridden=overridden,
    )
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.trials < 1:
        raise ConfigError("must be >= 1", field="trials")
    if cfg.workers < 1:
        raise ConfigError("must be >= 1", field="workers")
    if cfg.format not in ("csv", "jsonl"):
        raise ConfigError("must be 'csv' or 'jsonl'", field="format")
    if any(not math.isfinite(e) for e in cfg.energies):
        raise ConfigError("energies must be finite", field="energy")
    exp = cfg.experiment
    if exp in ("wegner", "regularity", "eigenmodes") and any(n <= 0 or n % 2 for n in cfg.lengths):
        raise ConfigError("box lengths must be positive even integers", field="length")
    if exp in ("lde-tail", "ids") and any(n < 10 for n in cfg.lengths):
        raise ConfigError("lengths must be >= 10", field="length")
    if exp == "lyapunov" and cfg.steps < 1000:
        raise ConfigError("must be >= 1000", field="steps")
    if exp == "lde-tail":
        if (cfg.eps is None) == (cfg.eps_factor is None):
            raise ConfigError("give exactly one of --eps or --eps-factor", field="eps")
        if (cfg.eps is not None and cfg.eps <= 0) or (cfg.eps_factor is not None and cfg.eps_factor <= 0):
            raise ConfigError("must be positive", field="eps")
        if cfg.mode not in ("norm", "vector", "entry"):
            raise ConfigError("must be norm, vector or entry", field="mode")
    if exp == "wegner":
        if not 0 < cfg.beta < 1:
            raise ConfigError("must lie in (0, 1)", field="beta")
        if cfg.trials < 1000:
            raise ConfigError("wegner needs at least 1000 trials", field="trials")
    if exp == "regularity" and cfg.m is not None and cfg.m <= 0:
        raise ConfigError("must be positive", field="m")
    if exp == "msa-params":
        if not cfg.p > 11:
            raise ConfigError("the recipe needs p > 11", field="p")
        if not 0 < cfg.beta < 1:
            raise ConfigError("must lie in (0, 1)", field="beta")
