"""Dispatch configured experiments to the library, one output row per (E, L) point."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

import andersonlab
from andersonlab import cocycle, localization, spectrum
from andersonlab.distributions import median_of_means_stderr
from andersonlab.errors import InsufficientDataError, NoConvergenceError
from andersonlab.harness.config import ExperimentConfig
from andersonlab.harness.io import preflight, write_meta, write_results
from andersonlab.lattice import Box, sample_box_path
from andersonlab.parallel import map_trials
from andersonlab.rng import SeedSpec, stream_id_for

log = logging.getLogger(__name__)

LAMBDA_PILOT_STEPS = 100_000
LAMBDA_PILOT_TRIALS = 10


@dataclass
class ResultRecord:
    experiment: str
    config: dict
    rows: list[dict] = field(default_factory=list)
    wall_clock: float = 0.0
    seeds: list[dict] = field(default_factory=list)
    version: str = andersonlab.__version__
    complete: bool = True


def point_seed(cfg: ExperimentConfig, E: float | None, L: int | None) -> SeedSpec:
    """Seed of one grid point; depends on the point's values, not its grid position."""
    return SeedSpec(cfg.master_seed, stream_id_for(f"{cfg.experiment}|E={E!r}|L={L!r}"))


def _lambda_ref(cfg, E):
    """(value, source) of the Lyapunov reference used by lde-tail and regularity."""
    if cfg.lambda_ref is not None:
        return cfg.lambda_ref, "given"
    p = dict(cfg.dist.params)
    if cfg.dist.kind == "cauchy" and p["gamma"] > 0:
        return cocycle.lloyd_lyapunov(E - p["center"], p["gamma"]), "lloyd-oracle"
    seed = SeedSpec(cfg.master_seed, stream_id_for(f"lambda-ref|E={E!r}"))
    est = cocycle.lyapunov_estimate(cfg.dist, E, LAMBDA_PILOT_STEPS, LAMBDA_PILOT_TRIALS, seed, cfg.workers)
    return est.lambda_hat, "estimate"


def _row(cfg, E, L, seed, estimate, lo, hi, **extra):
    row = {
        "experiment": cfg.experiment,
        "dist": "" if cfg.dist is None else cfg.dist.to_string(),
        "E": E,
        "L": L,
        "trials": cfg.trials,
        "seed": f"{seed.master_seed}:{seed.stream_id}",
        "estimate": estimate,
        "ci_low": lo,
        "ci_high": hi,
    }
    row.update(extra)
    return row


def _lyapunov(cfg, E, L, seed):
    est = cocycle.lyapunov_estimate(cfg.dist, E, cfg.steps, cfg.trials, seed, cfg.workers)
    half = 1.959963984540054 * est.stderr
    return _row(cfg, E, cfg.steps, seed, est.lambda_hat, est.lambda_hat - half, est.lambda_hat + half,
                steps=cfg.steps, stderr=est.stderr)


def _lde_tail(cfg, E, L, seed):
    lam, source = _lambda_ref(cfg, E)
    eps = cfg.eps if cfg.eps is not None else cfg.eps_factor * lam
    te = cocycle.lde_tail(cfg.dist, E, L, eps, lam, cfg.trials, seed, cfg.mode, workers=cfg.workers,
                          lambda_source=source)
    return _row(cfg, E, L, seed, te.point, te.ci_low, te.ci_high, hits=te.hits, eps=eps, lambda_ref=lam,
                lambda_source=source, mode=cfg.mode)


def _wegner(cfg, E, L, seed):
    te = localization.wegner_probability(cfg.dist, E, L, cfg.beta, cfg.trials, seed, cfg.workers)
    return _row(cfg, E, L, seed, te.point, te.ci_low, te.ci_high, hits=te.hits, beta=cfg.beta,
                log_threshold=te.meta["log_threshold"])


def _regularity(cfg, E, L, seed):
    if cfg.m is not None:
        m, source = cfg.m, "given"
    else:
        lam, source = _lambda_ref(cfg, E)
        m = localization.lower_bound_m(lam)
    te = localization.regularity_probability(cfg.dist, E, m, L, cfg.trials, seed, cfg.workers)
    return _row(cfg, E, L, seed, te.point, te.ci_low, te.ci_high, hits=te.hits, m=m, m_source=source)


def _eigenmode_rate(dist, box, E, s):
    H = spectrum.hamiltonian(sample_box_path(dist, box, s), box)
    lam = spectrum.nearest_eigenvalue(H, E)
    try:
        return localization.decay_rate(spectrum.eigenvector(H, lam))
    except (InsufficientDataError, NoConvergenceError):
        return math.nan


def _eigenmodes(cfg, E, L, seed):
    box = Box(0, L)
    rates = np.array(map_trials(lambda s: _eigenmode_rate(cfg.dist, box, E, s), seed, cfg.trials, cfg.workers))
    ok = rates[np.isfinite(rates)]
    mean = float(ok.mean()) if ok.size else math.nan
    se = median_of_means_stderr(ok, min(ok.size, 10)) if ok.size else math.nan
    return _row(cfg, E, L, seed, mean, mean - 1.959963984540054 * se, mean + 1.959963984540054 * se,
                stderr=se, median=float(np.median(ok)) if ok.size else math.nan,
                failures=int(rates.size - ok.size))


def _ids(cfg, E, L, seed):
    s = spectrum.ids_samples(cfg.dist, E, L, cfg.trials, seed, cfg.workers)
    mean = float(s.mean())
    se = float(s.std(ddof=1) / math.sqrt(s.size)) if s.size > 1 else 0.0
    return _row(cfg, E, L, seed, mean, mean - 1.959963984540054 * se, mean + 1.959963984540054 * se, stderr=se)


def _msa(cfg, E, L, seed):
    mp = localization.msa_parameter_suite(cfg.p, cfg.beta, cfg.lambda_min)
    report = ";".join(f"{c.name}:{'ok' if c.satisfied else 'VIOLATED'}:{c.slack!r}" for c in mp.constraint_report)
    return _row(cfg, "", "", seed, mp.identity_lhs(), "", "", trials="", p=mp.p, beta=mp.beta, kappa=mp.kappa, q1=mp.q1,
                q2=mp.q2, eta=mp.eta, p_prime=mp.p_prime, m0=mp.m0, constraints=report,
                violations="|".join(mp.violations()))


DISPATCH = {
    "lyapunov": _lyapunov,
    "lde-tail": _lde_tail,
    "wegner": _wegner,
    "regularity": _regularity,
    "eigenmodes": _eigenmodes,
    "ids": _ids,
    "msa-params": _msa,
}


def grid(cfg: ExperimentConfig) -> list[tuple]:
    if cfg.experiment == "msa-params":
        return [(None, None)]
    if cfg.experiment == "lyapunov":
        return [(E, None) for E in cfg.energies]
    return [(E, L) for E in cfg.energies for L in cfg.lengths]


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ResultRecord:
    """Run every grid point in order; on failure the rows done so far are written, marked incomplete."""
    if write and cfg.out:
        preflight(cfg.out)
    record = ResultRecord(cfg.experiment, cfg.echo())
    start = time.perf_counter()
    fn = DISPATCH[cfg.experiment]
    try:
        for E, L in grid(cfg):
            seed = point_seed(cfg, E, L)
            record.seeds.append({"E": E, "L": L, "master_seed": seed.master_seed, "stream_id": seed.stream_id})
            log.info("running %s at E=%s L=%s", cfg.experiment, E, L)
            record.rows.append(fn(cfg, E, L, seed))
    except BaseException:
        record.complete = False
        raise
    finally:
        record.wall_clock = time.perf_counter() - start
        if write:
            write_results([record], cfg.out, cfg.format)
            write_meta(record, cfg.out)
    return record
