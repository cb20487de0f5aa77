"""
Monte-Carlo execution of an LHVM attack as a finite Bell experiment
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Tuple

import numpy as np

from .bell_core import ch_from_counts
from .config import RNG_ALGORITHM, SIM_CHUNK
from .errors import ValidationError
from .lhv_model import ensemble_bell_value
from .models.distribution import Functional, TrialCounts
from .models.ensemble import LhvEnsemble
from .models.results import SimConfig, SimReport

logger = logging.getLogger(__name__)


def make_rng(seed) -> np.random.Generator:
    """Generator for an integer seed or a SeedSequence."""
    return np.random.Generator(np.random.PCG64(seed))


def _sampling_tables(e: LhvEnsemble) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    weights = e.weights
    if (weights < 0).any() or weights.sum() <= 0:
        raise ValidationError("ensemble weights must be non-negative with a positive sum")
    cumulative = np.cumsum(np.clip(e.inputs_matrix, 0.0, None), axis=1)
    cumulative /= cumulative[:, -1:]
    alice_zero = np.array([[s.a0, s.a1] for s in e.strategies], dtype=bool)
    bob_zero = np.array([[s.b0, s.b1] for s in e.strategies], dtype=bool)
    return weights / weights.sum(), cumulative, alice_zero, bob_zero


def run_trials(cfg: SimConfig, rng: Optional[np.random.Generator] = None) -> TrialCounts:
    """Sample hidden variables, settings and outputs trial by trial.

    Single counts follow setting-only accounting: S_A(0) counts every trial
    with x = 0 where Alice outputs 0, whatever y is.
    """
    if rng is None:
        rng = make_rng(cfg.seed)
    q, cumulative, alice_zero, bob_zero = _sampling_tables(cfg.ensemble)

    n_setting = np.zeros(4, dtype=np.int64)
    coincidences = np.zeros(4, dtype=np.int64)
    singles_a = singles_b = 0
    remaining = cfg.n_trials
    while remaining > 0:
        m = min(remaining, SIM_CHUNK)
        lam = rng.choice(len(q), size=m, p=q)
        u = rng.random(m)
        setting = np.minimum((u[:, None] >= cumulative[lam]).sum(axis=1), 3)
        x, y = setting >> 1, setting & 1
        a0 = alice_zero[lam, x]
        b0 = bob_zero[lam, y]

        n_setting += np.bincount(setting, minlength=4)
        coincidences += np.bincount(setting[a0 & b0], minlength=4)
        singles_a += int(np.count_nonzero(a0 & (x == 0)))
        singles_b += int(np.count_nonzero(b0 & (y == 0)))
        remaining -= m
        logger.debug("simulated %d trials, %d remaining", m, remaining)

    return TrialCounts(
        n_total=cfg.n_trials,
        n_setting=tuple(int(v) for v in n_setting),
        coincidences=tuple(int(v) for v in coincidences),
        singles_a=singles_a,
        singles_b=singles_b,
        n_a0=int(n_setting[0] + n_setting[1]),
        n_b0=int(n_setting[0] + n_setting[2]),
    )


def empirical_ch(counts: TrialCounts) -> Tuple[float, float]:
    """CH estimate and its standard error.

    The six ratios are treated as independent binomial proportions.
    """
    estimate = ch_from_counts(counts)
    pairs = list(zip(counts.coincidences, counts.n_setting)) + [
        (counts.singles_a, counts.n_a0),
        (counts.singles_b, counts.n_b0),
    ]
    variance = 0.0
    for hits, n in pairs:
        p = hits / n
        variance += p * (1.0 - p) / n
    return estimate, math.sqrt(variance)


def simulate(
    cfg: SimConfig, rng: Optional[np.random.Generator] = None, stream: Optional[int] = None
) -> SimReport:
    counts = run_trials(cfg, rng)
    estimate, std_error = empirical_ch(counts)
    exact = ensemble_bell_value(cfg.ensemble, Functional.CH)
    logger.info(
        "simulated %d trials: J = %.6f +- %.6f (exact %.6f)",
        cfg.n_trials,
        estimate,
        std_error,
        exact,
    )
    return SimReport(
        counts=counts,
        j_estimate=estimate,
        std_error=std_error,
        j_exact=exact,
        config=cfg,
        rng=RNG_ALGORITHM,
        stream=stream,
    )


def _simulate_stream(args) -> SimReport:
    cfg, child, index = args
    return simulate(cfg, make_rng(child), stream=index)


def run_batch(
    ensemble: LhvEnsemble,
    n_trials: int,
    seed: int,
    repeats: int,
    workers: Optional[int] = None,
) -> List[SimReport]:
    """Independent runs on child streams spawned from one seed.

    Reports come back in stream order whatever the worker count.
    """
    if repeats < 1:
        raise ValidationError("repeats must be at least 1")
    cfg = SimConfig(n_trials=n_trials, seed=seed, ensemble=ensemble)
    children = np.random.SeedSequence(seed).spawn(repeats)
    jobs = [(cfg, child, i) for i, child in enumerate(children)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_simulate_stream, jobs))
    return [_simulate_stream(job) for job in jobs]
