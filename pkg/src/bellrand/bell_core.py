"""
Bell functionals on observed distributions: CH and CHSH values, no-signaling
checks, the count-based CH estimator and reference distributions
"""

import itertools
import math
from typing import Sequence, Tuple, Union

import numpy as np

from .config import TOL
from .errors import InsufficientTrialsError, ValidationError
from .models.distribution import (
    BITS,
    CHSH_FUNCTIONAL,
    BellFunctional,
    Functional,
    JointConditional,
    SingleCountConvention,
    TrialCounts,
)
from .models.ensemble import DeterministicStrategy

AVERAGE = SingleCountConvention.AVERAGE


# =============================================================================
# Marginals
# =============================================================================


def marginal_a(dist: JointConditional, conv: SingleCountConvention = AVERAGE) -> float:
    """Alice's single-count probability p_A(0) for setting x=0."""
    per_y = dist.table[0, :, 0, :].sum(axis=0)
    return _pick(per_y, conv)


def marginal_b(dist: JointConditional, conv: SingleCountConvention = AVERAGE) -> float:
    """Bob's single-count probability p_B(0) for setting y=0."""
    per_x = dist.table[:, 0, :, 0].sum(axis=0)
    return _pick(per_x, conv)


def _pick(per_other: np.ndarray, conv: SingleCountConvention) -> float:
    conv = SingleCountConvention(conv)
    if conv is SingleCountConvention.OTHER_ZERO:
        return float(per_other[0])
    if conv is SingleCountConvention.OTHER_ONE:
        return float(per_other[1])
    return float(per_other.mean())


# =============================================================================
# Functionals
# =============================================================================


def ch_value(dist: JointConditional, conv: SingleCountConvention = AVERAGE) -> float:
    t = dist.table
    coincidences = t[0, 0, 0, 0] + t[0, 0, 0, 1] + t[0, 0, 1, 0] - t[0, 0, 1, 1]
    return float(coincidences - marginal_a(dist, conv) - marginal_b(dist, conv))


def chsh_value(dist: JointConditional) -> float:
    return float(np.sum(CHSH_FUNCTIONAL.coefficients * dist.table))


def bell_value(
    dist: JointConditional, functional: Union[BellFunctional, Functional, str]
) -> float:
    """Evaluate sum beta(a,b,x,y) p(a,b|x,y) for any linear Bell functional."""
    if not isinstance(functional, BellFunctional):
        functional = Functional(functional).definition
    return float(np.sum(functional.coefficients * dist.table))


def is_no_signaling(dist: JointConditional, tol: float = TOL.probability) -> Tuple[bool, float]:
    """Check that each party's marginal ignores the other's setting.

    Returns (passes, largest marginal discrepancy).
    """
    if tol < 0:
        raise ValidationError("tolerance must be non-negative")
    alice = dist.table.sum(axis=1)  # [a, x, y]
    bob = dist.table.sum(axis=0)  # [b, x, y]
    residual = max(
        float(np.abs(alice[:, :, 0] - alice[:, :, 1]).max()),
        float(np.abs(bob[:, 0, :] - bob[:, 1, :]).max()),
    )
    return residual <= tol, residual


def ch_chsh_residual(dist: JointConditional, conv: SingleCountConvention = AVERAGE) -> float:
    """Distance from the relation J_CH = (J_CHSH - 2) / 4, which holds under no-signaling."""
    return abs(ch_value(dist, conv) - (chsh_value(dist) - 2.0) / 4.0)


# =============================================================================
# Counts
# =============================================================================


def ch_from_counts(counts: TrialCounts) -> float:
    """Six-ratio CH estimator from coincidence and single counts."""
    for i, n in enumerate(counts.n_setting):
        if n == 0:
            raise InsufficientTrialsError((i >> 1, i & 1))
    if counts.n_a0 == 0 or counts.n_b0 == 0:
        raise InsufficientTrialsError((0, 0))
    c, n = counts.coincidences, counts.n_setting
    return (
        c[0] / n[0]
        + c[1] / n[1]
        + c[2] / n[2]
        - c[3] / n[3]
        - counts.singles_a / counts.n_a0
        - counts.singles_b / counts.n_b0
    )


def counts_from_distribution(dist: JointConditional, n_per_setting: int) -> TrialCounts:
    """Counts an experiment with N_AB(x,y) = n_per_setting would ideally record.

    Each count is n * probability rounded to the nearest integer, which is
    exact whenever the products are integral.
    """
    if n_per_setting < 1:
        raise ValidationError("n_per_setting must be positive")
    n = int(n_per_setting)
    coincidences = tuple(
        int(np.rint(n * dist.table[0, 0, x, y])) for x, y in itertools.product(BITS, BITS)
    )
    alice0 = dist.table[0, :, 0, :].sum(axis=0)
    bob0 = dist.table[:, 0, :, 0].sum(axis=0)
    return TrialCounts(
        n_total=4 * n,
        n_setting=(n, n, n, n),
        coincidences=coincidences,
        singles_a=int(sum(np.rint(n * alice0))),
        singles_b=int(sum(np.rint(n * bob0))),
        n_a0=2 * n,
        n_b0=2 * n,
    )


# =============================================================================
# Reference distributions
# =============================================================================


def pr_box() -> JointConditional:
    """Popescu-Rohrlich box: a XOR b = x AND y with probability one."""
    return JointConditional.from_function(lambda a, b, x, y: 0.5 if a ^ b == x * y else 0.0)


def tsirelson_box() -> JointConditional:
    """Correlations reaching the quantum maximum of both functionals."""
    s = 1.0 / math.sqrt(2.0)
    return JointConditional.from_function(
        lambda a, b, x, y: (1.0 + (-1) ** (a + b + x * y) * s) / 4.0
    )


def uniform_noise() -> JointConditional:
    return JointConditional(np.full((2, 2, 2, 2), 0.25))


def deterministic_box(strategy: DeterministicStrategy) -> JointConditional:
    return JointConditional.from_function(
        lambda a, b, x, y: float(a == strategy.output_a(x) and b == strategy.output_b(y))
    )


def mix(dists: Sequence[JointConditional], weights: Sequence[float]) -> JointConditional:
    """Convex combination of distributions."""
    if len(dists) != len(weights) or not dists:
        raise ValidationError("mix needs one weight per distribution")
    w = np.asarray(weights, dtype=float)
    if (w < -TOL.probability).any() or abs(w.sum() - 1.0) > TOL.probability:
        raise ValidationError("mixing weights must be non-negative and sum to 1")
    table = sum(wi * d.table for wi, d in zip(w, dists))
    return JointConditional(table)
