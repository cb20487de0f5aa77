"""
Closed-form optimal LHVM values and the attacks that achieve them

Piecewise optima for the CH functional under the four combinations of
no-signaling and factorizable assumptions, the CHSH optima, the symmetric
(delta) forms, the map to the Q = 0 problem, critical thresholds and explicit
achieving ensembles.
"""

import logging
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

from scipy.optimize import brentq

from .config import DEFAULT_GRID_N, TOL
from .errors import ComputationError, ValidationError
from .lhv_model import (
    CH_REDUCED_STRATEGIES,
    CHSH_REDUCED_STRATEGIES,
    ensemble_bell_value,
    symmetrize,
    validate_ensemble,
)
from .models.distribution import Functional
from .models.ensemble import (
    DeterministicStrategy,
    FactorizedInputConditional,
    InputConditional,
    LhvAtom,
    LhvEnsemble,
    RandomnessBounds,
)
from .models.results import BoundResult, ConditionFlags, Rescaling
from .oracle import optimize_factorizable, optimize_general, refine_factorizable

logger = logging.getLogger(__name__)

ANALYTIC = "analytic"
NUMERIC = "numerically constructed"

EDGE = 1e-12

# A region is (label, predicate(P, Q), value(P, Q)); predicates are closed
Region = Tuple[str, Callable[[float, float], bool], Callable[[float, float], float]]

_GENERAL_CH: Sequence[Region] = (
    ("3P+Q≤1", lambda P, Q: 3 * P + Q <= 1 + EDGE, lambda P, Q: 2.5 * (4 * P - 1)),
    ("2P+Q≥3/4", lambda P, Q: 2 * P + Q >= 0.75 - EDGE, lambda P, Q: 1 - 4 * Q),
    (
        "otherwise",
        lambda P, Q: 3 * P + Q >= 1 - EDGE and 2 * P + Q <= 0.75 + EDGE,
        lambda P, Q: 4 * P - 2 * Q - 0.5,
    ),
)
_FACTORIZABLE_CH: Sequence[Region] = (
    ("P+Q≤1/2", lambda P, Q: P + Q <= 0.5 + EDGE, lambda P, Q: 4 * P - 1),
    ("P+Q>1/2", lambda P, Q: P + Q >= 0.5 - EDGE, lambda P, Q: 1 - 4 * Q),
)
_NS_CH: Sequence[Region] = (
    ("3P+Q≤1", lambda P, Q: 3 * P + Q <= 1 + EDGE, lambda P, Q: 6 * P - 1.5),
    ("3P+Q≥1", lambda P, Q: 3 * P + Q >= 1 - EDGE, lambda P, Q: 0.5 - 2 * Q),
)
_NS_FACTORIZABLE_CH: Sequence[Region] = (
    ("P+Q≤1/2", lambda P, Q: P + Q <= 0.5 + EDGE, lambda P, Q: 2 * P - 0.5),
    ("P+Q>1/2", lambda P, Q: P + Q >= 0.5 - EDGE, lambda P, Q: 0.5 - 2 * Q),
)
_GENERAL_CHSH: Sequence[Region] = (
    ("3P+Q≤1", lambda P, Q: 3 * P + Q <= 1 + EDGE, lambda P, Q: 24 * P - 4),
    ("3P+Q≥1", lambda P, Q: 3 * P + Q >= 1 - EDGE, lambda P, Q: 4 - 8 * Q),
)
_FACTORIZABLE_CHSH: Sequence[Region] = (
    ("P+Q≤1/2", lambda P, Q: P + Q <= 0.5 + EDGE, lambda P, Q: 8 * P),
    ("P+Q>1/2", lambda P, Q: P + Q >= 0.5 - EDGE, lambda P, Q: 4 - 8 * Q),
)


def _upper(rb: RandomnessBounds) -> float:
    if rb.is_clamped:
        logger.warning(
            "P = %g is unattainable with Q = %g; using effective P = %g",
            rb.P,
            rb.Q,
            rb.effective_p,
        )
    return rb.effective_p


def _evaluate(
    regions: Sequence[Region],
    rb: RandomnessBounds,
    cond: ConditionFlags,
    functional: Functional,
) -> BoundResult:
    P, Q = _upper(rb), rb.Q
    holding = [r for r in regions if r[1](P, Q)]
    label, _, formula = holding[0]
    return BoundResult(
        value=float(formula(P, Q)),
        branch=label,
        bounds_used=rb,
        condition=cond,
        functional=functional,
        boundary=len(holding) > 1,
    )


# =============================================================================
# Optimal values
# =============================================================================


def ch_bound(cond: ConditionFlags, rb: RandomnessBounds) -> BoundResult:
    """Optimal LHVM value of the CH functional."""
    if cond.no_signaling:
        regions = _NS_FACTORIZABLE_CH if cond.factorizable else _NS_CH
    else:
        regions = _FACTORIZABLE_CH if cond.factorizable else _GENERAL_CH
    return _evaluate(regions, rb, cond, Functional.CH)


def chsh_bound(cond: ConditionFlags, rb: RandomnessBounds) -> BoundResult:
    """Optimal LHVM value of the CHSH functional.

    Only the factorizable flag matters: the optimal CHSH attacks can be made
    no-signaling without loss.
    """
    regions = _FACTORIZABLE_CHSH if cond.factorizable else _GENERAL_CHSH
    return _evaluate(regions, rb, cond, Functional.CHSH)


def optimal_value(
    cond: ConditionFlags, rb: RandomnessBounds, functional: Functional = Functional.CH
) -> BoundResult:
    if Functional(functional) is Functional.CHSH:
        return chsh_bound(cond, rb)
    return ch_bound(cond, rb)


def ch_bound_delta(cond: ConditionFlags, delta: float) -> float:
    """Optimal CH value for P = 1/4 + delta, Q = 1/4 - delta."""
    if not 0.0 <= delta <= 0.25:
        raise ValidationError(f"delta must lie in [0, 1/4], got {delta!r}")
    return 2.0 * delta if cond.no_signaling else 4.0 * delta


def rescale_to_zero_q(
    rb: RandomnessBounds, functional: Functional = Functional.CH
) -> Rescaling:
    """Map (P, Q) to the Q = 0 problem: p' = (p - Q) / (1 - 4Q).

    Values transform as J = (1 - 4Q) J' for CH and (1 - 4Q) J' + 8Q for CHSH.
    At Q = 1/4 only uniform inputs remain and the scale is 0, which returns
    the classical bound.
    """
    P, Q = _upper(rb), rb.Q
    offset = 8.0 * Q if Functional(functional) is Functional.CHSH else 0.0
    scale = 1.0 - 4.0 * Q
    if scale <= TOL.probability:
        logger.debug("Q = 1/4: inputs forced uniform")
        return Rescaling(p_prime=0.25, scale=0.0, offset=offset, degenerate=True)
    return Rescaling(p_prime=min((P - Q) / scale, 1.0), scale=scale, offset=offset)


# =============================================================================
# Critical thresholds
# =============================================================================


class Threshold(str, Enum):
    """Which randomness parameter to solve for"""

    P_AT_SMALL_Q = "P"
    Q_AT_LARGE_P = "Q"
    DELTA = "delta"


def _require(ok: bool, cond: ConditionFlags, which: Threshold, j: float) -> None:
    if not ok:
        raise ValidationError(
            f"target {j:g} is not attainable for {cond.name} ({which.value} threshold)"
        )


def critical_threshold(cond: ConditionFlags, which: Threshold, j_target: float) -> float:
    """Randomness parameter at which the optimal CH value equals j_target.

    P_AT_SMALL_Q solves at Q = 0, Q_AT_LARGE_P on the branch where P no longer
    matters, DELTA on the symmetric family.
    """
    which = Threshold(which)
    j = float(j_target)
    if not 0.0 < j < 1.0:
        raise ValidationError(f"target must lie in (0, 1), got {j!r}")

    if which is Threshold.DELTA:
        if cond.no_signaling:
            _require(j <= 0.5, cond, which, j)
            return j / 2.0
        return j / 4.0

    if which is Threshold.Q_AT_LARGE_P:
        if cond.no_signaling:
            _require(j <= 0.5, cond, which, j)
            return (0.5 - j) / 2.0
        return (1.0 - j) / 4.0

    if cond.no_signaling:
        _require(j <= 0.5, cond, which, j)
        return (j + 0.5) / 2.0 if cond.factorizable else (j + 1.5) / 6.0
    if cond.factorizable:
        return (1.0 + j) / 4.0
    if j <= 5.0 / 6.0:
        return (0.4 * j + 1.0) / 4.0
    return (j + 0.5) / 4.0


def critical_p_for_q(cond: ConditionFlags, Q: float, j_target: float) -> float:
    """Smallest P with ch_bound(cond, P, Q) = j_target at fixed Q.

    The optimal value is nondecreasing in P and may plateau, so the root is
    taken where the value first comes within EDGE of the target.
    """
    lo, hi = 0.25, 1.0 - 3.0 * Q
    if hi < lo:
        raise ValidationError(f"Q = {Q!r} exceeds 1/4")

    def gap(P: float) -> float:
        return ch_bound(cond, RandomnessBounds(P, Q)).value - j_target + EDGE

    if gap(lo) >= 0:
        if gap(lo) > 2 * EDGE:
            raise ValidationError(
                f"target {j_target:g} is below the optimum at P = 1/4 for {cond.name}"
            )
        return lo
    if gap(hi) < 0:
        raise ValidationError(
            f"target {j_target:g} is not attainable for {cond.name} at Q = {Q:g}"
        )
    try:
        return float(brentq(gap, lo, hi, xtol=1e-15))
    except (ValueError, RuntimeError) as e:
        raise ComputationError(f"critical P root finding failed: {e}") from None


# =============================================================================
# Achieving attacks
# =============================================================================


def _atom(q: float, p: Sequence[float], s: DeterministicStrategy) -> LhvAtom:
    return LhvAtom(q, InputConditional(tuple(p)), s)


def _general_ch_zero_q(P: float) -> List[LhvAtom]:
    """Optimal CH atoms at Q = 0, one per reduced strategy."""
    s1, s2, s3, s4, s5 = CH_REDUCED_STRATEGIES
    if P <= 1.0 / 3.0:
        r = 1.0 - 3.0 * P
        return [
            _atom(0.125, (r, P, P, P), s1),
            _atom(0.125, (r, P, P, P), s2),
            _atom(0.25, (P, P, r, P), s3),
            _atom(0.25, (P, r, P, P), s4),
            _atom(0.25, (P, P, P, r), s5),
        ]
    if P <= 0.375:
        r = 1.0 - 2.0 * P
        q12 = 0.5 - 1.0 / (8.0 * r)
        q34 = 1.0 / (8.0 * r) + 1.0 / (8.0 * P) - 0.5
        q5 = 1.0 - 1.0 / (4.0 * P)
        return [
            _atom(q12, (0.0, r, P, P), s1),
            _atom(q12, (0.0, P, r, P), s2),
            _atom(q34, (r, P, 0.0, P), s3),
            _atom(q34, (r, 0.0, P, P), s4),
            _atom(q5, (r, P, P, 0.0), s5),
        ]
    third = 1.0 / 3.0
    return [
        _atom(third, (0.25, 0.375, 0.0, 0.375), s3),
        _atom(third, (0.25, 0.0, 0.375, 0.375), s4),
        _atom(third, (0.25, 0.375, 0.375, 0.0), s5),
    ]


def _general_chsh_zero_q(P: float) -> List[LhvAtom]:
    """One atom per reduced CHSH strategy, its negative-coefficient setting minimized."""
    low = max(1.0 - 3.0 * P, 0.0)
    high = min(P, 1.0 / 3.0)
    atoms = []
    for s, negative in zip(CHSH_REDUCED_STRATEGIES, (3, 2, 1, 0)):
        p = [high] * 4
        p[negative] = low
        atoms.append(_atom(0.25, p, s))
    return atoms


def _rescaled(atoms: List[LhvAtom], rescaling: Rescaling, Q: float) -> List[LhvAtom]:
    return [
        LhvAtom(a.weight, InputConditional(rescaling.lift(a.ic.p, Q)), a.strategy)
        for a in atoms
    ]


def _factorizable_atoms(rb: RandomnessBounds, functional: Functional) -> List[LhvAtom]:
    """Four equal-weight product-input atoms with h = min(P, 1/2 - Q)."""
    h = min(_upper(rb), 0.5 - rb.Q)
    inputs = (
        FactorizedInputConditional(1.0 - 2.0 * h, 0.5),
        FactorizedInputConditional(0.5, 1.0 - 2.0 * h),
        FactorizedInputConditional(2.0 * h, 0.5),
        FactorizedInputConditional(0.5, 2.0 * h),
    )
    if functional is Functional.CHSH:
        strategies = (
            DeterministicStrategy(1, 0, 0, 1),
            DeterministicStrategy(1, 0, 1, 1),
            DeterministicStrategy(1, 1, 1, 1),
            DeterministicStrategy(1, 1, 1, 0),
        )
    else:
        strategies = CH_REDUCED_STRATEGIES[:4]
    return [LhvAtom(0.25, ic, s) for ic, s in zip(inputs, strategies)]


def _analytic_attack(
    cond: ConditionFlags, rb: RandomnessBounds, functional: Functional
) -> LhvEnsemble:
    # no-signaling CH attacks are symmetrized CHSH attacks
    family = Functional.CHSH if cond.no_signaling else functional

    if cond.factorizable:
        atoms = _factorizable_atoms(rb, family)
    else:
        rescaling = rescale_to_zero_q(rb, family)
        if rescaling.degenerate:
            atoms = [_atom(1.0, (0.25,) * 4, DeterministicStrategy(1, 1, 1, 1))]
        else:
            build = _general_chsh_zero_q if family is Functional.CHSH else _general_ch_zero_q
            atoms = _rescaled(build(rescaling.p_prime), rescaling, rb.Q)

    atoms = [a for a in atoms if a.weight > 0]
    ensemble = LhvEnsemble(tuple(atoms), label=ANALYTIC)
    return symmetrize(ensemble) if cond.no_signaling else ensemble


def _search_attack(
    cond: ConditionFlags, rb: RandomnessBounds, functional: Functional, grid_n: int
) -> LhvEnsemble:
    family = Functional.CHSH if cond.no_signaling else functional
    if cond.factorizable:
        witness = optimize_factorizable(family, rb, grid_n).witness
        target = optimal_value(cond, rb, family).value
        if target - ensemble_bell_value(witness, family) > TOL.factorizable:
            witness = refine_factorizable(witness, rb, family)
    else:
        witness = optimize_general(family, rb).witness
    witness = LhvEnsemble(witness.atoms, label=NUMERIC)
    return symmetrize(witness) if cond.no_signaling else witness


def build_attack(
    cond: ConditionFlags,
    rb: RandomnessBounds,
    functional: Functional = Functional.CH,
    method: str = "analytic",
    grid_n: int = DEFAULT_GRID_N,
) -> LhvEnsemble:
    """Ensemble that attains the optimal value at the given bounds.

    Args:
        cond: assumptions the attack must respect
        rb: randomness bounds
        functional: CH or CHSH
        method: "analytic" for the explicit constructions, "search" for an
            oracle-backed numerical construction; analytic attacks that fail
            their own check fall back to search

    Raises:
        ComputationError: the numerical search misses the optimal value
    """
    functional = Functional(functional)
    target = optimal_value(cond, rb, functional).value
    tol = TOL.factorizable if cond.factorizable else TOL.bound

    ensemble: Optional[LhvEnsemble] = None
    if method == "analytic":
        ensemble = _analytic_attack(cond, rb, functional)
        if not _achieves(ensemble, cond, rb, functional, target, TOL.bound):
            logger.warning(
                "analytic %s attack misses %.12g at P=%g Q=%g; searching numerically",
                cond.name,
                target,
                rb.P,
                rb.Q,
            )
            ensemble = None
    elif method != "search":
        raise ValidationError(f"unknown attack method {method!r}")

    if ensemble is None:
        ensemble = _search_attack(cond, rb, functional, grid_n)
        if not _achieves(ensemble, cond, rb, functional, target, tol):
            raise ComputationError(
                f"numerical search for a {cond.name} attack at P={rb.P:g}, Q={rb.Q:g} "
                f"did not reach {target:.12g} within {tol:g}"
            )

    logger.info("built %s %s attack with %d atoms", ensemble.label, cond.name, len(ensemble))
    return ensemble.with_meta(
        condition=cond.name,
        functional=functional.value,
        P=rb.P,
        Q=rb.Q,
        target=target,
    )


def _achieves(
    e: LhvEnsemble,
    cond: ConditionFlags,
    rb: RandomnessBounds,
    functional: Functional,
    target: float,
    tol: float,
) -> bool:
    if not validate_ensemble(e, rb, factorizable=cond.factorizable).ok:
        return False
    return abs(ensemble_bell_value(e, functional) - target) <= tol
