"""
Local hidden-variable models with measurement-dependent inputs

Per-atom Bell values, best local responses, ensemble evaluation and
constraint checking, atom merging and the induced observed distribution.
"""

import logging
from collections import OrderedDict
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from .config import TOL
from .errors import ValidationError
from .models.distribution import Functional, JointConditional
from .models.ensemble import (
    DeterministicStrategy,
    FactorizedInputConditional,
    InputConditional,
    LhvAtom,
    LhvEnsemble,
    RandomnessBounds,
)
from .models.results import ValidationReport

logger = logging.getLogger(__name__)

Inputs = Union[InputConditional, FactorizedInputConditional]

QUARTER = 0.25

# Ordered so that ties resolve to the earliest entry
CH_REDUCED_STRATEGIES: Tuple[DeterministicStrategy, ...] = (
    DeterministicStrategy(0, 1, 1, 0),  # (p2 - p0) / 2
    DeterministicStrategy(1, 0, 0, 1),  # (p1 - p0) / 2
    DeterministicStrategy(1, 0, 1, 1),  # (p1 - p2) / 2
    DeterministicStrategy(1, 1, 1, 0),  # (p2 - p1) / 2
    DeterministicStrategy(1, 1, 1, 1),  # (p1 + p2) / 2 - p3
)

CHSH_REDUCED_STRATEGIES: Tuple[DeterministicStrategy, ...] = (
    DeterministicStrategy(1, 1, 1, 1),  # 1 - 2 p3
    DeterministicStrategy(1, 0, 1, 1),  # 1 - 2 p2
    DeterministicStrategy(1, 1, 1, 0),  # 1 - 2 p1
    DeterministicStrategy(1, 0, 0, 1),  # 1 - 2 p0
)


def all_strategies() -> List[DeterministicStrategy]:
    """The 16 deterministic strategies in index order."""
    return [DeterministicStrategy.from_index(i) for i in range(16)]


def reduced_strategies(
    functional: Functional = Functional.CH,
) -> Tuple[DeterministicStrategy, ...]:
    if Functional(functional) is Functional.CHSH:
        return CHSH_REDUCED_STRATEGIES
    return CH_REDUCED_STRATEGIES


# =============================================================================
# Per-atom values
# =============================================================================


def strategy_coefficients(
    s: DeterministicStrategy, functional: Functional = Functional.CH
) -> np.ndarray:
    """Weights w with J_lambda = w . p(lambda); J_lambda is linear in the inputs."""
    if Functional(functional) is Functional.CHSH:
        w = np.empty(4)
        for x in (0, 1):
            for y in (0, 1):
                same = s.output_a(x) == s.output_b(y)
                w[2 * x + y] = (-1) ** (x * y) * (1.0 if same else -1.0)
        return w
    a0, a1, b0, b1 = s.bits
    return np.array(
        [
            a0 * b0 - a0 / 2 - b0 / 2,
            a0 * b1 - a0 / 2,
            a1 * b0 - b0 / 2,
            -a1 * b1,
        ],
        dtype=float,
    )


def coefficient_matrix(
    strategies: Sequence[DeterministicStrategy], functional: Functional = Functional.CH
) -> np.ndarray:
    """Stacked strategy coefficients, shape (len(strategies), 4)."""
    return np.array([strategy_coefficients(s, functional) for s in strategies])


def j_lambda(
    s: DeterministicStrategy, ic: Inputs, functional: Functional = Functional.CH
) -> float:
    """Bell value contribution of one hidden variable (before the factor 4)."""
    return float(strategy_coefficients(s, functional) @ ic.as_array())


_CH_TABLE: Dict[int, Callable[[Tuple[float, ...]], float]] = {
    0b0000: lambda p: 0.0,
    0b0001: lambda p: 0.0,
    0b0010: lambda p: -(p[0] + p[2]) / 2,
    0b0011: lambda p: -(p[0] + p[2]) / 2,
    0b0100: lambda p: 0.0,
    0b0101: lambda p: -p[3],
    0b0110: lambda p: (p[2] - p[0]) / 2,
    0b0111: lambda p: (p[2] - p[0]) / 2 - p[3],
    0b1000: lambda p: -(p[0] + p[1]) / 2,
    0b1001: lambda p: (p[1] - p[0]) / 2,
    0b1010: lambda p: -(p[1] + p[2]) / 2,
    0b1011: lambda p: (p[1] - p[2]) / 2,
    0b1100: lambda p: -(p[0] + p[1]) / 2,
    0b1101: lambda p: (p[1] - p[0]) / 2 - p[3],
    0b1110: lambda p: (p[2] - p[1]) / 2,
    0b1111: lambda p: (p[2] + p[1]) / 2 - p[3],
}


def ch_table_value(s: DeterministicStrategy, ic: Inputs) -> float:
    """Closed-form CH contribution of one hidden variable, looked up per strategy."""
    return float(_CH_TABLE[s.index](ic.p))


def optimal_local_response(
    ic: Inputs, functional: Functional = Functional.CH
) -> Tuple[DeterministicStrategy, float]:
    """Best deterministic output rule for the given input conditional."""
    candidates = reduced_strategies(functional)
    values = coefficient_matrix(candidates, functional) @ ic.as_array()
    best = int(np.argmax(values))
    return candidates[best], float(values[best])


# =============================================================================
# Ensembles
# =============================================================================


def averaging_residuals(e: LhvEnsemble) -> np.ndarray:
    """sum_j q_j p_i(lambda_j) - 1/4 for each setting i."""
    return e.moments() - QUARTER


def ensemble_bell_value(e: LhvEnsemble, functional: Functional = Functional.CH) -> float:
    """LHVM Bell value 4 sum_j q_j J_lambda_j.

    Raises:
        ValidationError: when the averaged inputs are not uniform
    """
    residuals = averaging_residuals(e)
    worst = int(np.argmax(np.abs(residuals)))
    if abs(residuals[worst]) > TOL.averaging:
        raise ValidationError(
            f"averaging constraint violated for setting {worst} "
            f"(x={worst >> 1}, y={worst & 1}): off by {residuals[worst]:.3g}"
        )
    return _weighted_value(e, functional)


def _weighted_value(e: LhvEnsemble, functional: Functional) -> float:
    coeffs = coefficient_matrix(e.strategies, functional)
    per_atom = np.einsum("ij,ij->i", coeffs, e.inputs_matrix)
    return float(4.0 * e.weights @ per_atom)


def validate_ensemble(
    e: LhvEnsemble, rb: RandomnessBounds, factorizable: bool = False
) -> ValidationReport:
    """Check weights, input normalization, box bounds and the averaging constraint.

    With `factorizable`, also require every atom's inputs to be a product
    distribution.
    """
    report = ValidationReport()
    tol = TOL.averaging
    upper = rb.effective_p
    if rb.is_clamped:
        logger.warning("P = %g exceeds 1 - 3Q; validating against %g", rb.P, upper)

    weights = e.weights
    for j, q in enumerate(weights):
        if q < -tol:
            report.add("weight non-negative", float(-q), atom=j)
    total = float(weights.sum())
    if abs(total - 1.0) > tol:
        report.add("weights normalized", abs(total - 1.0))

    inputs = e.inputs_matrix
    for j, row in enumerate(inputs):
        norm = abs(float(row.sum()) - 1.0)
        if norm > tol:
            report.add("inputs normalized", norm, atom=j)
        for i, v in enumerate(row):
            if v > upper + tol:
                report.add("box upper bound", float(v - upper), atom=j, setting=i)
            if v < rb.Q - tol:
                report.add("box lower bound", float(rb.Q - v), atom=j, setting=i)
        if factorizable and not e.atoms[j].is_factorized:
            gap = abs(row[0] * row[3] - row[1] * row[2])
            if gap > TOL.factorizable:
                report.add("factorizable inputs", float(gap), atom=j)

    for i, r in enumerate(averaging_residuals(e)):
        if abs(r) > tol:
            report.add("averaging", float(abs(r)), setting=i)

    logger.debug("validated %d atoms: %d violations", len(e), len(report.violations))
    return report


def merge_equivalent_lambdas(e: LhvEnsemble) -> LhvEnsemble:
    """Collapse atoms that share an output strategy into one atom.

    The merged inputs are the weight-averaged inputs, which leaves both the
    Bell value and the averaged inputs unchanged.
    """
    groups: "OrderedDict[DeterministicStrategy, List[LhvAtom]]" = OrderedDict()
    for atom in e.atoms:
        groups.setdefault(atom.strategy, []).append(atom)

    merged = []
    for strategy, atoms in groups.items():
        if len(atoms) == 1:
            merged.append(atoms[0])
            continue
        weights = np.array([a.weight for a in atoms])
        total = float(weights.sum())
        rows = np.array([a.ic.p for a in atoms])
        mean = weights @ rows / total if total > 0 else rows.mean(axis=0)
        merged.append(LhvAtom(total, InputConditional(tuple(mean)), strategy))

    logger.debug("merged %d atoms into %d", len(e), len(merged))
    return LhvEnsemble(tuple(merged), label=e.label, extras=e.extras)


def induced_joint(e: LhvEnsemble) -> JointConditional:
    """Observed p(a,b|x,y) produced by the ensemble."""
    weights = e.weights
    inputs = e.inputs_matrix
    setting_prob = weights @ inputs
    for i, p in enumerate(setting_prob):
        if p <= TOL.probability:
            raise ValidationError(
                f"setting (x={i >> 1}, y={i & 1}) has zero probability under the ensemble"
            )

    table = np.zeros((2, 2, 2, 2))
    for q, row, s in zip(weights, inputs, e.strategies):
        for x in (0, 1):
            for y in (0, 1):
                table[s.output_a(x), s.output_b(y), x, y] += q * row[2 * x + y]
    table /= setting_prob.reshape(2, 2)
    return JointConditional(table)


def symmetrize(e: LhvEnsemble) -> LhvEnsemble:
    """Pair every atom with its output-complemented copy at half weight.

    All marginals of the induced distribution become 1/2, so it is
    no-signaling; the CHSH value is unchanged.
    """
    atoms = []
    for atom in e:
        atoms.append(LhvAtom(atom.weight / 2, atom.inputs, atom.strategy))
        atoms.append(LhvAtom(atom.weight / 2, atom.inputs, atom.strategy.complement()))
    return LhvEnsemble(tuple(atoms), label=e.label, extras=e.extras)
