"""
Independent maximization of the LHVM Bell value

Every input conditional in a feasible ensemble is a convex combination of
vertices of the box-simplex {p : sum p = 1, Q <= p_i <= P}, and the Bell value
and averaging constraint are linear in each p(lambda). The optimum is therefore
a linear program over (strategy, vertex) atoms. For factorizable inputs the
vertices are replaced by a grid over (alpha, beta).
"""

import itertools
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog, minimize, nnls

from .config import (
    DEFAULT_GRID_N,
    ENUMERATE_LIMIT,
    FACTORIZABLE_LIPSCHITZ,
    MIN_GRID_N,
    REFINE_MAXITER,
    TOL,
)
from .errors import ComputationError, ValidationError
from .lhv_model import (
    all_strategies,
    coefficient_matrix,
    optimal_local_response,
    reduced_strategies,
    symmetrize,
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
from .models.results import (
    Certificate,
    CertificateKind,
    ConditionFlags,
    OracleResult,
    StrategyAtom,
)

logger = logging.getLogger(__name__)

UNIFORM_TARGETS = np.full(4, 0.25)
LP_METHODS = ("highs", "enumerate")


# =============================================================================
# Box-simplex vertices
# =============================================================================


def box_simplex_vertices(rb: RandomnessBounds) -> List[InputConditional]:
    """All vertices of {p in R^4 : sum p = 1, Q <= p_i <= P}.

    A vertex has three coordinates at a bound; the fourth is fixed by
    normalization and kept when it lands inside [Q, P].
    """
    upper, lower = rb.effective_p, rb.Q
    if rb.is_degenerate:
        return [InputConditional.uniform()]

    eps = TOL.probability
    found: List[np.ndarray] = []
    for free in range(4):
        for assignment in itertools.product((lower, upper), repeat=3):
            rest = 1.0 - sum(assignment)
            if rest < lower - eps or rest > upper + eps:
                continue
            vertex = list(assignment)
            vertex.insert(free, min(max(rest, lower), upper))
            vertex = np.array(vertex)
            if not any(np.abs(vertex - v).max() <= eps for v in found):
                found.append(vertex)

    logger.debug("box-simplex P=%g Q=%g has %d vertices", upper, lower, len(found))
    return [InputConditional(tuple(v)) for v in found]


def candidate_atoms(
    rb: RandomnessBounds,
    functional: Functional = Functional.CH,
    strategies: Optional[Sequence[DeterministicStrategy]] = None,
) -> List[StrategyAtom]:
    """Best strategy at each vertex.

    All strategies placed at one vertex share the same LP column, so only the
    highest-valued one can enter an optimal basis.
    """
    if strategies is None:
        strategies = reduced_strategies(functional)
    vertices = box_simplex_vertices(rb)
    values = np.array([v.p for v in vertices]) @ coefficient_matrix(strategies, functional).T
    best = np.argmax(values, axis=1)
    return [
        StrategyAtom(strategies[k], v, float(values[i, k]), int(k))
        for i, (v, k) in enumerate(zip(vertices, best))
    ]


# =============================================================================
# Inner linear program
# =============================================================================


def lp_maximize(
    values: Sequence[float],
    points: np.ndarray,
    targets: Sequence[float] = UNIFORM_TARGETS,
    method: str = "highs",
) -> Tuple[float, np.ndarray]:
    """Maximize sum w_k c_k subject to sum w_k v_k = targets, sum w_k = 1, w >= 0.

    Args:
        values: objective coefficient c_k of each column
        points: array of shape (columns, 4), the input conditional v_k of each column
        targets: required averaged inputs
        method: "highs" (dual simplex, then exact re-solve on the support) or
            "enumerate" (walk every basic feasible solution)

    Returns:
        (optimal value, weights)

    Raises:
        ComputationError: no weights meet the averaging constraint
    """
    c = np.asarray(values, dtype=float)
    points = np.asarray(points, dtype=float)
    if c.size == 0:
        raise ValidationError("linear program needs at least one column")
    if points.shape != (c.size, 4):
        raise ValidationError(f"expected points of shape ({c.size}, 4), got {points.shape}")
    a_eq = np.vstack([points.T, np.ones(c.size)])
    b_eq = np.append(np.asarray(targets, dtype=float), 1.0)

    if method == "enumerate":
        weights = _enumerate_bases(c, a_eq, b_eq)
    elif method == "highs":
        weights = _highs(c, a_eq, b_eq)
    else:
        raise ValidationError(f"unknown LP method {method!r}, expected one of {LP_METHODS}")
    return float(c @ weights), weights


def _highs(c: np.ndarray, a_eq: np.ndarray, b_eq: np.ndarray) -> np.ndarray:
    res = linprog(
        -c,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status == 2:
        raise ComputationError("no ensemble meets the averaging constraint")
    if not res.success:
        raise ComputationError(f"linear program failed: {res.message}")

    weights = np.clip(res.x, 0.0, None)
    support = np.flatnonzero(weights > 1e-12)
    polished = _solve_support(a_eq, b_eq, support)
    if polished is None:
        logger.debug("support re-solve failed; keeping simplex weights")
        return weights
    weights = np.zeros_like(weights)
    weights[support] = polished
    return weights


def _solve_support(
    a_eq: np.ndarray, b_eq: np.ndarray, support: np.ndarray
) -> Optional[np.ndarray]:
    if support.size == 0:
        return None
    sub = a_eq[:, support]
    w, *_ = np.linalg.lstsq(sub, b_eq, rcond=None)
    if np.abs(sub @ w - b_eq).max() > TOL.basis_residual or w.min() < -TOL.probability:
        return None
    return np.clip(w, 0.0, None)


def _enumerate_bases(c: np.ndarray, a_eq: np.ndarray, b_eq: np.ndarray) -> np.ndarray:
    n = c.size
    rank = int(np.linalg.matrix_rank(a_eq))
    size = min(rank, n)
    total = math.comb(n, size)
    if total > ENUMERATE_LIMIT:
        raise ValidationError(
            f"{total} candidate bases exceed the enumeration limit {ENUMERATE_LIMIT}"
        )
    subsets = np.array(list(itertools.combinations(range(n), size)), dtype=int)
    blocks = np.transpose(a_eq[:, subsets], (1, 0, 2))  # (bases, rows, size)
    w = np.einsum("bij,j->bi", np.linalg.pinv(blocks), b_eq)
    residual = np.abs(np.einsum("bij,bj->bi", blocks, w) - b_eq).max(axis=1)
    feasible = (residual <= TOL.basis_residual) & (w.min(axis=1) >= -TOL.probability)
    if not feasible.any():
        raise ComputationError("no ensemble meets the averaging constraint")

    objective = np.where(feasible, np.einsum("bi,bi->b", c[subsets], w), -np.inf)
    best = int(np.argmax(objective))
    logger.debug("enumerated %d bases, %d feasible", total, int(feasible.sum()))
    weights = np.zeros(n)
    weights[subsets[best]] = np.clip(w[best], 0.0, None)
    return weights


# =============================================================================
# Optimizers
# =============================================================================


def optimize_general(
    functional: Functional,
    rb: RandomnessBounds,
    method: str = "highs",
    all_rules: bool = False,
) -> OracleResult:
    """Exact optimum over arbitrary measurement-dependent inputs.

    With `all_rules` every one of the 16 deterministic strategies is a
    candidate, not only the reduced set.
    """
    functional = Functional(functional)
    if rb.is_degenerate:
        uniform = InputConditional.uniform()
        strategy, value = optimal_local_response(uniform, functional)
        witness = LhvEnsemble((LhvAtom(1.0, uniform, strategy),), label="oracle")
        return OracleResult(4.0 * value, witness, Certificate.exact(), functional, rb)

    atoms = candidate_atoms(rb, functional, all_strategies() if all_rules else None)
    points = np.array([a.vertex.p for a in atoms])
    lp_value, weights = lp_maximize([a.value for a in atoms], points, method=method)

    witness = LhvEnsemble(
        tuple(
            LhvAtom(float(w), atom.vertex, atom.strategy)
            for w, atom in zip(weights, atoms)
            if w > 0
        ),
        label="oracle",
    )
    value = 4.0 * lp_value
    logger.info(
        "%s oracle at P=%g Q=%g: %.12g from %d columns, %d in support",
        functional.value.upper(),
        rb.P,
        rb.Q,
        value,
        len(atoms),
        len(witness),
    )
    return OracleResult(
        value,
        witness,
        Certificate.exact(),
        functional,
        rb,
        extras={"columns": len(atoms), "method": method},
    )


def _product_inputs(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    return np.stack(
        [alpha * beta, alpha * (1 - beta), (1 - alpha) * beta, (1 - alpha) * (1 - beta)],
        axis=1,
    )


def _edge_partners(axis: np.ndarray, levels: Sequence[float]) -> np.ndarray:
    """Partner marginals at which one product input equals a bound.

    Row j holds the solutions x of x*v = t, (1-x)*v = t, x*(1-v) = t and
    (1-x)*(1-v) = t for v = axis[j] and every t in `levels`; nan where v is 0 or 1.
    """
    columns = []
    for t in levels:
        for other in (axis, 1.0 - axis):
            x = np.divide(t, other, out=np.full_like(axis, np.nan), where=other > 0)
            columns.extend([x, 1.0 - x])
    return np.stack(columns, axis=1)


def factorized_grid(rb: RandomnessBounds, grid_n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Grid points (alpha, beta) whose product inputs satisfy the bounds.

    The axis is {k / grid_n} plus 1/2. Next to the lattice, every axis value
    is paired with the partner values that put one product input exactly on
    Q or P, where factorizable optima sit. Columns for grid_n are a subset of
    those for any multiple of grid_n.

    Returns (pairs of shape (k, 2), inputs of shape (k, 4)).
    """
    axis = np.union1d(np.linspace(0.0, 1.0, grid_n + 1), [0.5])
    alpha, beta = (m.ravel() for m in np.meshgrid(axis, axis, indexing="ij"))

    partners = _edge_partners(axis, (rb.Q, rb.effective_p))
    fixed = np.repeat(axis, partners.shape[1])
    free = partners.ravel()
    usable = np.isfinite(free) & (free >= 0.0) & (free <= 1.0)
    alpha = np.concatenate([alpha, free[usable], fixed[usable]])
    beta = np.concatenate([beta, fixed[usable], free[usable]])
    pairs = np.unique(np.stack([alpha, beta], axis=1), axis=0)

    inputs = _product_inputs(pairs[:, 0], pairs[:, 1])
    eps = TOL.probability
    inside = np.all((inputs >= rb.Q - eps) & (inputs <= rb.effective_p + eps), axis=1)
    return pairs[inside], inputs[inside]


def optimize_factorizable(
    functional: Functional, rb: RandomnessBounds, grid_n: int = DEFAULT_GRID_N
) -> OracleResult:
    """Grid-certified optimum when inputs factorize as p_A(x) p_B(y).

    The grid value is attained by its witness, so it never exceeds the true
    optimum and lies within FACTORIZABLE_LIPSCHITZ / grid_n of it. Along
    grid_n, 2 grid_n, 4 grid_n, ... the value is nondecreasing.
    """
    functional = Functional(functional)
    if grid_n < MIN_GRID_N:
        raise ValidationError(f"grid_n must be at least {MIN_GRID_N}, got {grid_n}")
    pairs, inputs = factorized_grid(rb, grid_n)
    if len(pairs) == 0:
        raise ValidationError(
            f"no ({grid_n} x {grid_n}) grid point satisfies P={rb.P:g}, Q={rb.Q:g}"
        )

    strategies = reduced_strategies(functional)
    values = inputs @ coefficient_matrix(strategies, functional).T
    best = np.argmax(values, axis=1)
    c = values[np.arange(len(best)), best]
    logger.debug("factorizable grid %d: %d admissible points", grid_n, len(pairs))

    lp_value, weights = lp_maximize(c, inputs, method="highs")
    witness = LhvEnsemble(
        tuple(
            LhvAtom(
                float(weights[k]),
                FactorizedInputConditional(float(pairs[k, 0]), float(pairs[k, 1])),
                strategies[best[k]],
            )
            for k in np.flatnonzero(weights > 0)
        ),
        label="oracle",
    )
    value = 4.0 * lp_value
    certificate = Certificate.grid(grid_n, FACTORIZABLE_LIPSCHITZ / grid_n)
    logger.info(
        "factorizable %s oracle at P=%g Q=%g: %.12g (+%g)",
        functional.value.upper(),
        rb.P,
        rb.Q,
        value,
        certificate.error_bound,
    )
    return OracleResult(
        value, witness, certificate, functional, rb, extras={"columns": len(pairs)}
    )


def refine_factorizable(
    e: LhvEnsemble, rb: RandomnessBounds, functional: Functional = Functional.CH
) -> LhvEnsemble:
    """Locally improve a factorizable ensemble with its strategies held fixed.

    Moves every atom's (alpha, beta) and weight with SLSQP, then re-solves the
    weights exactly for the moved inputs. Returns the input unchanged when no
    improvement validates.
    """
    functional = Functional(functional)
    k = len(e)
    strategies = e.strategies
    coeffs = coefficient_matrix(strategies, functional)
    upper, lower = rb.effective_p, rb.Q

    def unpack(z):
        return z[:k], z[k : 2 * k], z[2 * k :]

    products = _product_inputs

    def objective(z):
        alpha, beta, q = unpack(z)
        return -float(q @ np.einsum("ij,ij->i", coeffs, products(alpha, beta)))

    def averaging(z):
        alpha, beta, q = unpack(z)
        return np.append(q @ products(alpha, beta) - 0.25, q.sum() - 1.0)

    def box(z):
        p = products(*unpack(z)[:2]).ravel()
        return np.concatenate([p - lower, upper - p])

    start = np.concatenate(
        [
            [atom.inputs.alpha if atom.is_factorized else 0.5 for atom in e],
            [atom.inputs.beta if atom.is_factorized else 0.5 for atom in e],
            e.weights,
        ]
    )
    res = minimize(
        objective,
        start,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * (3 * k),
        constraints=[{"type": "eq", "fun": averaging}, {"type": "ineq", "fun": box}],
        options={"maxiter": REFINE_MAXITER, "ftol": 1e-15},
    )
    if not res.success:
        logger.debug("factorizable refinement stopped: %s", res.message)

    alpha, beta, _ = unpack(np.clip(res.x, 0.0, 1.0))
    inputs = products(alpha, beta)
    eps = TOL.probability
    if not np.all((inputs >= lower - eps) & (inputs <= upper + eps)):
        return e
    try:
        _, weights = lp_maximize(np.einsum("ij,ij->i", coeffs, inputs), inputs)
    except ComputationError:
        return e

    refined = LhvEnsemble(
        tuple(
            LhvAtom(float(w), FactorizedInputConditional(float(a), float(b)), s)
            for w, a, b, s in zip(weights, alpha, beta, strategies)
            if w > 0
        ),
        label=e.label,
        extras=e.extras,
    )
    before = -objective(start)
    after = float(np.einsum("ij,ij->i", coeffs, inputs) @ weights)
    logger.debug("factorizable refinement: %.12g -> %.12g", 4 * before, 4 * after)
    return refined if after >= before else e


# =============================================================================
# Vertex decomposition
# =============================================================================


def decompose_input(
    ic: InputConditional, rb: RandomnessBounds
) -> List[Tuple[float, InputConditional]]:
    """Write an input conditional inside the box as a convex combination of vertices.

    Raises:
        ValidationError: the input conditional violates the bounds
    """
    p = np.asarray(ic.p)
    if p.max() > rb.effective_p + TOL.averaging or p.min() < rb.Q - TOL.averaging:
        raise ValidationError(f"input conditional {ic.p} lies outside [Q, P]")
    vertices = box_simplex_vertices(rb)
    a = np.vstack([np.array([v.p for v in vertices]).T, np.ones(len(vertices))])
    b = np.append(p, 1.0)
    weights, rnorm = nnls(a, b)
    if rnorm > TOL.averaging:
        raise ComputationError(f"vertex decomposition residual {rnorm:.3g} too large")
    return [(float(w), v) for w, v in zip(weights, vertices) if w > 0]


def split_ensemble(e: LhvEnsemble, rb: RandomnessBounds) -> LhvEnsemble:
    """Replace every atom by vertex atoms with the same strategy."""
    atoms = []
    for atom in e:
        for w, vertex in decompose_input(atom.ic, rb):
            atoms.append(LhvAtom(atom.weight * w, vertex, atom.strategy))
    logger.debug("split %d atoms into %d vertex atoms", len(e), len(atoms))
    return LhvEnsemble(tuple(atoms), label=e.label, extras=e.extras)


def optimize(
    cond: ConditionFlags,
    functional: Functional,
    rb: RandomnessBounds,
    grid_n: int = DEFAULT_GRID_N,
    method: str = "highs",
) -> OracleResult:
    """Oracle optimum under any condition.

    No-signaling optima come from the CHSH optimum: its witness is made
    no-signaling by complement pairing, after which J_CH = (J_CHSH - 2) / 4.
    """
    functional = Functional(functional)
    family = Functional.CHSH if cond.no_signaling else functional
    if cond.factorizable:
        result = optimize_factorizable(family, rb, grid_n)
    else:
        result = optimize_general(family, rb, method=method)
    if not cond.no_signaling:
        return result

    witness = symmetrize(result.witness)
    value = result.value if functional is Functional.CHSH else (result.value - 2.0) / 4.0
    certificate = result.certificate
    if functional is Functional.CH and certificate.kind is CertificateKind.GRID:
        certificate = Certificate.grid(certificate.resolution, certificate.error_bound / 4.0)
    return OracleResult(value, witness, certificate, functional, rb, extras=result.extras)
