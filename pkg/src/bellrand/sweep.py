"""
Parameter sweeps over (P, Q), delta or the critical curve, emitted as CSV rows
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from .closed_form import ch_bound_delta, critical_p_for_q, optimal_value
from .config import J_QUANTUM
from .errors import ValidationError
from .models.distribution import Functional
from .models.ensemble import RandomnessBounds
from .models.results import ConditionFlags, SweepMode, SweepSpec
from .oracle import optimize

logger = logging.getLogger(__name__)

BASE_HEADER = ("condition", "P", "Q", "delta", "closed_form", "branch")
ORACLE_HEADER = ("oracle", "gap")

Row = Tuple[Any, ...]


def grid_values(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive arithmetic grid, rounded so repeated runs agree digit for digit."""
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def header(spec: SweepSpec) -> Tuple[str, ...]:
    return BASE_HEADER + (ORACLE_HEADER if spec.with_oracle else ())


def _bounds(P: float, Q: float) -> Optional[RandomnessBounds]:
    try:
        rb = RandomnessBounds(P, Q)
    except ValidationError as e:
        logger.warning("skipping P=%g Q=%g: %s", P, Q, e)
        return None
    if rb.is_clamped:
        logger.warning("skipping P=%g Q=%g: P + 3Q exceeds 1", P, Q)
        return None
    return rb


def _tasks(spec: SweepSpec) -> List[Tuple]:
    """(condition, P, Q, delta) per grid point, in output order."""
    tasks = []
    for cond in spec.conditions:
        if spec.mode is SweepMode.DELTA:
            for delta in grid_values(*spec.delta_range):
                if not 0 <= delta <= 0.25:
                    logger.warning("skipping delta=%g outside [0, 1/4]", delta)
                    continue
                tasks.append((cond, 0.25 + delta, 0.25 - delta, float(delta)))
        elif spec.mode is SweepMode.CRITICAL:
            target = J_QUANTUM if spec.j_target is None else spec.j_target
            for Q in grid_values(*spec.q_range):
                try:
                    P = critical_p_for_q(cond, float(Q), target)
                except ValidationError as e:
                    logger.warning("skipping Q=%g on the %s critical curve: %s", Q, cond.name, e)
                    continue
                tasks.append((cond, P, float(Q), None))
        else:
            for P in grid_values(*spec.p_range):
                for Q in grid_values(*spec.q_range):
                    if _bounds(P, Q) is not None:
                        tasks.append((cond, float(P), float(Q), None))
    return tasks


def _row(args) -> Row:
    spec, (cond, P, Q, delta) = args
    if delta is not None:
        rb = RandomnessBounds.from_delta(delta)
    else:
        rb = RandomnessBounds(P, Q)
    bound = optimal_value(cond, rb, spec.functional)
    value = bound.value
    if delta is not None and spec.functional is Functional.CH:
        value = ch_bound_delta(cond, delta)

    row: Row = (cond.name, rb.P, rb.Q, delta, value, bound.branch)
    if spec.with_oracle:
        oracle = optimize(cond, spec.functional, rb, spec.grid_n).value
        row += (oracle, abs(oracle - value))
    return row


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> List[Row]:
    """Evaluate every feasible grid point; rows come back in grid order."""
    tasks = _tasks(spec)
    if not tasks:
        logger.warning("sweep grid is empty after the feasibility filter")
        return []
    logger.info("sweeping %d points", len(tasks))
    jobs = [(spec, task) for task in tasks]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_row, jobs))
    return [_row(job) for job in jobs]


def sweep_conditions(names: Sequence[str]) -> Tuple[ConditionFlags, ...]:
    return tuple(ConditionFlags.from_name(n) for n in names)
