"""
Optimal local-hidden-variable attacks on CH and CHSH Bell tests with
partially random measurement inputs
"""

from .bell_core import bell_value, ch_value, chsh_value, is_no_signaling
from .closed_form import (
    Threshold,
    build_attack,
    ch_bound,
    ch_bound_delta,
    chsh_bound,
    critical_p_for_q,
    critical_threshold,
    optimal_value,
    rescale_to_zero_q,
)
from .errors import BellError, ComputationError, InsufficientTrialsError, ValidationError
from .lhv_model import (
    ensemble_bell_value,
    induced_joint,
    j_lambda,
    merge_equivalent_lambdas,
    validate_ensemble,
)
from .models import (
    CONDITIONS,
    FACTORIZABLE,
    GENERAL,
    NO_SIGNALING,
    NS_FACTORIZABLE,
    BoundResult,
    ConditionFlags,
    DeterministicStrategy,
    FactorizedInputConditional,
    Functional,
    InputConditional,
    JointConditional,
    LhvAtom,
    LhvEnsemble,
    OracleResult,
    RandomnessBounds,
    SimConfig,
    SimReport,
    SingleCountConvention,
    TrialCounts,
)
from .oracle import optimize, optimize_factorizable, optimize_general
from .simulator import run_batch, simulate

__all__ = [
    "bell_value",
    "ch_value",
    "chsh_value",
    "is_no_signaling",
    "Threshold",
    "build_attack",
    "ch_bound",
    "ch_bound_delta",
    "chsh_bound",
    "critical_p_for_q",
    "critical_threshold",
    "optimal_value",
    "rescale_to_zero_q",
    "BellError",
    "ComputationError",
    "InsufficientTrialsError",
    "ValidationError",
    "ensemble_bell_value",
    "induced_joint",
    "j_lambda",
    "merge_equivalent_lambdas",
    "validate_ensemble",
    "CONDITIONS",
    "FACTORIZABLE",
    "GENERAL",
    "NO_SIGNALING",
    "NS_FACTORIZABLE",
    "BoundResult",
    "ConditionFlags",
    "DeterministicStrategy",
    "FactorizedInputConditional",
    "Functional",
    "InputConditional",
    "JointConditional",
    "LhvAtom",
    "LhvEnsemble",
    "OracleResult",
    "RandomnessBounds",
    "SimConfig",
    "SimReport",
    "SingleCountConvention",
    "TrialCounts",
    "optimize",
    "optimize_factorizable",
    "optimize_general",
    "run_batch",
    "simulate",
]
