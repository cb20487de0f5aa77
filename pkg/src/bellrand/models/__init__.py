"""
Data models for Bell tests with partially random inputs
"""

from .distribution import (
    BellFunctional,
    CH_FUNCTIONAL,
    CHSH_FUNCTIONAL,
    Functional,
    JointConditional,
    SingleCountConvention,
    TrialCounts,
)
from .ensemble import (
    DeterministicStrategy,
    FactorizedInputConditional,
    InputConditional,
    LhvAtom,
    LhvEnsemble,
    RandomnessBounds,
)
from .results import (
    BoundResult,
    Certificate,
    CertificateKind,
    ConditionFlags,
    CONDITIONS,
    FACTORIZABLE,
    GENERAL,
    NO_SIGNALING,
    NS_FACTORIZABLE,
    OracleResult,
    Rescaling,
    SimConfig,
    SimReport,
    StrategyAtom,
    SweepMode,
    SweepSpec,
    ValidationReport,
    Violation,
)

__all__ = [
    "BellFunctional",
    "CH_FUNCTIONAL",
    "CHSH_FUNCTIONAL",
    "Functional",
    "JointConditional",
    "SingleCountConvention",
    "TrialCounts",
    "DeterministicStrategy",
    "FactorizedInputConditional",
    "InputConditional",
    "LhvAtom",
    "LhvEnsemble",
    "RandomnessBounds",
    "BoundResult",
    "Certificate",
    "CertificateKind",
    "ConditionFlags",
    "CONDITIONS",
    "FACTORIZABLE",
    "GENERAL",
    "NO_SIGNALING",
    "NS_FACTORIZABLE",
    "OracleResult",
    "Rescaling",
    "SimConfig",
    "SimReport",
    "StrategyAtom",
    "SweepMode",
    "SweepSpec",
    "ValidationReport",
    "Violation",
]
