"""
Result and configuration models shared by the bound, oracle, simulator and
sweep layers
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from ..errors import ValidationError
from .distribution import Functional, TrialCounts
from .ensemble import InputConditional, DeterministicStrategy, LhvEnsemble, RandomnessBounds


@dataclass(frozen=True)
class ConditionFlags:
    """Which extra assumptions constrain the attack."""

    no_signaling: bool = False
    factorizable: bool = False

    @property
    def name(self) -> str:
        if self.no_signaling and self.factorizable:
            return "ns-factorizable"
        if self.no_signaling:
            return "ns"
        if self.factorizable:
            return "factorizable"
        return "general"

    @classmethod
    def from_name(cls, name: str) -> "ConditionFlags":
        try:
            return CONDITIONS[name]
        except KeyError:
            raise ValidationError(
                f"unknown condition {name!r}, expected one of {', '.join(CONDITIONS)}"
            ) from None

    def __str__(self) -> str:
        return self.name


CONDITIONS: Dict[str, ConditionFlags] = {
    "general": ConditionFlags(False, False),
    "factorizable": ConditionFlags(False, True),
    "ns": ConditionFlags(True, False),
    "ns-factorizable": ConditionFlags(True, True),
}

GENERAL = CONDITIONS["general"]
FACTORIZABLE = CONDITIONS["factorizable"]
NO_SIGNALING = CONDITIONS["ns"]
NS_FACTORIZABLE = CONDITIONS["ns-factorizable"]


@dataclass(frozen=True)
class BoundResult:
    """Optimal LHVM value at given randomness bounds.

    `branch` names the first region predicate that holds; `boundary` marks
    points where a neighbouring region's predicate holds as well.
    """

    value: float
    branch: str
    bounds_used: RandomnessBounds
    condition: ConditionFlags = GENERAL
    functional: Functional = Functional.CH
    boundary: bool = False

    def to_dict(self) -> Dict:
        return {
            "value": self.value,
            "branch": self.branch,
            "boundary": self.boundary,
            "P": self.bounds_used.P,
            "Q": self.bounds_used.Q,
            "condition": self.condition.name,
            "functional": self.functional.value,
        }


@dataclass(frozen=True)
class Rescaling:
    """Map between bounds (P, Q) and the equivalent Q = 0 problem at P'.

    J(P, Q) = scale * J'(P') + offset.
    """

    p_prime: float
    scale: float
    offset: float
    degenerate: bool = False

    def apply(self, j_prime: float) -> float:
        return self.scale * j_prime + self.offset

    def lift(self, p_prime: Tuple[float, ...], Q: float) -> Tuple[float, ...]:
        """Inverse transform p = scale * p' + Q applied to one input conditional."""
        return tuple(self.scale * v + Q for v in p_prime)


@dataclass(frozen=True)
class StrategyAtom:
    """Candidate column of the inner linear program."""

    strategy: DeterministicStrategy
    vertex: InputConditional
    value: float
    strategy_index: int = 0


class CertificateKind(str, Enum):
    EXACT = "exact"
    GRID = "grid"


@dataclass(frozen=True)
class Certificate:
    kind: CertificateKind
    resolution: Optional[int] = None
    error_bound: float = 0.0

    @classmethod
    def exact(cls) -> "Certificate":
        return cls(CertificateKind.EXACT)

    @classmethod
    def grid(cls, resolution: int, error_bound: float) -> "Certificate":
        return cls(CertificateKind.GRID, resolution, error_bound)

    def to_dict(self) -> Dict:
        result: Dict = {"kind": self.kind.value}
        if self.kind is CertificateKind.GRID:
            result["resolution"] = self.resolution
            result["error_bound"] = self.error_bound
        return result


@dataclass(frozen=True)
class OracleResult:
    value: float
    witness: LhvEnsemble
    certificate: Certificate
    functional: Functional = Functional.CH
    bounds: Optional[RandomnessBounds] = None
    extras: Dict = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> Dict:
        result: Dict = {
            "value": self.value,
            "functional": self.functional.value,
            "certificate": self.certificate.to_dict(),
            "witness": self.witness.to_dict(),
        }
        if self.bounds is not None:
            result.update(self.bounds.to_dict())
        result.update(self.extras)
        return result


@dataclass(frozen=True)
class Violation:
    """One failed constraint of an ensemble check."""

    constraint: str
    magnitude: float
    atom: Optional[int] = None
    setting: Optional[int] = None

    def __str__(self) -> str:
        where = []
        if self.atom is not None:
            where.append(f"atom {self.atom}")
        if self.setting is not None:
            where.append(f"setting {self.setting}")
        location = f" ({', '.join(where)})" if where else ""
        return f"{self.constraint}{location}: off by {self.magnitude:.3g}"

    def to_dict(self) -> Dict:
        return {
            "constraint": self.constraint,
            "magnitude": self.magnitude,
            "atom": self.atom,
            "setting": self.setting,
        }


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def constraints(self) -> List[str]:
        return sorted({v.constraint for v in self.violations})

    def add(
        self,
        constraint: str,
        magnitude: float,
        atom: Optional[int] = None,
        setting: Optional[int] = None,
    ) -> None:
        self.violations.append(Violation(constraint, magnitude, atom, setting))

    def to_dict(self) -> Dict:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


@dataclass(frozen=True)
class SimConfig:
    n_trials: int
    seed: int
    ensemble: LhvEnsemble

    def __post_init__(self):
        if int(self.n_trials) < 1:
            raise ValidationError(f"n_trials must be at least 1, got {self.n_trials}")
        object.__setattr__(self, "n_trials", int(self.n_trials))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> Dict:
        return {
            "n_trials": self.n_trials,
            "seed": self.seed,
            "ensemble": self.ensemble.to_dict(),
        }


@dataclass(frozen=True)
class SimReport:
    counts: TrialCounts
    j_estimate: float
    std_error: float
    j_exact: float
    config: Optional[SimConfig] = None
    rng: str = "PCG64"
    stream: Optional[int] = None

    def to_dict(self) -> Dict:
        result: Dict = {
            "j_estimate": self.j_estimate,
            "std_error": self.std_error,
            "j_exact": self.j_exact,
            "rng": self.rng,
            "stream": self.stream,
            "counts": self.counts.to_dict(),
        }
        if self.config is not None:
            result["config"] = self.config.to_dict()
        return result


class SweepMode(str, Enum):
    PQ = "pq"
    DELTA = "delta"
    CRITICAL = "critical"


Range = Tuple[float, float, float]


@dataclass(frozen=True)
class SweepSpec:
    """Grid description for a sweep; ranges are inclusive (start, stop, step)."""

    conditions: Tuple[ConditionFlags, ...]
    mode: SweepMode = SweepMode.PQ
    p_range: Optional[Range] = None
    q_range: Optional[Range] = None
    delta_range: Optional[Range] = None
    functional: Functional = Functional.CH
    with_oracle: bool = False
    grid_n: int = 512
    j_target: Optional[float] = None

    def __post_init__(self):
        if not self.conditions:
            raise ValidationError("sweep needs at least one condition")
        for name in ("p_range", "q_range", "delta_range"):
            rng = getattr(self, name)
            if rng is None:
                continue
            if len(rng) != 3:
                raise ValidationError(f"{name} needs start, stop, step")
            start, stop, step = (float(v) for v in rng)
            if step <= 0:
                raise ValidationError(f"{name} step must be positive")
            if stop < start:
                raise ValidationError(f"{name} stop is below start")
            object.__setattr__(self, name, (start, stop, step))
        if self.mode is SweepMode.DELTA and self.delta_range is None:
            raise ValidationError("delta sweep needs a delta range")
        if self.mode is SweepMode.PQ and (self.p_range is None or self.q_range is None):
            raise ValidationError("P/Q sweep needs both P and Q ranges")
        if self.mode is SweepMode.CRITICAL and self.q_range is None:
            raise ValidationError("critical sweep needs a Q range")
        if self.mode is SweepMode.CRITICAL and Functional(self.functional) is not Functional.CH:
            raise ValidationError("critical curves are defined for the CH functional only")
