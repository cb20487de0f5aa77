"""
Observed-data models: conditional output distributions, single-count
conventions, trial counts and Bell functionals
"""

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterator, Tuple

import numpy as np

from ..config import J_CHSH_QUANTUM, J_QUANTUM, TOL
from ..errors import ValidationError

Index = Tuple[int, int, int, int]

BITS = (0, 1)


def all_indices() -> Iterator[Index]:
    """All (a, b, x, y) index tuples in lexicographic order."""
    return itertools.product(BITS, BITS, BITS, BITS)


class SingleCountConvention(str, Enum):
    """How single-party detection probabilities are read off a joint table.

    The single counts p_A(0), p_B(0) are ambiguous for signaling data:
      - AVERAGE: mean over the other party's two settings
      - OTHER_ZERO: condition on the other party's setting being 0
      - OTHER_ONE: condition on the other party's setting being 1
    """

    AVERAGE = "average"
    OTHER_ZERO = "other-zero"
    OTHER_ONE = "other-one"


@dataclass(frozen=True, eq=False)
class JointConditional:
    """Observed distribution p(a,b|x,y), stored as a [a, b, x, y] array."""

    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.shape != (2, 2, 2, 2):
            raise ValidationError(
                f"joint table must have shape (2, 2, 2, 2), got {table.shape}"
            )
        if not np.all(np.isfinite(table)):
            raise ValidationError("joint table contains non-finite entries")
        tol = TOL.probability
        if table.min() < -tol or table.max() > 1 + tol:
            raise ValidationError("joint table entries must lie in [0, 1]")
        sums = table.sum(axis=(0, 1))
        for x, y in itertools.product(BITS, BITS):
            if abs(sums[x, y] - 1.0) > tol:
                raise ValidationError(
                    f"normalization violated for setting ({x},{y}): "
                    f"sum = {sums[x, y]!r}"
                )
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def __getitem__(self, idx: Index) -> float:
        return float(self.table[idx])

    def p(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.table[a, b, x, y])

    @classmethod
    def from_function(cls, fn: Callable[[int, int, int, int], float]) -> "JointConditional":
        """Build from a callable p(a, b, x, y)."""
        table = np.zeros((2, 2, 2, 2))
        for a, b, x, y in all_indices():
            table[a, b, x, y] = fn(a, b, x, y)
        return cls(table)

    @classmethod
    def from_dict(cls, data: Dict) -> "JointConditional":
        entries = data.get("p")
        if not isinstance(entries, dict):
            raise ValidationError("joint distribution JSON needs a 'p' object")
        table = np.full((2, 2, 2, 2), np.nan)
        for key, value in entries.items():
            try:
                idx = tuple(int(k) for k in key.split(","))
            except ValueError:
                raise ValidationError(f"bad joint index key {key!r}") from None
            if len(idx) != 4 or any(i not in BITS for i in idx):
                raise ValidationError(f"bad joint index key {key!r}")
            table[idx] = float(value)
        if np.isnan(table).any():
            raise ValidationError("joint distribution JSON must list all 16 entries")
        return cls(table)

    def to_dict(self) -> Dict:
        return {
            "p": {
                f"{a},{b},{x},{y}": float(self.table[a, b, x, y])
                for a, b, x, y in all_indices()
            }
        }


@dataclass(frozen=True)
class TrialCounts:
    """Raw counts of a finite Bell experiment.

    Index 2x+y addresses the per-setting arrays.
    """

    n_total: int
    n_setting: Tuple[int, int, int, int]
    coincidences: Tuple[int, int, int, int]
    singles_a: int
    singles_b: int
    n_a0: int
    n_b0: int

    def __post_init__(self):
        n_setting = tuple(int(v) for v in self.n_setting)
        coincidences = tuple(int(v) for v in self.coincidences)
        if len(n_setting) != 4 or len(coincidences) != 4:
            raise ValidationError("n_setting and coincidences need 4 entries each")
        object.__setattr__(self, "n_setting", n_setting)
        object.__setattr__(self, "coincidences", coincidences)

        if min(n_setting + coincidences + (self.singles_a, self.singles_b)) < 0:
            raise ValidationError("counts must be non-negative")
        if sum(n_setting) != self.n_total:
            raise ValidationError(
                f"setting counts sum to {sum(n_setting)}, expected N = {self.n_total}"
            )
        if self.n_a0 != n_setting[0] + n_setting[1]:
            raise ValidationError("N_A(0) must equal N_AB(0,0) + N_AB(0,1)")
        if self.n_b0 != n_setting[0] + n_setting[2]:
            raise ValidationError("N_B(0) must equal N_AB(0,0) + N_AB(1,0)")
        for i, (c, n) in enumerate(zip(coincidences, n_setting)):
            if c > n:
                raise ValidationError(
                    f"C_AB({i >> 1},{i & 1}) = {c} exceeds N_AB = {n}"
                )
        if self.singles_a > self.n_a0:
            raise ValidationError("S_A(0) exceeds N_A(0)")
        if self.singles_b > self.n_b0:
            raise ValidationError("S_B(0) exceeds N_B(0)")

    @classmethod
    def from_dict(cls, data: Dict) -> "TrialCounts":
        try:
            return cls(
                n_total=int(data["n_total"]),
                n_setting=tuple(data["n_setting"]),
                coincidences=tuple(data["coincidences"]),
                singles_a=int(data["singles_a"]),
                singles_b=int(data["singles_b"]),
                n_a0=int(data["n_a0"]),
                n_b0=int(data["n_b0"]),
            )
        except KeyError as e:
            raise ValidationError(f"trial counts JSON missing field {e}") from None

    def to_dict(self) -> Dict:
        return {
            "n_total": self.n_total,
            "n_setting": list(self.n_setting),
            "coincidences": list(self.coincidences),
            "singles_a": self.singles_a,
            "singles_b": self.singles_b,
            "n_a0": self.n_a0,
            "n_b0": self.n_b0,
        }


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Linear functional sum beta(a,b,x,y) p(a,b|x,y) with its known bounds."""

    name: str
    coefficients: np.ndarray
    classical_bound: float
    quantum_bound: float

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=float)
        if coefficients.shape != (2, 2, 2, 2):
            raise ValidationError("functional coefficients must have shape (2, 2, 2, 2)")
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)


def _chsh_coefficients() -> np.ndarray:
    beta = np.zeros((2, 2, 2, 2))
    for a, b, x, y in all_indices():
        beta[a, b, x, y] = (-1) ** (x * y + a + b)
    return beta


CHSH_FUNCTIONAL = BellFunctional(
    name="CHSH",
    coefficients=_chsh_coefficients(),
    classical_bound=2.0,
    quantum_bound=J_CHSH_QUANTUM,
)


def _ch_coefficients() -> np.ndarray:
    """CH coefficients with single counts averaged over the other setting."""
    beta = np.zeros((2, 2, 2, 2))
    beta[0, 0, 0, 0] += 1.0
    beta[0, 0, 0, 1] += 1.0
    beta[0, 0, 1, 0] += 1.0
    beta[0, 0, 1, 1] -= 1.0
    for other in BITS:
        for y in BITS:
            beta[0, other, 0, y] -= 0.5
        for x in BITS:
            beta[other, 0, x, 0] -= 0.5
    return beta


CH_FUNCTIONAL = BellFunctional(
    name="CH",
    coefficients=_ch_coefficients(),
    classical_bound=0.0,
    quantum_bound=J_QUANTUM,
)


class Functional(str, Enum):
    """Bell functional selector used across the LHVM, bound and oracle APIs"""

    CH = "ch"
    CHSH = "chsh"

    @property
    def definition(self) -> BellFunctional:
        return CH_FUNCTIONAL if self is Functional.CH else CHSH_FUNCTIONAL
