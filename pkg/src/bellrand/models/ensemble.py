"""
Hidden-variable models: input conditionals, deterministic output strategies,
weighted ensembles and randomness bounds
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..config import TOL
from ..errors import ValidationError

QUARTER = 0.25


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} is not finite")
    if value < -TOL.probability or value > 1 + TOL.probability:
        raise ValidationError(f"{name} = {value!r} is outside [0, 1]")
    return value


@dataclass(frozen=True)
class InputConditional:
    """Input distribution p(x,y|lambda) of one hidden variable.

    Entry p[2x+y] is the probability of settings (x, y).
    """

    p: Tuple[float, float, float, float]

    def __post_init__(self):
        values = tuple(float(v) for v in self.p)
        if len(values) != 4:
            raise ValidationError(f"input conditional needs 4 entries, got {len(values)}")
        for i, v in enumerate(values):
            _check_probability(f"p_{i}", v)
        total = sum(values)
        if abs(total - 1.0) > TOL.probability:
            raise ValidationError(f"input conditional sums to {total!r}, expected 1")
        object.__setattr__(self, "p", values)

    @classmethod
    def uniform(cls) -> "InputConditional":
        return cls((QUARTER, QUARTER, QUARTER, QUARTER))

    def __getitem__(self, i: int) -> float:
        return self.p[i]

    def setting(self, x: int, y: int) -> float:
        return self.p[2 * x + y]

    def as_array(self) -> np.ndarray:
        return np.array(self.p)

    def to_input(self) -> "InputConditional":
        return self

    def to_json(self) -> List[float]:
        return list(self.p)


@dataclass(frozen=True)
class FactorizedInputConditional:
    """Product input distribution p_A(x|lambda) p_B(y|lambda).

    alpha = p_A(x=0|lambda), beta = p_B(y=0|lambda).
    """

    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_probability("alpha", self.alpha))
        object.__setattr__(self, "beta", _check_probability("beta", self.beta))

    @property
    def p(self) -> Tuple[float, float, float, float]:
        a, b = self.alpha, self.beta
        return (a * b, a * (1 - b), (1 - a) * b, (1 - a) * (1 - b))

    def __getitem__(self, i: int) -> float:
        return self.p[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.p)

    def to_input(self) -> InputConditional:
        return InputConditional(self.p)

    def to_json(self) -> Dict[str, float]:
        return {"alpha": self.alpha, "beta": self.beta}


Inputs = Union[InputConditional, FactorizedInputConditional]


@dataclass(frozen=True)
class DeterministicStrategy:
    """Deterministic local output rule of one hidden variable.

    a0, a1 are p_A(0|x=0), p_A(0|x=1); b0, b1 are p_B(0|y=0), p_B(0|y=1).
    A bit of 1 means the party outputs 0 for that setting.
    """

    a0: int
    a1: int
    b0: int
    b1: int

    def __post_init__(self):
        for name in ("a0", "a1", "b0", "b1"):
            bit = getattr(self, name)
            if isinstance(bit, bool) or bit not in (0, 1):
                raise ValidationError(f"strategy bit {name} must be 0 or 1, got {bit!r}")
            object.__setattr__(self, name, int(bit))

    @classmethod
    def from_bits(cls, bits) -> "DeterministicStrategy":
        bits = tuple(bits)
        if len(bits) != 4:
            raise ValidationError(f"strategy needs 4 bits, got {len(bits)}")
        return cls(*bits)

    @classmethod
    def from_index(cls, index: int) -> "DeterministicStrategy":
        """Inverse of `index`."""
        if not 0 <= index < 16:
            raise ValidationError(f"strategy index {index} outside 0..15")
        return cls((index >> 3) & 1, (index >> 2) & 1, (index >> 1) & 1, index & 1)

    @property
    def bits(self) -> Tuple[int, int, int, int]:
        return (self.a0, self.a1, self.b0, self.b1)

    @property
    def index(self) -> int:
        """Row-major position in the 4x4 table of A-rules by B-rules."""
        return 8 * self.a0 + 4 * self.a1 + 2 * self.b0 + self.b1

    def alice_zero(self, x: int) -> int:
        return self.a1 if x else self.a0

    def bob_zero(self, y: int) -> int:
        return self.b1 if y else self.b0

    def output_a(self, x: int) -> int:
        return 1 - self.alice_zero(x)

    def output_b(self, y: int) -> int:
        return 1 - self.bob_zero(y)

    def complement(self) -> "DeterministicStrategy":
        """Both parties flip every output."""
        return DeterministicStrategy(1 - self.a0, 1 - self.a1, 1 - self.b0, 1 - self.b1)

    def to_json(self) -> List[int]:
        return list(self.bits)


@dataclass(frozen=True)
class LhvAtom:
    """One hidden-variable value: weight q, input rule, output rule"""

    weight: float
    inputs: Inputs
    strategy: DeterministicStrategy

    def __post_init__(self):
        weight = float(self.weight)
        if not math.isfinite(weight):
            raise ValidationError("atom weight is not finite")
        object.__setattr__(self, "weight", weight)

    @property
    def ic(self) -> InputConditional:
        return self.inputs.to_input()

    @property
    def is_factorized(self) -> bool:
        return isinstance(self.inputs, FactorizedInputConditional)

    @classmethod
    def from_dict(cls, data: Dict) -> "LhvAtom":
        try:
            weight = data["q"]
            raw_inputs = data["p"]
            bits = data["s"]
        except KeyError as e:
            raise ValidationError(f"ensemble atom missing field {e}") from None
        if isinstance(raw_inputs, dict):
            try:
                inputs: Inputs = FactorizedInputConditional(
                    raw_inputs["alpha"], raw_inputs["beta"]
                )
            except KeyError as e:
                raise ValidationError(f"factorized inputs missing field {e}") from None
        elif isinstance(raw_inputs, (list, tuple)):
            inputs = InputConditional(tuple(raw_inputs))
        else:
            raise ValidationError("atom 'p' must be a list of 4 reals or {alpha, beta}")
        if not isinstance(bits, (list, tuple)):
            raise ValidationError("atom 's' must be a list of 4 bits")
        return cls(weight=weight, inputs=inputs, strategy=DeterministicStrategy.from_bits(bits))

    def to_dict(self) -> Dict:
        return {"q": self.weight, "p": self.inputs.to_json(), "s": self.strategy.to_json()}


@dataclass(frozen=True)
class LhvEnsemble:
    """A complete attack: a finite mixture of hidden-variable atoms.

    Construction only checks structure. Constraint checking against the
    averaging condition and randomness bounds lives in lhv_model.
    """

    atoms: Tuple[LhvAtom, ...]
    label: str = ""
    extras: Dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise ValidationError("ensemble must contain at least one atom")
        object.__setattr__(self, "atoms", atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __getitem__(self, idx: int) -> LhvAtom:
        return self.atoms[idx]

    @property
    def weights(self) -> np.ndarray:
        return np.array([atom.weight for atom in self.atoms])

    @property
    def inputs_matrix(self) -> np.ndarray:
        """Array of shape (atoms, 4) holding p_i(lambda_j)."""
        return np.array([atom.ic.p for atom in self.atoms])

    @property
    def strategies(self) -> List[DeterministicStrategy]:
        return [atom.strategy for atom in self.atoms]

    def moments(self) -> np.ndarray:
        """Averaged input distribution sum_j q_j p_i(lambda_j)."""
        return self.weights @ self.inputs_matrix

    @property
    def is_factorized(self) -> bool:
        return all(atom.is_factorized for atom in self.atoms)

    def with_meta(self, label: Optional[str] = None, **extras) -> "LhvEnsemble":
        merged = dict(self.extras)
        merged.update(extras)
        return LhvEnsemble(self.atoms, label=self.label if label is None else label, extras=merged)

    @classmethod
    def from_dict(cls, data: Dict) -> "LhvEnsemble":
        if not isinstance(data, dict) or not isinstance(data.get("atoms"), list):
            raise ValidationError("ensemble JSON needs an 'atoms' list")
        atoms = []
        for i, raw in enumerate(data["atoms"]):
            if not isinstance(raw, dict):
                raise ValidationError(f"ensemble atom {i} is not an object")
            try:
                atoms.append(LhvAtom.from_dict(raw))
            except ValidationError as e:
                raise ValidationError(f"ensemble atom {i}: {e}") from None
        return cls(
            atoms=tuple(atoms),
            label=str(data.get("label", "")),
            extras=dict(data.get("meta", {})),
        )

    def to_dict(self) -> Dict:
        result: Dict = {"atoms": [atom.to_dict() for atom in self.atoms]}
        if self.label:
            result["label"] = self.label
        if self.extras:
            result["meta"] = dict(self.extras)
        return result


@dataclass(frozen=True)
class RandomnessBounds:
    """Box constraints Q <= p(x,y|lambda) <= P on every input conditional.

    When P > 1 - 3Q the upper bound cannot be reached on one entry while the
    other three sit at Q; `effective_p` clamps it to 1 - 3Q.
    """

    P: float
    Q: float
    delta: Optional[float] = None

    def __post_init__(self):
        P, Q = float(self.P), float(self.Q)
        eps = TOL.probability
        if not (math.isfinite(P) and math.isfinite(Q)):
            raise ValidationError("P and Q must be finite")
        if Q < -eps:
            raise ValidationError(f"Q = {Q!r} is negative")
        if Q > QUARTER + eps:
            raise ValidationError(f"Q exceeds 1/4 (Q = {Q!r})")
        if P < QUARTER - eps:
            raise ValidationError(f"P is below 1/4 (P = {P!r})")
        if P > 1 + eps:
            raise ValidationError(f"P exceeds 1 (P = {P!r})")
        object.__setattr__(self, "P", min(max(P, QUARTER), 1.0))
        object.__setattr__(self, "Q", min(max(Q, 0.0), QUARTER))

    @classmethod
    def from_delta(cls, delta: float) -> "RandomnessBounds":
        """Symmetric bounds P = 1/4 + delta, Q = 1/4 - delta."""
        delta = float(delta)
        if not (-TOL.probability <= delta <= QUARTER + TOL.probability):
            raise ValidationError(f"delta must lie in [0, 1/4], got {delta!r}")
        delta = min(max(delta, 0.0), QUARTER)
        return cls(P=QUARTER + delta, Q=QUARTER - delta, delta=delta)

    @property
    def effective_p(self) -> float:
        return min(self.P, 1.0 - 3.0 * self.Q)

    @property
    def is_clamped(self) -> bool:
        return self.P > 1.0 - 3.0 * self.Q + TOL.probability

    @property
    def is_degenerate(self) -> bool:
        """Only the uniform input distribution is feasible."""
        return self.effective_p - self.Q <= TOL.probability

    def to_dict(self) -> Dict:
        result = {"P": self.P, "Q": self.Q}
        if self.delta is not None:
            result["delta"] = self.delta
        return result
