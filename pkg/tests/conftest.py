"""
Shared fixtures for bellrand tests
"""

import numpy as np
import pytest

from bellrand.closed_form import build_attack
from bellrand.models import (
    GENERAL,
    DeterministicStrategy,
    InputConditional,
    LhvAtom,
    LhvEnsemble,
    RandomnessBounds,
)


def shifted_ensemble(rng, n_base=3, strategy_pool=6):
    """Random ensemble that meets the averaging constraint.

    Each random input conditional appears with all four cyclic shifts at
    equal weight, so every setting averages to 1/4.
    """
    base_weights = rng.dirichlet(np.ones(n_base))
    pool = rng.choice(16, size=strategy_pool, replace=False)
    atoms = []
    for w, p in zip(base_weights, rng.dirichlet(np.ones(4), size=n_base)):
        for shift in range(4):
            s = DeterministicStrategy.from_index(int(rng.choice(pool)))
            atoms.append(LhvAtom(w / 4, InputConditional(tuple(np.roll(p, shift))), s))
    return LhvEnsemble(tuple(atoms))


@pytest.fixture
def rng():
    """Fixed-seed generator so randomized tests are reproducible"""
    return np.random.default_rng(20240611)


@pytest.fixture
def random_ensemble(rng):
    """Factory for random ensembles that meet the averaging constraint"""
    return lambda: shifted_ensemble(rng)


@pytest.fixture
def third_bounds():
    """P = 1/3, Q = 0: the general CH optimum is 5/6"""
    return RandomnessBounds(1.0 / 3.0, 0.0)


@pytest.fixture
def general_attack(third_bounds):
    return build_attack(GENERAL, third_bounds)


@pytest.fixture
def uniform_ensemble():
    """Single hidden variable with uniform inputs that never outputs 0"""
    return LhvEnsemble(
        (LhvAtom(1.0, InputConditional.uniform(), DeterministicStrategy(0, 0, 0, 0)),)
    )


@pytest.fixture
def ensemble_file(tmp_path, general_attack):
    """General P = 1/3 attack written as JSON"""
    from bellrand.io import write_json

    path = tmp_path / "attack.json"
    write_json(path, general_attack.to_dict())
    return path
