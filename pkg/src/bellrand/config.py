"""
Numerical constants and tolerances
"""

import math
from dataclasses import dataclass

# Maximal quantum values (Tsirelson) of the two functionals
J_QUANTUM = (math.sqrt(2.0) - 1.0) / 2.0
J_CHSH_QUANTUM = 2.0 * math.sqrt(2.0)

# Bound on |dJ/dalpha| + |dJ/dbeta| over the unit square
FACTORIZABLE_LIPSCHITZ = 8.0
DEFAULT_GRID_N = 512
MIN_GRID_N = 64

RNG_ALGORITHM = "PCG64"
SIM_CHUNK = 1_000_000

CSV_DIGITS = 12


@dataclass(frozen=True)
class Tolerances:
    """Comparison tolerances shared across modules"""

    probability: float = 1e-12
    averaging: float = 1e-9
    bound: float = 1e-9
    factorizable: float = 1e-6
    basis_residual: float = 1e-10


TOL = Tolerances()

# Largest number of candidate bases the enumerating LP solver will walk
ENUMERATE_LIMIT = 2_000_000
# Iteration cap for local refinement of numerically constructed attacks
REFINE_MAXITER = 500
