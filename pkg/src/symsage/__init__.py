"""AM/GM-based nonnegativity certificates for signomials and polynomials,
with symmetric-group reductions, a diagonalization exactness class, zero-set
classification and monomial-mean inequalities."""

from .core import (
    POLYNOMIAL,
    SIGNOMIAL,
    Exponent,
    Signomial,
    SupportSplit,
    Term,
    diagonalize,
    evaluate,
    exponent,
    from_json_dict,
    polynomial,
    sig,
    signomial,
    to_json_dict,
)
from .geometry import (
    CircuitBudgetExceeded,
    CircuitVector,
    HullMembership,
    HullStatus,
    enumerate_circuits,
    hull_locate,
    sonc_admissible,
)
from .age import AgeCertificate, age_infimum, circuit_number, circuit_number_test, is_age
from .sage import SageBound, SageDecomposition, is_sage, reduce_support, sage_bound
from .symmetry import (
    OrbitData,
    SymmetricSageDecomposition,
    is_symmetric_sage,
    orbit,
    symmetric_witness_cone_decomposition,
    symmetrize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
