"""Sparse-grid polynomial-chaos operator surrogates on the periodic torus."""

from .allocate import (
    MEAN_SQUARE,
    WORST_CASE,
    AllocationPlan,
    allocate_mean_square,
    allocate_worst_case,
    budget_for,
    build_output_sets,
)
from .multiindex import (
    DownwardClosedSet,
    MultiIndex,
    active_dims,
    closure,
    combination_coefficients,
    is_downward_closed,
    leq,
    max_degree,
    omega,
)
from .pde import EllipticityError, PdeOracle, SolverError
from .smolyak import GridPoint, SmolyakOperator, grid, interpolate, tensor_interpolate
from .spaces import (
    CubeDomain,
    FourierBasisSpec,
    FourierField,
    MembershipError,
    WeightSequence,
    decode,
    encode,
    lift,
    rescale,
    sample_cube,
)
from .surrogate import (
    ADAPTIVE,
    APRIORI,
    CandidatePool,
    ErrorReport,
    IdentityOracle,
    SurrogateModel,
    build,
    candidate_pool,
    mean_square_error,
    theoretical_t_max,
    worst_case_error,
)
from .univariate import (
    LejaSequence,
    lagrange_all,
    lagrange_basis,
    lebesgue_constant,
    legendre,
    legendre_tensor,
    leja_points,
)

__version__ = "0.1.0"
