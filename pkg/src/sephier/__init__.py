"""Certified upper bounds for homogeneous optimization on the sphere.

The pipeline: realify a product-symmetric expectation into an even
homogeneous objective, relax with a moment matrix over exact-degree
monomials augmented by first order (KKT) rows, solve the SDP, and read the
dual multipliers back as an exactly checkable weighted sum of squares
identity.  Symmetric extension programs, witness search, primal oracles and
Groebner analysis of the stationarity ideal round out the toolbox.
"""

from .errors import (
    CapExceeded,
    DimensionMismatch,
    DualInfeasible,
    InconsistentConstraints,
    InputError,
    NotHermitian,
    NotHomogeneous,
    NotOnSphere,
    OddDegree,
    RankMismatch,
    SephierError,
    ShapeMismatch,
    SizeOverflow,
    SolverFailure,
    TooManyVariables,
)
from .groebner import (
    GroebnerBasis,
    RationalPolynomial,
    buchberger,
    degree_bound_report,
    dehomogenize,
    homogenize,
    is_zero_dimensional,
    kkt_generators,
    reduce,
    remainder_degree_bound,
    snap_to_rational,
)
from .kkt import KktSystem, build_kkt_system, kkt_residual, sphere_polynomial
from .oracle import OracleResult, local_ascend, multistart, net_enumerate, net_result
from .relaxation import (
    HierarchyConfig,
    MomentSolution,
    SosCertificate,
    build_dps_bipartite,
    build_moment_sdp,
    complex_to_real_block,
    extract_certificate,
    moment_solution,
    representative_matrix,
    solve_hierarchy,
    verify_certificate,
)
from .io import (
    file_digest,
    load_certificate,
    load_problem,
    load_state,
    save_certificate,
)
from .sdp_solver import SdpProblem, SdpSolution, presolve, solve
from .tensor_poly import (
    ComplexHermitianOperator,
    SparsePolynomial,
    SymmetricTensor,
    identity_tensor,
    monomial_count,
    monomials_of_degree,
    partial_derivative,
    poly_to_tensor,
    realify,
    symmetrize,
    tensor_to_poly,
)
from .witness import (
    Witness,
    dps_witness_search,
    traceless_hermitian_basis,
    validate_witness,
    witness_from_bound,
)

__all__ = [name for name in dir() if not name.startswith("_")]
