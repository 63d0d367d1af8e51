"""Exact structural analysis of leading-order profiles for singularly
perturbed mass-transfer systems.

The package builds, over exact rational arithmetic, the symmetric matrix
that governs the limiting parabolic profile of a hyperbolic relaxation
system with a simple conserved mode, determines its exact rank and
spectrum, checks the rank law ``rank = min(n - 1, K)`` on randomized
instance families, reproduces the closed forms of the two-state family
symbolically, and evaluates the limiting Gaussian profile numerically.
"""

from .exact_linalg import (
    CHARPOLY_SIZE_LIMIT,
    DegenerateConstraint,
    InconsistentSystem,
    Polynomial,
    Rational,
    RationalMatrix,
    SizeLimitExceeded,
    Vector,
    ZeroPolynomial,
    as_rational,
    charpoly_exact,
    det_exact,
    dot,
    hurwitz_stable,
    inverse,
    nullspace,
    outer,
    rank_exact,
    solve_constrained,
)
from .model import (
    FAMILIES,
    MARKOV_FAMILY,
    SIMILARITY_FAMILY,
    GenerationFailed,
    GeneratorConfig,
    KernelDimensionError,
    NonNormalizable,
    NotStable,
    SpectralData,
    SystemSpec,
    generate_instance,
    null_pair_normalized,
    validate_system,
)
from .asymptotics import (
    DISSIPATIVITY_TOLERANCE,
    RANK_AGREEMENT_TOLERANCE,
    NotDissipative,
    ProfileQuery,
    SingularCovariance,
    StructureReport,
    TransferStructure,
    analyze_structure,
    build_M,
    group_inverse,
    jacobi_eigenvalues,
    leading_term_eval,
    pde_residual,
    phi0_eval,
    velocities,
)
from .formats import (
    FORMAT_VERSION,
    DimensionError,
    ParseError,
    build_report,
    instance_to_dict,
    load_instance_file,
    parse_instance,
    parse_rational,
)
from .multipoly import MultiPoly, RatFunc, ZeroDenominator, poly_divexact, poly_gcd
from .symbolic import (
    MAX_SYMBOLIC_DIRECTIONS,
    ClosedFormSpectrum,
    RankIdentityFailed,
    SymbolicStructure,
    build_M_parametric,
    eigen_closed_form_n2,
    symbolic_report,
    verify_rank_one_identity,
)
from .search import (
    BREACH_KINDS,
    Breach,
    CampaignConfig,
    CellResult,
    Classification,
    SearchReport,
    Violation,
    classify_instance,
    derive_instance_seed,
    report_to_dict,
    run_campaign,
)

__version__ = "0.1.0"
