"""Liouvillian solutions of the periodic biconfluent Heun equation.

Kovacic's algorithm (Case 1) on rational normal forms, the closed-form
eigen-solutions of the periodic equation, Kummer-function kernels and
numerical certificates for orthogonality and the integral equation.
"""
from .errors import (
    ConditionNotMet,
    DivisionNearZero,
    HypothesisViolated,
    InconsistentFactorization,
    LiouvillianError,
    NonConvergence,
    NotAPole,
    OddHighOrder,
    PochhammerPole,
    RepeatedRootOutsideCase2,
    SingularSystem,
)
from .kovacic import (
    Case1Candidate,
    LiouvillianSolution,
    SqrtPart,
    case1_solve,
    degree_set,
    necessary_conditions,
    solve_step3,
    sqrt_part,
    step3_spectrum,
)
from .pbhe import (
    BHSolution,
    EigenSet,
    PBHEParams,
    build_solution,
    build_solutions,
    degenerate_solutions,
    eigenvalues_K1,
    k_constants,
    quantization_n,
    recurrence_A,
    to_generalized_bessel,
    to_normal_form,
)
from .poly_rational import (
    INFINITY,
    LaurentData,
    PartialFraction,
    Poly,
    RationalFn,
    laurent_at_infinity,
    laurent_at_pole,
    order_at_infinity,
    partial_fractions,
    poly_arith,
)
from .special_fn import KernelSpec, KummerParams, hyp1f1, kernel_K, kummer_phi, pochhammer
from .verify import (
    PathSpec,
    VerificationReport,
    double_orthogonality,
    fredholm_consistency,
    fredholm_lambda,
    ode_residual,
    quad_line,
    single_orthogonality,
)

__version__ = "0.1.0"
