"""Solve matrix trigonometric moment problems from S_0..S_d with a shift-isometry model.

Typical pipeline::

    m = validate_moments(N, d, S)
    t = build_toeplitz(m)
    check_solvable(t).solvable
    a = build_isometry(factor_gram(t))
    sol = canonical_solution(a, V)          # V unitary, δ x δ
    F = generalized_resolvent(a, p, zeta)   # p any contraction parameter
"""

from .errors import (
    ContractivityError,
    DefectSizeError,
    InconsistentOperatorError,
    NotSolvableError,
    TrigMomentError,
    ValidationError,
)
from .extension import (
    ExtensionParam,
    ResolventValue,
    direct_unitary_resolvent,
    extension_operator,
    generalized_resolvent,
    identity_param,
    make_constant_param,
    make_polynomial_param,
    make_sampler_param,
    resolvent_outside_disk,
    resolvent_sampler,
    resolvent_values,
    taylor_moments,
)
from .gram import CoordinateSpace, Subspace, factor_gram, inner, orth_complement, project, subspace_span
from .isometry import IsometryA, ZetaDecomposition, build_isometry, decompose_into_hzeta_ln, power_consistency_check
from .measures import Atom, DiscreteSolution, GridDistribution
from .moments import (
    BlockToeplitz,
    MomentSequence,
    SolvabilityReport,
    build_toeplitz,
    check_solvable,
    trivial_solution_d0,
    validate_moments,
)
from .solutions import (
    VerificationReport,
    canonical_solution,
    compare_solutions,
    poisson_invert,
    sample_points,
    verify_solution,
)

__version__ = "0.1.0"
