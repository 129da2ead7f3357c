"""Submodular maximization under a submodular knapsack constraint.

Variational EM/SEM solvers with greedy and exhaustive baselines, modular
bounds, curvature certificates and coverage instance tooling.
"""

from .analysis import (
    ApproximationCertificate,
    build_certificate,
    certify,
    curvature,
    verify_proposition3,
    verify_theorem2,
)
from .bounds import (
    ModularBound,
    PermutationChain,
    chain_from_anchor,
    eval_lower_bound,
    lower_bound_at,
    modular_lower_bound,
    nemhauser_divergence,
    nemhauser_upper_bound,
    nemhauser_upper_bound_alt,
)
from .instances import (
    CoverageInstance,
    GeneratorParams,
    InstanceFormatError,
    coverage_constraint,
    coverage_objective,
    generate,
    load,
    save,
    tiny,
)
from .setfn import (
    ContractError,
    GroundSet,
    SetFunction,
    SubsetMask,
    check_monotone,
    check_submodular,
    evaluate,
    marginal_gain,
    max_singleton_gain,
    value_table,
)
from .solvers import (
    IterationTrace,
    SolveResult,
    SolverConfig,
    e_step,
    m_step,
    solve_em,
    solve_exact,
    solve_greedy,
    solve_sem,
)

__version__ = "0.1.0"
