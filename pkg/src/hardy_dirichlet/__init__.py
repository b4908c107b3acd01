"""L^q norms of Dirichlet polynomials through the Bohr lift to the polytorus."""

from .arith import (
    FactorTable,
    MultiplicativeSpec,
    PrimeSumReport,
    build_factor_table,
    builtin_spec,
    divisor_count,
    eval_a,
    lambda_a,
    load_spec,
    mobius,
    multiplicative_values,
    quartic_tail,
)
from .bohr import (
    DirichletPolynomial,
    MultiIndex,
    TorusPoint,
    apply_T,
    character_values,
    convolution_power,
    lift_eval,
    multi_index,
    multiply,
    partial_sum,
)
from .circle import (
    CirclePolynomial,
    QuadratureConfig,
    blaschke_multiply,
    circle_norm,
    euler_factor_norm,
    point_lemma_lhs,
)
from .errors import ConfigurationError, DomainError, HardyDirichletError, ResourceError
from .estimates import NormEstimate
from .norms import (
    SamplerConfig,
    norm_euler_product,
    norm_exact_even,
    norm_exact_two,
    norm_mc_torus,
    norm_time_average,
    torus_moments,
)

__version__ = "0.1.0"
