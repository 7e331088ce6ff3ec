"""Rate-distortion-perception functions of finite-alphabet sources.

Closed form for a Bernoulli source with Hamming distortion and TV perception,
a numerical solver for general sources, property checks and a block-code
simulator for the converse.
"""
from .bernoulli import BernoulliSolution, BernoulliSpec, Region, rdp_rate, region_bounds, shannon_rate, verify_solution
from .converse import BlockCodeSpec, ConverseResult, simulate_block_code
from .errors import (
    DimensionMismatch,
    EmptyAlphabet,
    Infeasible,
    InfeasibleOnGrid,
    InvalidTernary,
    NegativeProbability,
    NotConverged,
    NotNormalized,
    PerceptionInactive,
    RdpError,
    TrialBudgetTooSmall,
    VerificationFailed,
    ZeroMarginalOutput,
)
from .measures import (
    DistortionMatrix,
    DivergenceKind,
    a2_profile,
    divergence,
    expected_distortion,
    hamming_matrix,
    kl_bits,
    min_distortion,
    squared_error_matrix,
    tv_distance,
    zero_rate_distortion,
)
from .prob import (
    Channel,
    JointPmf,
    Pmf,
    binary_entropy,
    compose,
    entropy,
    joint,
    mutual_information,
    output_marginal,
    posterior,
    ternary_entropy,
    validate_channel,
    validate_pmf,
)
from .solver import (
    RdpCurve,
    RdpPoint,
    RdpSurface,
    SolveOptions,
    SolveResult,
    brute_force_binary,
    solve,
    sweep_curve,
    sweep_surface,
)
from .theorems import (
    PropertyReport,
    check_convexity,
    check_convexity_bernoulli,
    check_monotonicity,
    check_surface_convexity,
    closed_form_surface,
    perception_gap,
    posterior_sampling_decoder,
    verify_thm2_bound,
    verify_thm2_doubling,
)

__all__ = [name for name in dir() if not name.startswith("_")]
