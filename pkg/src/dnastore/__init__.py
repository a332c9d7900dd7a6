"""Coding-theory numerics for concatenated DNA storage codes: exact error
exponents, occupancy laws, codebook constructions, separation bounds, and
channel simulation."""

from .errors import CapacityError, DnastoreError, DomainError, ShortfallError
from .params import ScalingParams
from .exponents import (
    ExponentParams,
    ExponentResult,
    LowRatePrediction,
    exponent_multinomial,
    exponent_poisson,
    lowrate_prediction,
    rate_threshold,
    solve_r,
)
from .balls_bins import (
    DistinctCountDistribution,
    DistinctCountSample,
    OccupancyQuery,
    distinct_count_dp,
    empirical_exponent,
    p_occupancy,
    p_via_identity,
    q_surjection,
    sample_distinct_count,
)
from .codebook import (
    Codebook,
    Codeword,
    MultisetSeparationReport,
    SeparationBounds,
    compute_separation_bounds,
    greedy_index_codebook,
    k1_upper_bound,
    k2_lower_bound,
    k3_lower_bound,
    load_codebook,
    max_pairwise_intersection,
    repetition_codebook,
    save_codebook,
    verify_multiset_k2,
)
from .channel import (
    DecoderConfig,
    SequencingErrorModel,
    SimulationReport,
    TrialOutcome,
    adversarial_attack_trial,
    bound_adversarial,
    bound_erasure,
    bound_no_seq,
    bound_random,
    estimate_error_probability,
    run_trial,
)

__version__ = "0.1.0"
