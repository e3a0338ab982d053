"""Variance representations as mergeable accumulators, with an exact oracle."""

__version__ = "0.1.0"

from .accumulators import (  # noqa: E402
    ALGORITHMS,
    Explicit,
    FirstElement,
    GroupSummary,
    MomentState,
    PairState,
    PairwiseStreamState,
    PrefixMean,
    VarianceResult,
    WelfordState,
    compensated_add,
    group_summarize,
    pair_merge,
    pair_state_from_value,
    pairwise_finalize,
    pairwise_stream_push,
    shifted_one_pass,
    textbook_one_pass,
    total_variance,
    two_pass,
    updating_wwh_push,
    updating_yc_push,
    variance,
)
from .errors import (  # noqa: E402
    DomainError,
    EmptyInput,
    InsufficientData,
    NegativeVariance,
    NonFiniteValue,
    UnsupportedParallelAlgorithm,
    VarianceError,
    ZeroMean,
)
from .oracle import correct_digits, exact_variance, mantissa_table  # noqa: E402
