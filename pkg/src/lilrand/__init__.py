"""Iterated-logarithm randomness testing of +-1 sequences, with the band
counter's model law, a chi-squared decision, place-selection betting games and
block-normality checks."""

__version__ = "0.1.0"

from .bitio import (
    BitString,
    Corpus,
    SignSequence,
    decode_base10_record,
    encode_base10,
    load_corpus,
    rescale,
)
from .dist import (
    BandMaps,
    CounterDistribution,
    band_maps,
    consecutive_conditional,
    counter_distribution_exact,
    counter_distribution_model,
    counter_distribution_paper,
    counter_zero_probability,
    event_probability,
    heaviside,
    nonconsecutive_conditional_zero,
    pearson_projector,
    walk_pmf,
)
from .errors import (
    BitOverflowError,
    CapacityError,
    DomainError,
    EmptyExtractionError,
    NoQuantileError,
    ParseError,
)
from .logprob import LogProb, LogValue
from .stattest import (
    BinomialModel,
    FrequencyTable,
    TestDecision,
    chi2_binomial_cumulative,
    chi2_density,
    chi2_quantile,
    chi2_stat_binomial,
    chi2_stat_multinomial,
    decide,
    multinomial_joint_logmass,
    pearson_applicability,
)
from .vmcgame import (
    MatrixGame,
    PayoffLedger,
    SelectionRule,
    bias,
    check_minimax_theorem,
    extract,
    get_rule,
    maxminimizers,
    prefix_order,
    pure_nash,
    run_betting_game,
)
from .walk import (
    CounterResult,
    WalkTrace,
    borel_deviation,
    counter,
    lil_ratio,
    phi,
    sample_mean,
    walk_sums,
)

__all__ = [
    "BandMaps",
    "BinomialModel",
    "BitOverflowError",
    "BitString",
    "CapacityError",
    "Corpus",
    "CounterDistribution",
    "CounterResult",
    "DomainError",
    "EmptyExtractionError",
    "FrequencyTable",
    "LogProb",
    "LogValue",
    "MatrixGame",
    "NoQuantileError",
    "ParseError",
    "PayoffLedger",
    "SelectionRule",
    "SignSequence",
    "TestDecision",
    "WalkTrace",
    "band_maps",
    "bias",
    "borel_deviation",
    "check_minimax_theorem",
    "chi2_binomial_cumulative",
    "chi2_density",
    "chi2_quantile",
    "chi2_stat_binomial",
    "chi2_stat_multinomial",
    "consecutive_conditional",
    "counter",
    "counter_distribution_exact",
    "counter_distribution_model",
    "counter_distribution_paper",
    "counter_zero_probability",
    "decide",
    "decode_base10_record",
    "encode_base10",
    "event_probability",
    "extract",
    "get_rule",
    "heaviside",
    "lil_ratio",
    "load_corpus",
    "maxminimizers",
    "multinomial_joint_logmass",
    "nonconsecutive_conditional_zero",
    "pearson_applicability",
    "pearson_projector",
    "phi",
    "prefix_order",
    "pure_nash",
    "rescale",
    "run_betting_game",
    "sample_mean",
    "walk_pmf",
    "walk_sums",
]
