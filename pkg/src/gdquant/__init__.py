"""Quantization dimension of Markov-type measures on ratio-specified
graph-directed fractals."""

__version__ = "0.1.0"

from .core import (
    Antichain,
    MarkovSystem,
    build_lambda,
    format_word,
    lambda_log_weights,
    load_config,
    omega,
    parse_word,
    validate_system,
    word_weights,
)
from .errors import *  # noqa: F401,F403
from .geometry import realize, sample_measure
from .graph import comparability, scc_decompose
from .measure import diagnostics, growth_series, normalized_sum
from .quantizer import DiscreteMeasure, dimension_fit, discretize, lloyd
from .spectral import Classification, classify, solve_sr
