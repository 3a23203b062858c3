"""Hypergeometric motives over Q: parameters, Hodge data, monodromy, finite-field
traces, local L-data and the source varieties behind them."""

from .errors import (BadPrimeError, DegenerateError, FixtureMismatchError, HGMError,
                     InvariantError, MissingDataError, NotSplitError, ParseError,
                     PrecisionError, ValidationError)
from .family import FamilyParameter, from_cyclotomic, from_gamma, parse_family, stats
from .hodge import hodge_vector, hodge_vector_at_one, hypersurface_gamma
from .monodromy import classify, drop_rank, levelt

__version__ = "0.1.0"
