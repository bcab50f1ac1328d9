"""Exception hierarchy shared by all valmetric modules.

Three broad families map onto CLI exit codes: configuration problems,
data problems, and numerical failures.
"""


class ValmetricError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ValmetricError):
    """Invalid configuration value or unusable parameter combination."""


class DataError(ValmetricError):
    """Input data violates a documented precondition or invariant."""


class NumericalError(ValmetricError):
    """A numerical procedure failed (non-convergence, degenerate system)."""


# -- series loading / alignment ---------------------------------------------

class ParseError(DataError):
    """File could not be parsed in the declared format."""


class NonMonotoneTime(DataError):
    """Time column is not strictly increasing."""


class NonFiniteValue(DataError):
    """Series contains NaN or infinite entries."""


class EmptyOverlap(DataError):
    """Two series share no common time range."""


class GridMismatch(DataError):
    """Time grids differ and the alignment policy forbids resampling."""


class TooShortPair(DataError):
    """Aligned pair is shorter than the minimum usable length."""


# -- metric preconditions --------------------------------------------------

class ZeroRange(DataError):
    """Reference signal has zero range; range-normalization undefined."""


class ZeroMean(DataError):
    """Reference signal has zero mean; mean-normalization undefined."""


class ZeroVariance(DataError):
    """Signal variance is zero; variance-based metric undefined."""


class ZeroEnergy(DataError):
    """Signal energy is zero; energy-normalized metric undefined."""


class DegenerateCorridor(DataError):
    """Reference peak amplitude is zero; corridor width collapses."""


class LagOutOfRange(ConfigError):
    """Requested cross-correlation lag window is invalid for the pair."""


class RatingOutOfRange(DataError):
    """Expert rating lies outside the [0, 1] scale."""


# -- feature pipeline / regression -----------------------------------------

class AllFeaturesMissing(DataError):
    """Every feature column was dropped; nothing left to regress on."""


class TooFewRows(DataError):
    """Not enough observations for the requested fit or split."""


class MissingFeature(DataError):
    """A feature required by the fitted model is absent at predict time."""


class NonConvergence(NumericalError):
    """Iterative solver exhausted its sweep budget.

    Carries the iteration count in ``iterations``.
    """

    def __init__(self, message: str, iterations: int):
        super().__init__(message)
        self.iterations = iterations


# -- rating service ---------------------------------------------------------

class EmptySession(DataError):
    """Session creation requires at least one pair."""


class DuplicatePair(DataError):
    """Pair id already present in the session store."""


class UnknownSession(DataError):
    """No session with the given id."""


class UnknownPair(DataError):
    """No pair with the given id."""


class NoRatedPairs(DataError):
    """Export requested but no pair in the session has any rating."""
