"""Exception types shared across the package."""


class ClusterBootError(Exception):
    """Base class for all library errors."""


class InvalidDesign(ClusterBootError):
    """Design parameters outside their admissible range."""


class InvalidTruth(ClusterBootError):
    """Generative-model parameters outside their admissible range."""


class MalformedInput(ClusterBootError):
    """Unparseable CSV/JSON input; message names the offending location."""


class EmptyPopulation(ClusterBootError):
    """A population with no observations."""


class SingletonPopulation(ClusterBootError):
    """A population with a single observation where a variance is required."""


class DegenerateK(ClusterBootError):
    """Fewer populations than the operation requires."""


class NonPositiveVariance(ClusterBootError):
    """A studentizing variance estimate is zero or negative."""


class NonPositiveScale(ClusterBootError):
    """Scale parameter must be strictly positive."""


class InsufficientReplicates(ClusterBootError):
    """Too few bootstrap replicates for a stable quantile at the requested level."""


class TooLarge(ClusterBootError):
    """Exhaustive enumeration would exceed the outcome budget."""


class ZeroGamma(ClusterBootError):
    """Between-population variance is zero where a positive value is required."""


class GridTooSmall(ClusterBootError):
    """Rate experiments need at least three population counts."""


class EmptyInput(ClusterBootError):
    """An operation received an empty sample."""
