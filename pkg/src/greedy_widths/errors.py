"""Exception types shared across the package."""


class GreedyWidthsError(Exception):
    """Base class for all package errors."""


class DimensionError(GreedyWidthsError):
    """Vector or matrix shapes do not match the declared space."""


class ConfigError(GreedyWidthsError):
    """Invalid configuration value (bad exponent, empty set, ...)."""


class SolverError(GreedyWidthsError):
    """An iterative solver failed to converge.

    Carries the best iterate found so far in ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class RankError(GreedyWidthsError):
    """Rank-deficient input where independence is required."""


class DegenerateCertificate(GreedyWidthsError):
    """Requested a dual certificate for a point inside the subspace."""


class RegimeError(GreedyWidthsError):
    """Problem outside the certified brute-force regime."""


class StaleTraceError(GreedyWidthsError):
    """Trace fingerprint does not match the supplied compact set."""


class MissingCertificateError(GreedyWidthsError):
    """Greedy trace lacks the dual certificates required here."""


class LiftError(GreedyWidthsError):
    """Orthonormality audit of operator-ball lifts failed."""


class PremiseError(GreedyWidthsError):
    """A theorem premise could not be certified on the instance."""


class TraceFailure(GreedyWidthsError):
    """A proof-trace inequality was violated beyond tolerance."""

    def __init__(self, tag, slack):
        super().__init__(f"proof-trace inequality {tag!r} violated, slack={slack:.3e}")
        self.tag = tag
        self.slack = slack


class SandwichError(GreedyWidthsError):
    """Ellipsoid sandwich failed validation on fresh samples."""
