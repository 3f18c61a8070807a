"""Typed exceptions shared across the package."""


class QcompError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(QcompError):
    """Operands have incompatible shapes."""


class NotHermitian(QcompError):
    """Matrix is not Hermitian within tolerance."""


class NotPositiveDefinite(QcompError):
    """Cholesky factorization failed; matrix is not positive definite."""


class NoConvergence(QcompError):
    """Iterative routine exceeded its iteration cap."""


class InvalidBits(QcompError):
    """Quantizer resolution must be a positive integer or infinity."""


class NegativePower(QcompError):
    """Transmit powers must be nonnegative."""


class Infeasible(QcompError):
    """Target SINRs are outside the feasible region (power diverged).

    Carries the partial solve report in ``report`` when available.
    """

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class NonPositiveTau(QcompError):
    """Downlink scaling produced a nonpositive coefficient."""


class SingularSigma(QcompError):
    """Downlink scaling matrix is numerically singular."""


class SingularSystem(QcompError):
    """Deterministic per-cell linear system is numerically singular."""


class RankDeficient(QcompError):
    """In-cell channel matrix does not have full column rank."""


class ConfigError(QcompError):
    """Experiment configuration file is malformed."""
