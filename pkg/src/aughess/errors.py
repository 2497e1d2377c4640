"""Exception types shared across the package."""


class AugHessError(Exception):
    """Base class for package errors."""


class ArgumentError(AugHessError, ValueError):
    """Invalid argument (dimension mismatch, out-of-range index, bad parameter)."""


class AdmissibilityError(AugHessError):
    """A matrix left the open cone on which the operator is elliptic.

    Carries the offending margin (and, for grid states, the worst node).
    """

    def __init__(self, message, margin=None, node=None):
        super().__init__(message)
        self.margin = margin
        self.node = node


class NonsmoothPointError(AugHessError):
    """Gradient requested at a point where the active branch is tied."""

    def __init__(self, message, branches=()):
        super().__init__(message)
        self.branches = tuple(branches)


class ConstraintError(AugHessError):
    """Evaluation outside a spec's constraint surface (e.g. reflector with z <= 0)."""


class ConfigError(AugHessError):
    """Bad run configuration: unknown key, missing required value, parse failure."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class SeedError(AugHessError):
    """Initial guess for a solve is not admissible on the grid."""
