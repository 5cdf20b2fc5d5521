"""Exception and warning types shared across the package."""


class SineMCHError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SineMCHError):
    """Invalid grid, index, parameter, or scenario document."""


class NumericError(SineMCHError):
    """Non-finite data fed to an operator that requires finite input."""


class UnsupportedConfigurationError(SineMCHError):
    """Operation requested outside its supported parameter range."""


class HypothesisViolationError(SineMCHError):
    """Initial data violates a precondition of the breaking certificate."""


class UndefinedRatioError(SineMCHError):
    """Ratio diagnostics requested for identically zero data."""


class InvariantViolationError(SineMCHError):
    """A quantity the theory guarantees (e.g. sign of m along characteristics) broke."""


class HorizonTooLargeError(SineMCHError):
    """A Picard iterate blew up inside the requested horizon."""


class FormatError(SineMCHError):
    """Malformed snapshot file (bad magic, version, or truncation)."""


class DomainContaminationError(SineMCHError):
    """A tracked object left the trusted half-domain |x| <= L/2."""


class DomainContaminationWarning(UserWarning):
    """Field mass near the periodic seam exceeds the decay gate."""
