"""Exception hierarchy shared across the package."""


class CausalSurgeryError(Exception):
    """Base class for all package errors."""


class DomainError(CausalSurgeryError):
    """Input outside the mathematical domain of an operation
    (non-SPD form, non-positive lapse/factor, time outside validity window)."""


class DataError(CausalSurgeryError):
    """A sampled value violated a field invariant; message identifies the point."""


class ConstraintError(CausalSurgeryError):
    """A plateau constraint is inconsistent with the field it is imposed on."""


class SpliceError(CausalSurgeryError):
    """Two metrics disagree on the overlap slab where they were to be glued."""


class ShapeError(CausalSurgeryError):
    """Mismatched spatial domains or array shapes."""


class OrderError(CausalSurgeryError):
    """Events supplied in the wrong causal/coordinate-time order."""


class CertificateError(CausalSurgeryError):
    """A precondition certified by a verifier failed; message carries the witness."""


class ConfigError(CausalSurgeryError):
    """Scenario configuration invalid; message carries the offending field path."""


class FormatError(CausalSurgeryError):
    """A dump or config file could not be parsed; message carries the location."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ExprSyntaxError(CausalSurgeryError):
    """Expression text failed to parse; ``offset`` is the byte position."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExprEvalError(CausalSurgeryError):
    """Numeric domain error during expression evaluation; message names the
    offending subexpression."""
