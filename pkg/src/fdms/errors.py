"""Exception types raised across the package.

Everything derives from :class:`FDMSError` so callers can catch the whole
family; most types also subclass the closest builtin (``ValueError``,
``KeyError``) so generic handling keeps working.
"""


class FDMSError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(FDMSError, ValueError):
    """An input violated a documented precondition or type invariant."""


class DuplicateJointError(ValidationError):
    """A hand-model document declares the same joint name twice."""


class InvalidSymbolError(ValidationError):
    """A movement-unit string contains a character outside X/Y/Z/O."""


class NonCanonicalUnitError(ValidationError):
    """A movement-unit string violates the sequential symbol-assignment rule."""


class MultiGroupError(ValidationError):
    """A single-group operation received a unit with several motion groups."""


class DegenerateVarianceError(ValidationError):
    """Contribution ratios requested for a model with zero total variance."""


class NotFoundError(FDMSError, KeyError):
    """A database lookup referenced an unknown entry name."""


class DuplicateNameError(ValidationError):
    """A database registration reused an existing entry name."""


class FileFormatError(ValidationError):
    """A file failed schema validation or re-validation of invariants."""


class StreamExhaustedError(FDMSError):
    """A scripted phase ran out of input postures before terminating."""
