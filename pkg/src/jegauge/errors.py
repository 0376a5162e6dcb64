"""Exception hierarchy shared by all jegauge modules.

The CLI maps these onto exit codes: validation problems exit 2, I/O and
missing-resource problems exit 3, incompatible inputs exit 4.
"""


class JeGaugeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(JeGaugeError):
    """Input violates a documented invariant (bad value, bad schema)."""


class FormatError(ValidationError):
    """A file container is malformed (bad magic, bad header, short payload)."""


class UnsupportedFormatError(FormatError):
    """The container is recognized but uses an unsupported variant."""


class DimensionError(ValidationError):
    """Array extents do not match what the operation requires."""


class BoundsError(ValidationError):
    """A region lies (partly) outside the extents it is applied to."""


class UndefinedInputError(ValidationError):
    """The operation is undefined for this input (empty, zero variance)."""


class QuotaError(ValidationError):
    """A sampling plan cannot be satisfied from the given sources."""


class IncompatibleReportsError(JeGaugeError):
    """Reports being merged were produced under different configurations."""


class ResourceError(JeGaugeError):
    """A required external resource (e.g. replacement image) is missing."""
