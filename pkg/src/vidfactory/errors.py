"""Exception hierarchy shared across the pipeline.

Every error raised by the library derives from VidFactoryError so callers
(CLI, service) can map failures to exit codes / HTTP responses uniformly.
Each class carries a stable machine-readable ``code``.
"""

from __future__ import annotations


class VidFactoryError(Exception):
    code = "error"


class ConfigurationError(VidFactoryError):
    code = "configuration_error"


class GeometryError(VidFactoryError):
    code = "geometry_error"


class ShapeMismatchError(VidFactoryError):
    code = "shape_error"


class LengthError(VidFactoryError):
    code = "length_error"


class DomainError(VidFactoryError):
    code = "domain_error"


class SequencingError(VidFactoryError):
    code = "sequencing_error"


class DataError(VidFactoryError):
    code = "data_error"


class ConditioningError(VidFactoryError):
    code = "conditioning_error"


class OutOfRangeError(VidFactoryError):
    code = "range_error"


class FormatError(VidFactoryError):
    code = "format_error"


class VersionError(VidFactoryError):
    code = "version_error"


class ValidationError(VidFactoryError):
    """Invariant violation with the offending field paths attached."""

    code = "validation_error"

    def __init__(self, message: str, fields: list[str] | None = None):
        super().__init__(message)
        self.fields = fields or []


class StateError(VidFactoryError):
    code = "state_error"


class NotFoundError(VidFactoryError):
    code = "not_found"


class RevisionConflictError(VidFactoryError):
    code = "revision_conflict"
