"""Exception hierarchy shared by all codec layers."""

from __future__ import annotations


class GdfError(Exception):
    """Base class for every error raised by this package.

    ``rule`` is a stable machine-readable identifier (the same namespace the
    validator uses); ``offset`` is the absolute file offset the problem refers
    to, when known.
    """

    def __init__(self, message: str, *, rule: str | None = None, offset: int | None = None):
        super().__init__(message)
        self.rule = rule
        self.offset = offset


class FormatError(GdfError):
    """The input is not a GDF file at all."""


class VersionError(FormatError):
    """The input is GDF, but of a major version this library does not handle."""


class StructureError(GdfError):
    """A section of the file is malformed or internally inconsistent."""


class TruncatedDataError(StructureError):
    """The data section ends mid-record.

    ``complete_records`` counts the records that are fully present and
    ``remainder_bytes`` the stray bytes after them.
    """

    def __init__(self, message: str, *, complete_records: int, remainder_bytes: int, **kw):
        super().__init__(message, **kw)
        self.complete_records = complete_records
        self.remainder_bytes = remainder_bytes


class DomainError(GdfError):
    """A value is outside the domain an operation or field accepts."""


class CapacityError(GdfError):
    """A value exceeds a hard limit of the on-disk format."""


class DiagnosticError(GdfError):
    """Strict-mode read failed because error-severity diagnostics were found.

    Carries the full diagnostic list so callers can report every finding, not
    just the first.
    """

    def __init__(self, message: str, diagnostics, **kw):
        super().__init__(message, **kw)
        self.diagnostics = diagnostics
