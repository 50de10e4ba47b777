"""Exception types shared across the toolkit."""


class MorphkitError(Exception):
    """Base class for all toolkit errors."""


class FormatError(MorphkitError):
    """Malformed or invalid input data (files, payloads, records)."""


class GeometryError(MorphkitError):
    """Degenerate or invalid geometric input (collinear points, zero-area triangles)."""


class AdapterError(MorphkitError):
    """External adapter process failed, timed out, or returned an invalid payload."""
