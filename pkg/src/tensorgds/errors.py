"""Shared exception types, mapped to CLI exit codes by the front end."""


class FormatError(Exception):
    """Malformed or corrupted on-disk data: bad magic, checksum, truncation."""


class DimensionError(ValueError):
    """Shapes, extents, or mode indices violate an operation's contract."""


class DegeneracyError(Exception):
    """Numerically degenerate input: rank collapse, zero energy, or an
    indeterminate separability ratio."""


class KarcherConvergenceWarning(UserWarning):
    """Intrinsic mean iteration hit the iteration cap before tolerance."""
