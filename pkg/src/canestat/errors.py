"""Exception and warning types shared across the package."""


class CanestatError(Exception):
    """Base class for all canestat errors."""


class GridFormatError(CanestatError):
    """Raised when an ASCII grid cannot be parsed.

    Carries the 1-based line number of the offending input line so callers
    can point users at the problem.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MaskFormatError(CanestatError):
    """Raised when a block-mask JSON document is malformed."""


class BlockTooSmall(CanestatError):
    """Raised when a block yields fewer valid pixels than required."""

    def __init__(self, block_id, n_valid, min_pixels):
        self.block_id = block_id
        self.n_valid = n_valid
        self.min_pixels = min_pixels
        super().__init__(
            f"block {block_id!r}: {n_valid} valid pixels, need at least {min_pixels}"
        )


class EmptySelection(CanestatError):
    """Raised when a trimmed mean is asked for over no usable bins."""


class NegativeHeight(CanestatError):
    """Raised when an estimated canopy elevation does not exceed the ground."""

    def __init__(self, block_id, dchm):
        self.block_id = block_id
        self.dchm = dchm
        super().__init__(f"block {block_id!r}: non-positive height {dchm!r} m")


class MissingMetadata(CanestatError):
    """Raised when a height estimate has no matching block definition."""

    def __init__(self, block_id):
        self.block_id = block_id
        super().__init__(f"block {block_id!r} has no metadata row")


class DegenerateDesign(CanestatError):
    """Raised when a regression design matrix is singular (or n < 2)."""


class ConfigError(CanestatError):
    """Raised for unreadable, incomplete, or out-of-range pipeline configs."""


class CanestatWarning(UserWarning):
    """Non-fatal conditions (empty masks, dropped zones, ...)."""
