"""Exception types shared across the package.

The CLI maps ParameterError to exit code 2 (bad invocation) and every
other PipelineError to exit code 1 (runtime/data failure).
"""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(PipelineError, ValueError):
    """A parameter value violates its documented range or type."""


class ImageError(PipelineError, ValueError):
    """An input raster violates the package's image conventions."""


class DegenerateImageError(ImageError):
    """An image lacks the variation an operation needs (e.g. constant input)."""


class DataError(PipelineError):
    """A dataset or file-level failure: missing files, empty scans."""


class DecodeError(DataError):
    """A file exists but cannot be decoded as an image."""
