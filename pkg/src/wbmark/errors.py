"""Exception hierarchy shared by every wbmark module."""


class WatermarkError(Exception):
    """Base class for all errors raised by wbmark."""


class FormatError(WatermarkError):
    """Input bytes do not follow the expected file grammar."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(FormatError):
    """Well-formed input using a feature we do not handle (e.g. 4:4:4)."""


class TruncationError(FormatError):
    """Stream ended inside a frame or its length is not a frame multiple."""

    def __init__(self, message, frame_index=None):
        if frame_index is not None:
            message = f"{message} (frame index {frame_index})"
        super().__init__(message)
        self.frame_index = frame_index


class SinkError(WatermarkError):
    """Writing to an output stream failed part way through."""

    def __init__(self, message, bytes_written):
        super().__init__(f"{message} after {bytes_written} bytes")
        self.bytes_written = bytes_written


class SyncError(WatermarkError):
    """Side information (WB map, dims, frame count) disagrees with a video."""


class ParameterError(WatermarkError, ValueError):
    """Invalid argument value."""


class CapacityError(WatermarkError):
    """No watermarking blocks are available to carry the payload."""


class AttackExecutionError(WatermarkError):
    """An external encoder/decoder exited with failure."""

    def __init__(self, message, stderr=""):
        super().__init__(message)
        self.stderr = stderr
