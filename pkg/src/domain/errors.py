"""
SBCC Error Hierarchy
Exceptions raised by the coding, channel, decoding and simulation layers
"""


class SbccError(Exception):
    """Base class for every error raised by the simulator"""


class LengthMismatchError(SbccError, ValueError):
    """Two sequences that must share the block length T do not"""


class NonFiniteLlrError(SbccError, ValueError):
    """A NaN or infinite soft value reached the trellis decoder"""


class IndexOutOfWindowError(SbccError, IndexError):
    """Block index outside the current decoding window"""


class WindowUnderfilledError(SbccError, RuntimeError):
    """Fewer blocks received than the window needs outside of the frame-end flush"""


class ConfigurationError(SbccError, ValueError):
    """Decoder or simulation parameters violate their invariants"""
