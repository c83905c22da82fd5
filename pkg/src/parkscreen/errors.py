"""Exception taxonomy for the parkscreen package."""


class ParkscreenError(Exception):
    """Base class for all package errors."""


class DatasetLayoutError(ParkscreenError):
    """Expected directory is missing from the corpus tree."""


class EmptyClassError(ParkscreenError):
    """A class directory exists but holds zero readable images."""


class StratificationError(ParkscreenError):
    """Split requested on input that does not contain both classes."""


class ConfigError(ParkscreenError):
    """A parameter is outside its allowed set."""


class InputError(ParkscreenError):
    """Operation input violates a precondition (mixed types, empty set, ...)."""


class PretrainedWeightsError(ParkscreenError):
    """Pretrained backbone weights are not available in this environment."""


class DivergenceError(ParkscreenError):
    """Training produced a non-finite loss; partial history is attached."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history


class ExportError(ParkscreenError):
    """Model bundle export failed."""


class BundleFormatError(ParkscreenError):
    """Bundle file is corrupt or its contents are inconsistent."""


class BundleVersionError(BundleFormatError):
    """Bundle was written by a newer, unsupported format version."""


class ImageDecodeError(InputError):
    """Submitted image bytes could not be decoded."""
