"""Exception hierarchy.

Every error carries a ``stage`` naming the processing step that failed, so
the CLI can print ``[stage] message`` and exit non-zero.
"""


class LidError(Exception):
    """Base class for all svdlid errors."""

    stage = "svdlid"

    def __init__(self, message, stage=None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage

    def __str__(self):
        return f"[{self.stage}] {super().__str__()}"


# audio

class WavError(LidError):
    stage = "audio"


class WavNotFoundError(WavError, FileNotFoundError):
    pass


class WavFormatError(WavError):
    """Malformed or truncated RIFF/WAVE structure."""


class UnsupportedEncodingError(WavError):
    """Compressed or otherwise unsupported sample format."""


class EmptyAfterVadError(WavError):
    pass


# numerical stages

class FeatureError(LidError):
    stage = "features"


class DegenerateDataError(FeatureError):
    pass


class GmmError(LidError):
    stage = "gmm"


class DimensionMismatchError(LidError, ValueError):
    pass


class NgramError(LidError, ValueError):
    stage = "ngram"


class EmbeddingError(LidError, ValueError):
    stage = "embedding"


class SvmError(LidError, ValueError):
    stage = "svm"


class SegmentationError(LidError, ValueError):
    stage = "segmentation"


class CorpusError(LidError, ValueError):
    stage = "synthcorpus"


# persistence

class ContainerError(LidError):
    stage = "load"


class ModelNotFoundError(ContainerError, FileNotFoundError):
    pass


class ContainerIntegrityError(ContainerError):
    pass


class VersionMismatchError(ContainerError):
    pass


class ShapeMismatchError(ContainerError):
    pass


class PipelineError(LidError):
    stage = "pipeline"
