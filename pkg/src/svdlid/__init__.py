"""Language identification from GMM statistics embedded by truncated SVD.

Two feature schemes share one back end: skip-K transition matrices of the
decoded component sequence (scheme 1) and MAP-adapted mean supervectors
minus the background model (scheme 2), each projected onto the leading
right singular vectors of the training matrix and classified with
one-vs-rest linear SVMs.
"""

from ._kernels import BACKEND
from .errors import LidError
from .pipeline import PipelineConfig, TrainedSystem, identify, load, save, segment_stream, train

__version__ = "0.1.0"

__all__ = ["BACKEND", "LidError", "PipelineConfig", "TrainedSystem", "identify", "load",
           "save", "segment_stream", "train", "__version__"]
