"""Hot loops: skipgram pair counting, Markov-chain sampling and the SMO solver.

The compiled ``_core`` extension is used when it was built; otherwise the
numpy implementations in ``_fallback`` are used. Setting the environment
variable ``SVDLID_PURE_PYTHON=1`` forces the fallback. ``BACKEND`` names the
active implementation.
"""

import os

from . import _fallback

if os.environ.get("SVDLID_PURE_PYTHON"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

skipgram_counts = _impl.skipgram_counts
markov_walk = _impl.markov_walk
smo = _impl.smo

__all__ = ["BACKEND", "skipgram_counts", "markov_walk", "smo"]
