"""MFCC front-end, sliding-window cepstral mean normalisation and Fisher
selection of the normalisation window."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.fft import dct

from .audio import AudioClip
from .errors import DegenerateDataError, FeatureError


@dataclass(frozen=True)
class FeatureMatrix:
    """Frame-level features of one utterance (T x d)."""

    frames: np.ndarray
    frame_shift_ms: float = 10.0
    label: Optional[str] = None

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] < 1:
            raise FeatureError(f"expected a non-empty T x d matrix, got shape {frames.shape}")
        if not np.all(np.isfinite(frames)):
            raise FeatureError("feature matrix contains non-finite values")
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    @property
    def duration(self) -> float:
        return self.n_frames * self.frame_shift_ms / 1000.0

    def with_frames(self, frames) -> "FeatureMatrix":
        return FeatureMatrix(frames, self.frame_shift_ms, self.label)

    def to_csv(self, path) -> None:
        np.savetxt(path, self.frames, delimiter=",", fmt="%.17g")

    @classmethod
    def from_csv(cls, path, frame_shift_ms=10.0, label=None) -> "FeatureMatrix":
        return cls(np.loadtxt(path, delimiter=",", ndmin=2), frame_shift_ms, label)


@dataclass(frozen=True)
class MfccConfig:
    frame_ms: float = 25.0
    shift_ms: float = 10.0
    num_mel_filters: int = 26
    num_cepstra: int = 13
    pre_emphasis: float = 0.97
    window: str = "hamming"
    delta_context: int = 2
    deltas: bool = True
    double_deltas: bool = True

    def __post_init__(self):
        if self.num_cepstra > self.num_mel_filters:
            raise ValueError("num_cepstra must not exceed num_mel_filters")
        if self.frame_ms <= self.shift_ms:
            raise ValueError("frame_ms must be larger than shift_ms")

    @property
    def dim(self) -> int:
        return self.num_cepstra * (1 + self.deltas + self.double_deltas)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_filters: int, nfft: int, sample_rate: int) -> np.ndarray:
    """Triangular filters equally spaced on the HTK mel scale, 0 Hz to Nyquist.

    Triangles are evaluated at the exact bin frequencies ``k * rate / nfft``.
    """
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_filters + 2))
    freqs = np.arange(nfft // 2 + 1) * sample_rate / nfft
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lo) / (mid - lo)
    falling = (hi - freqs) / (hi - mid)
    return np.maximum(0.0, np.minimum(rising, falling))


def _window(name: str, n: int) -> np.ndarray:
    if name == "hamming":
        return np.hamming(n)
    if name == "hanning":
        return np.hanning(n)
    if name in ("rect", "rectangular", "none"):
        return np.ones(n)
    raise ValueError(f"unknown window {name!r}")


def deltas(c: np.ndarray, context: int = 2) -> np.ndarray:
    """Regression deltas over +-context frames with edge replication."""
    padded = np.pad(c, ((context, context), (0, 0)), mode="edge")
    t = c.shape[0]
    num = np.zeros_like(c)
    for n in range(1, context + 1):
        num += n * (padded[context + n:context + n + t] - padded[context - n:context - n + t])
    return num / (2.0 * sum(n * n for n in range(1, context + 1)))


def cepstra(frames: np.ndarray, sample_rate: int, cfg: MfccConfig) -> np.ndarray:
    """Static cepstra for already pre-emphasised frames (n_frames x frame_len)."""
    frame_len = frames.shape[1]
    nfft = 1 << (frame_len - 1).bit_length()
    spec = np.abs(np.fft.rfft(frames * _window(cfg.window, frame_len), nfft)) ** 2 / nfft
    fbank = spec @ mel_filterbank(cfg.num_mel_filters, nfft, sample_rate).T
    logfb = np.log(np.maximum(fbank, np.finfo(np.float64).eps))
    return dct(logfb, type=2, axis=1, norm="ortho")[:, :cfg.num_cepstra]


def mfcc(clip: AudioClip, cfg: MfccConfig = MfccConfig()) -> FeatureMatrix:
    """MFCC (+delta, +double-delta) features of a clip.

    The frame count is ``(N - frame_len) // shift + 1``; a 60 s clip at
    16 kHz with 25 ms frames and 10 ms shift gives 5998 frames.
    """
    rate = clip.sample_rate
    frame_len = int(round(cfg.frame_ms * rate / 1000.0))
    hop = int(round(cfg.shift_ms * rate / 1000.0))
    x = clip.samples
    if x.size < frame_len:
        raise FeatureError(f"clip has {x.size} samples, shorter than one "
                           f"{frame_len}-sample frame")
    emph = np.append(x[0], x[1:] - cfg.pre_emphasis * x[:-1])
    n_frames = (x.size - frame_len) // hop + 1
    idx = np.arange(n_frames)[:, None] * hop + np.arange(frame_len)[None, :]
    static = cepstra(emph[idx], rate, cfg)
    parts = [static]
    if cfg.deltas or cfg.double_deltas:
        d1 = deltas(static, cfg.delta_context)
        if cfg.deltas:
            parts.append(d1)
        if cfg.double_deltas:
            parts.append(deltas(d1, cfg.delta_context))
    return FeatureMatrix(np.hstack(parts), cfg.shift_ms, clip.source_id or None)


def window_frames(window_s: float, frame_shift_ms: float) -> int:
    return max(1, int(round(window_s * 1000.0 / frame_shift_ms)))


def cmn_sliding(feats: FeatureMatrix, window_s: float) -> FeatureMatrix:
    """Subtract a sliding per-dimension mean.

    The window holds ``min(W, T)`` frames centred on the current frame and is
    shifted (not shrunk) to stay inside the utterance, so a window at least as
    long as the utterance reduces to global mean normalisation.
    """
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    x = feats.frames
    t = x.shape[0]
    w = min(window_frames(window_s, feats.frame_shift_ms), t)
    # Centring on the first frame keeps constant streams exactly zero.
    centred = x - x[0]
    csum = np.vstack([np.zeros((1, x.shape[1])), np.cumsum(centred, axis=0)])
    start = np.clip(np.arange(t) - w // 2, 0, t - w)
    means = (csum[start + w] - csum[start]) / w
    return feats.with_frames(centred - means)


@dataclass
class FisherStats:
    within: np.ndarray
    between: np.ndarray
    class_means: dict = field(default_factory=dict)
    overall_mean: np.ndarray = None
    counts: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return float(np.trace(self.between) / np.trace(self.within))


def fisher_stats(frames_by_class) -> FisherStats:
    """Within- and between-class scatter of frames grouped by class id.

    ``frames_by_class`` maps class id -> (n_k x d) array.
    """
    keys = list(frames_by_class)
    blocks = [np.asarray(frames_by_class[k], dtype=np.float64) for k in keys]
    counts = {k: b.shape[0] for k, b in zip(keys, blocks)}
    total = sum(counts.values())
    mu = sum(b.sum(axis=0) for b in blocks) / total
    d = mu.size
    sw = np.zeros((d, d))
    sb = np.zeros((d, d))
    means = {}
    for k, b in zip(keys, blocks):
        mk = b.mean(axis=0)
        means[k] = mk
        dev = b - mk
        sw += dev.T @ dev
        diff = (mk - mu)[:, None]
        sb += b.shape[0] * (diff @ diff.T)
    return FisherStats(sw, sb, means, mu, counts)


def fisher_select_window(labeled_feature_sets: Sequence, candidate_windows: Sequence[float]) -> float:
    """Pick the CMN window whose normalised features maximise
    trace(S_b) / trace(S_w); ties go to the smaller window."""
    classes = {label for _, label in labeled_feature_sets}
    if len(classes) < 2:
        raise FeatureError("Fisher window selection needs at least two classes")
    if any(w <= 0 for w in candidate_windows):
        raise ValueError("candidate windows must be positive")
    best_w, best_j = None, -np.inf
    for w in sorted(candidate_windows):
        grouped = {}
        for fm, label in labeled_feature_sets:
            grouped.setdefault(label, []).append(cmn_sliding(fm, w).frames)
        stats = fisher_stats({k: np.vstack(v) for k, v in grouped.items()})
        if np.trace(stats.within) <= 0:
            raise DegenerateDataError(f"within-class scatter is zero for window {w} s")
        j = stats.ratio
        if j > best_j:
            best_w, best_j = w, j
    return best_w
