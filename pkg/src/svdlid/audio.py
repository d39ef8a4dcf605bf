"""PCM WAV input/output and energy-based silence removal."""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyAfterVadError,
    UnsupportedEncodingError,
    WavFormatError,
    WavNotFoundError,
)

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioClip:
    """Mono audio samples in [-1, 1] with their sample rate."""

    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=np.float64).ravel()
        if samples.size == 0:
            raise ValueError("AudioClip needs at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("AudioClip samples must be finite")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class VadConfig:
    frame_ms: float = 25.0
    shift_ms: float = 10.0
    threshold_db: float = -40.0

    def __post_init__(self):
        if not 0 < self.shift_ms <= self.frame_ms:
            raise ValueError("need 0 < shift_ms <= frame_ms")
        if self.threshold_db >= 0:
            raise ValueError("threshold_db must be negative")


def _iter_chunks(data: bytes, path):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise WavFormatError(f"{path}: chunk {cid!r} truncated "
                                 f"({len(body)} of {size} bytes)")
        yield cid, body
        pos += 8 + size + (size & 1)


def read_wav(path) -> AudioClip:
    """Read a PCM WAV file (8/16-bit integer or 32-bit float).

    Multi-channel audio is averaged to mono. Integer samples are scaled to
    [-1, 1); float samples are clipped to [-1, 1].
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise WavNotFoundError(f"no such file: {path}")
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12:
        raise WavFormatError(f"{path}: file too short for a RIFF header")
    riff, _, wave = struct.unpack_from("<4sI4s", data, 0)
    if riff != b"RIFF" or wave != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    for cid, body in _iter_chunks(data, path):
        if cid == b"fmt ":
            if len(body) < 16:
                raise WavFormatError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == WAVE_FORMAT_EXTENSIBLE:
                if len(body) < 40:
                    raise WavFormatError(f"{path}: extensible fmt chunk too short")
                sub = struct.unpack_from("<H", body, 24)[0]
                fmt = (sub,) + fmt[1:]
        elif cid == b"data":
            payload = body
    if fmt is None:
        raise WavFormatError(f"{path}: missing fmt chunk")
    if payload is None:
        raise WavFormatError(f"{path}: missing data chunk")

    tag, channels, rate, _, block_align, bits = fmt
    if channels < 1 or rate < 1:
        raise WavFormatError(f"{path}: invalid channel count or sample rate")
    if tag == WAVE_FORMAT_PCM and bits == 16:
        x = np.frombuffer(payload, dtype="<i2", count=len(payload) // 2) / 32768.0
    elif tag == WAVE_FORMAT_PCM and bits == 8:
        x = (np.frombuffer(payload, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        x = np.frombuffer(payload, dtype="<f4", count=len(payload) // 4).astype(np.float64)
        x = np.clip(x, -1.0, 1.0)
    else:
        raise UnsupportedEncodingError(
            f"{path}: unsupported encoding (format tag {tag:#06x}, {bits} bits)")
    n = x.size // channels
    if n == 0:
        raise WavFormatError(f"{path}: no samples in data chunk")
    x = x[:n * channels].reshape(n, channels).mean(axis=1)
    return AudioClip(x, rate, os.path.splitext(os.path.basename(path))[0])


def write_wav(clip: AudioClip, path, bits: int = 16) -> None:
    """Write a mono PCM WAV; ``bits`` is 8, 16 (integer) or 32 (float)."""
    x = np.clip(clip.samples, -1.0, 1.0)
    if bits == 16:
        pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2").tobytes()
        tag = WAVE_FORMAT_PCM
    elif bits == 8:
        pcm = np.clip(np.round(x * 128.0) + 128, 0, 255).astype(np.uint8).tobytes()
        tag = WAVE_FORMAT_PCM
    elif bits == 32:
        pcm = x.astype("<f4").tobytes()
        tag = WAVE_FORMAT_IEEE_FLOAT
    else:
        raise ValueError(f"unsupported bit depth {bits}")
    nbytes = bits // 8
    fmt = struct.pack("<HHIIHH", tag, 1, clip.sample_rate,
                      clip.sample_rate * nbytes, nbytes, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(pcm)) + pcm
    if len(pcm) & 1:
        body += b"\x00"
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + body)


def frame_energies_db(samples: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Log energy (dB) of each frame; a clip shorter than a frame is one frame."""
    n = samples.size
    n_frames = 1 if n <= frame_len else (n - frame_len) // hop + 1
    idx = np.arange(n_frames)[:, None] * hop + np.arange(min(frame_len, n))[None, :]
    energy = np.sum(samples[idx] ** 2, axis=1)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(energy)


def remove_silence(clip: AudioClip, cfg: VadConfig = VadConfig()) -> AudioClip:
    """Drop low-energy frames.

    Each frame owns the ``shift`` samples starting at its offset (the last
    frame also owns the tail). A frame survives when its energy is above
    ``peak + threshold_db``; surviving blocks are concatenated in order.
    """
    rate = clip.sample_rate
    frame_len = max(1, int(round(cfg.frame_ms * rate / 1000.0)))
    hop = max(1, int(round(cfg.shift_ms * rate / 1000.0)))
    x = clip.samples
    db = frame_energies_db(x, frame_len, hop)
    peak = db.max()
    if not np.isfinite(peak):
        raise EmptyAfterVadError(f"{clip.source_id or 'clip'}: empty after VAD "
                                 "(no signal energy)")
    keep = db > peak + cfg.threshold_db
    starts = np.arange(db.size) * hop
    ends = np.append(starts[1:], x.size)
    pieces = [x[s:e] for s, e, k in zip(starts, ends, keep) if k]
    return AudioClip(np.concatenate(pieces), rate, clip.source_id)
