"""Skipgram transition matrices over decoded component sequences and the
stacked utterance n-gram matrix (scheme 1 features)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import NgramError


@dataclass(frozen=True)
class SkipgramConfig:
    """``k`` is the skip between conditioning and predicted symbol
    (k=1 is the ordinary bigram); ``m`` is the alphabet size."""

    k: int = 1
    m: int = 64

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("skip parameter k must be >= 1")
        if self.m < 2:
            raise ValueError("alphabet size m must be >= 2")


@dataclass(frozen=True)
class SkipgramMatrix:
    probs: np.ndarray
    row_counts: np.ndarray

    @property
    def m(self) -> int:
        return self.probs.shape[0]


def skipgram(seq, cfg: SkipgramConfig) -> SkipgramMatrix:
    """B(i, j) = #{t: s[t-k] = i, s[t] = j} / #{t: s[t-k] = i} over k <= t < T.

    Rows whose symbol never occurs as a conditioning event are all zero.
    """
    seq = np.ascontiguousarray(seq, dtype=np.int64)
    if seq.ndim != 1 or seq.size <= cfg.k:
        raise NgramError(f"sequence of length {seq.size} is too short for skip {cfg.k}")
    if seq.min() < 0 or seq.max() >= cfg.m:
        raise NgramError(f"symbols must lie in [0, {cfg.m})")
    counts = _kernels.skipgram_counts(seq, cfg.k, cfg.m)
    rows = counts.sum(axis=1)
    probs = np.zeros((cfg.m, cfg.m))
    nz = rows > 0
    probs[nz] = counts[nz] / rows[nz, None]
    return SkipgramMatrix(probs, rows)


def flatten(b) -> np.ndarray:
    """Row-major flattening: entry (i, j) lands at index m*i + j."""
    probs = b.probs if isinstance(b, SkipgramMatrix) else np.asarray(b)
    return np.ascontiguousarray(probs).reshape(-1).copy()


def unflatten(v, m: int) -> np.ndarray:
    return np.asarray(v, dtype=np.float64).reshape(m, m)


@dataclass(frozen=True)
class UtteranceMatrix:
    rows: np.ndarray
    labels: list

    def __post_init__(self):
        if self.rows.shape[0] != len(self.labels):
            raise NgramError("row count and label count differ")


def build_utterance_matrix(seqs: Sequence, cfg: SkipgramConfig) -> UtteranceMatrix:
    """Stack the flattened skipgram matrix of each (sequence, label) pair."""
    rows = np.empty((len(seqs), cfg.m * cfg.m))
    labels = []
    for u, (seq, label) in enumerate(seqs):
        rows[u] = flatten(skipgram(seq, cfg))
        labels.append(label)
    return UtteranceMatrix(rows, labels)
