"""Sliding-window language segmentation and per-second accuracy."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import SegmentationError
from .features import FeatureMatrix


@dataclass(frozen=True)
class SegmentationConfig:
    window_s: float = 5.0
    shift_s: float = 1.0
    scheme: Optional[int] = None

    def __post_init__(self):
        if not self.window_s >= self.shift_s > 0:
            raise ValueError("need window_s >= shift_s > 0")


@dataclass(frozen=True)
class GroundTruth:
    """Contiguous (language, start_s, end_s) segments."""

    segments: tuple

    def __post_init__(self):
        segs = tuple((str(l), float(s), float(e)) for l, s, e in self.segments)
        if not segs:
            raise SegmentationError("ground truth needs at least one segment")
        for (_, s, e), nxt in zip(segs, segs[1:] + (None,)):
            if not e > s:
                raise SegmentationError(f"segment [{s}, {e}) is empty")
            if nxt is not None and abs(nxt[1] - e) > 1e-9:
                raise SegmentationError(f"gap or overlap at {e} s")
        object.__setattr__(self, "segments", segs)

    @property
    def duration(self) -> float:
        return self.segments[-1][2]

    @property
    def start(self) -> float:
        return self.segments[0][1]

    def label_at(self, t: float) -> str:
        for lang, s, e in self.segments:
            if s <= t < e:
                return lang
        raise SegmentationError(f"time {t} s lies outside the ground truth")

    def write(self, path) -> None:
        with open(path, "w") as fh:
            for lang, s, e in self.segments:
                fh.write(f"{lang},{s!r},{e!r}\n")

    @classmethod
    def read(cls, path) -> "GroundTruth":
        segs = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    lang, s, e = line.split(",")
                    segs.append((lang, float(s), float(e)))
        return cls(tuple(segs))


@dataclass(frozen=True)
class WindowDecision:
    start_s: float
    end_s: float
    label: str
    scores: np.ndarray


@dataclass
class SegmentationTrace:
    decisions: list
    class_names: tuple
    duration_s: float
    window_s: float
    shift_s: float
    second_labels: list = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["start_s", "end_s", "prediction", *[f"score_{c}" for c in self.class_names]])
            for d in self.decisions:
                w.writerow([d.start_s, d.end_s, d.label, *[repr(float(v)) for v in d.scores]])

    @classmethod
    def read_csv(cls, path, duration_s=None) -> "SegmentationTrace":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        names = tuple(h[len("score_"):] for h in rows[0][3:])
        decisions = [WindowDecision(float(r[0]), float(r[1]), r[2],
                                    np.array([float(v) for v in r[3:]])) for r in rows[1:]]
        if not decisions:
            raise SegmentationError(f"{path}: trace has no decisions")
        window = decisions[0].end_s - decisions[0].start_s
        shift = decisions[1].start_s - decisions[0].start_s if len(decisions) > 1 else window
        if duration_s is None:
            duration_s = decisions[-1].end_s
        trace = cls(decisions, names, float(duration_s), window, shift)
        trace.second_labels = second_labels(decisions, duration_s)
        return trace


def n_windows(duration_s: float, window_s: float, shift_s: float) -> int:
    return int(math.floor((duration_s - window_s) / shift_s + 1e-9)) + 1


def second_labels(decisions: Sequence[WindowDecision], duration_s: float) -> list:
    """Label each whole second with the decision of the window whose centre is
    nearest to the second's midpoint (ties go to the earlier window)."""
    centres = np.array([(d.start_s + d.end_s) / 2.0 for d in decisions])
    out = []
    for s in range(int(math.floor(duration_s + 1e-9))):
        out.append(decisions[int(np.argmin(np.abs(centres - (s + 0.5))))].label)
    return out


def segment(stream: FeatureMatrix, classify: Callable, cfg: SegmentationConfig,
            class_names=None) -> SegmentationTrace:
    """Classify every window [p, p + window_s) for p = 0, shift, 2*shift, ...

    ``classify`` maps a frame block (n x d array) to ``(label, scores)``.
    """
    fps = 1000.0 / stream.frame_shift_ms
    duration = stream.duration
    if duration + 1e-9 < cfg.window_s:
        raise SegmentationError(f"stream of {duration:.2f} s is shorter than the "
                                f"{cfg.window_s} s window")
    decisions = []
    for w in range(n_windows(duration, cfg.window_s, cfg.shift_s)):
        p = w * cfg.shift_s
        a = int(round(p * fps))
        b = min(int(round((p + cfg.window_s) * fps)), stream.n_frames)
        label, scores = classify(stream.frames[a:b])
        decisions.append(WindowDecision(p, p + cfg.window_s, label, np.asarray(scores, float)))
    trace = SegmentationTrace(decisions, tuple(class_names or ()), duration,
                              cfg.window_s, cfg.shift_s)
    trace.second_labels = second_labels(decisions, duration)
    return trace


def frame_accuracy(trace: SegmentationTrace, truth: GroundTruth) -> float:
    """Fraction of whole seconds whose label matches the truth at the
    second's midpoint."""
    if abs(trace.duration_s - (truth.duration - truth.start)) > 1.0:
        raise SegmentationError(
            f"trace covers {trace.duration_s:.2f} s but ground truth covers "
            f"{truth.duration - truth.start:.2f} s")
    labels = trace.second_labels
    n = min(len(labels), int(math.floor(truth.duration - truth.start + 1e-9)))
    if n == 0:
        raise SegmentationError("no whole second to evaluate")
    hits = sum(labels[s] == truth.label_at(truth.start + s + 0.5) for s in range(n))
    return hits / n


def concat_streams(utterances: Sequence, plan: GroundTruth):
    """Concatenate frames so each planned segment gets its duration of material
    from its language, consumed in order. Returns the stream and the realised
    ground truth (boundaries rounded to whole frames)."""
    if not utterances:
        raise SegmentationError("no material to concatenate")
    shift_ms = utterances[0][0].frame_shift_ms
    fps = 1000.0 / shift_ms
    pools = {}
    for fm, lang in utterances:
        pools.setdefault(str(lang), []).append(fm.frames)
    pools = {k: np.vstack(v) for k, v in pools.items()}
    cursor = {k: 0 for k in pools}
    pieces, realised = [], []
    t = 0
    for lang, s, e in plan.segments:
        n = int(round((e - s) * fps))
        if lang not in pools or cursor[lang] + n > pools[lang].shape[0]:
            have = pools[lang].shape[0] - cursor[lang] if lang in pools else 0
            raise SegmentationError(f"insufficient material for {lang!r}: "
                                    f"need {n} frames, {have} left")
        pieces.append(pools[lang][cursor[lang]:cursor[lang] + n])
        cursor[lang] += n
        realised.append((lang, t / fps, (t + n) / fps))
        t += n
    return FeatureMatrix(np.vstack(pieces), shift_ms), GroundTruth(tuple(realised))


def random_plan(languages: Sequence[str], segments_per_language: int = 3,
                min_s: int = 6, max_s: int = 30, seed: int = 0) -> GroundTruth:
    """Shuffle ``segments_per_language`` segments of each language with whole-second
    durations in [min_s, max_s], never placing one language twice in a row."""
    rng = np.random.default_rng(seed)
    order = [l for l in languages for _ in range(segments_per_language)]
    for _ in range(1000):
        rng.shuffle(order)
        if all(a != b for a, b in zip(order, order[1:])):
            break
    else:
        raise SegmentationError("could not interleave languages without repeats")
    segs, t = [], 0.0
    for lang in order:
        d = float(rng.integers(min_s, max_s + 1))
        segs.append((lang, t, t + d))
        t += d
    return GroundTruth(tuple(segs))
