"""Deterministic synthetic corpora.

Each synthetic "language" is a hidden Markov chain over emission states with
Gaussian (diagonal) emissions. Speakers add a global mean offset (removed by
CMN) and a small per-state jitter (not removed). Languages can differ in
their emission means, their transition dynamics, or both.

Seeds are split deterministically: the generator for speaker ``s`` of the
language at position ``l`` uses ``default_rng([seed, 1, l, s])`` and session
``k`` of that speaker uses ``default_rng([seed, 2, l, s, k])``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .audio import AudioClip, write_wav
from .errors import CorpusError
from .features import FeatureMatrix
from .gmm import DiagGmm


def stationary_distribution(p: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eig(p.T)
    v = np.real(vecs[:, np.argmin(np.abs(vals - 1.0))])
    v = np.abs(v)
    return v / v.sum()


@dataclass(frozen=True, eq=False)
class SyntheticLanguage:
    id: str
    emission: DiagGmm
    transition: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.transition, dtype=np.float64)
        m = self.emission.n_components
        if p.shape != (m, m) or np.any(p < 0) or np.max(np.abs(p.sum(axis=1) - 1)) > 1e-12:
            raise CorpusError(f"{self.id}: transition must be a {m}x{m} row-stochastic matrix")
        object.__setattr__(self, "transition", p)

    @property
    def stationary(self) -> np.ndarray:
        return stationary_distribution(self.transition)

    def moments(self, means=None, offset=None):
        """Mean and covariance of the stationary emission mixture, optionally
        with speaker-specific state means and a global offset."""
        pi = self.stationary
        mu = self.emission.means if means is None else means
        mean = pi @ mu
        cov = (mu.T * pi) @ mu + np.diag(pi @ self.emission.variances) - np.outer(mean, mean)
        if offset is not None:
            mean = mean + offset
        return mean, cov

    def time_reversed(self, new_id: str) -> "SyntheticLanguage":
        """Same emissions, time-reversed chain: identical state occupancy
        statistics but transposed temporal dynamics."""
        pi = self.stationary
        rev = (self.transition.T * pi[None, :]) / pi[:, None]
        rev = rev / rev.sum(axis=1, keepdims=True)
        return SyntheticLanguage(new_id, self.emission, rev)


def cyclic_transition(n_states: int, stay: float, step: int = 1) -> np.ndarray:
    """Stay with probability ``stay``, else move ``step`` states around a ring."""
    p = np.eye(n_states) * stay
    for i in range(n_states):
        p[i, (i + step) % n_states] += 1.0 - stay
    return p


def random_transition(n_states: int, rng, stay: float = 0.7, branching: int = 2) -> np.ndarray:
    p = np.eye(n_states) * stay
    for i in range(n_states):
        others = [j for j in range(n_states) if j != i]
        succ = rng.choice(others, size=min(branching, len(others)), replace=False)
        p[i, succ] += (1.0 - stay) * rng.dirichlet(np.ones(len(succ)))
    return p / p.sum(axis=1, keepdims=True)


def make_languages(n_languages: int, n_states: int = 32, dim: int = 39,
                   separation: float = 6.0, shared_scale: float = 2.0,
                   language_scale: float = 1.0, stay: float = 0.9,
                   seed: int = 0) -> list:
    """Languages over a shared state inventory with language-specific mean
    shifts and transition matrices.

    Per-state mean shifts are redrawn until every pair of languages has all
    corresponding state means at least ``separation`` emission standard
    deviations apart (Euclidean distance; emission std is at most 1).
    """
    rng = np.random.default_rng([seed, 0])
    base = rng.normal(0.0, shared_scale, size=(n_states, dim))
    langs = []
    for l in range(n_languages):
        for _ in range(1000):
            means = base + rng.normal(0.0, language_scale, size=(n_states, dim))
            if all(np.min(np.linalg.norm(means - o.emission.means, axis=1)) >= separation
                   for o in langs):
                break
        else:
            raise CorpusError("could not reach the requested separation")
        std = rng.uniform(0.6, 1.0, size=(n_states, dim))
        emission = DiagGmm(np.full(n_states, 1.0 / n_states), means, std ** 2)
        langs.append(SyntheticLanguage(f"L{l:02d}", emission,
                                       random_transition(n_states, rng, stay)))
    return langs


def min_separation(languages: Sequence[SyntheticLanguage]) -> float:
    """Smallest Euclidean distance between same-index state means of two languages."""
    best = np.inf
    for i, a in enumerate(languages):
        for b in languages[i + 1:]:
            best = min(best, np.min(np.linalg.norm(a.emission.means - b.emission.means, axis=1)))
    return float(best)


def make_dynamics_pair(n_states: int = 8, dim: int = 39, stay: float = 0.6,
                       scale: float = 3.0, seed: int = 0) -> list:
    """Two languages with identical emissions whose chains are time reversals
    of each other (forward vs backward ring). Their state occupancy, and
    hence their supervector statistics, have the same distribution."""
    rng = np.random.default_rng([seed, 0])
    means = rng.normal(0.0, scale, size=(n_states, dim))
    std = rng.uniform(0.6, 1.0, size=(n_states, dim))
    emission = DiagGmm(np.full(n_states, 1.0 / n_states), means, std ** 2)
    fwd = SyntheticLanguage("FWD", emission, cyclic_transition(n_states, stay, 1))
    return [fwd, fwd.time_reversed("BWD")]


@dataclass(frozen=True)
class CorpusSpec:
    languages: tuple
    speakers_per_language: int = 8
    sessions_per_speaker: int = 4
    session_duration_s: float = 180.0
    frame_shift_ms: float = 10.0
    seed: int = 0
    first_speaker: int = 0
    speaker_offset_scale: float = 1.0
    speaker_jitter: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "languages", tuple(self.languages))
        if not self.languages or min(self.speakers_per_language, self.sessions_per_speaker) < 1:
            raise CorpusError("corpus needs >= 1 language, speaker and session")
        if self.session_duration_s <= 0:
            raise CorpusError("session duration must be positive")

    @property
    def frames_per_session(self) -> int:
        return int(round(self.session_duration_s * 1000.0 / self.frame_shift_ms))

    def held_out(self, speakers: int, sessions: int, duration_s: float, offset: int = 1000):
        """Same languages, new speakers (ids starting at ``first_speaker + offset``)."""
        return replace(self, speakers_per_language=speakers, sessions_per_speaker=sessions,
                       session_duration_s=duration_s,
                       first_speaker=self.first_speaker + offset)


class Session(NamedTuple):
    features: FeatureMatrix
    language: str
    speaker: int
    session: int


def speaker_params(spec: CorpusSpec, lang_index: int, speaker: int):
    lang = spec.languages[lang_index]
    rng = np.random.default_rng([spec.seed, 1, lang_index, speaker])
    offset = rng.normal(0.0, spec.speaker_offset_scale, size=lang.emission.dim)
    jitter = rng.normal(0.0, spec.speaker_jitter, size=lang.emission.means.shape)
    return offset, lang.emission.means + jitter


def generate_session(spec: CorpusSpec, lang_index: int, speaker: int, session: int,
                     n_frames: int = None) -> FeatureMatrix:
    lang = spec.languages[lang_index]
    offset, means = speaker_params(spec, lang_index, speaker)
    n = spec.frames_per_session if n_frames is None else n_frames
    rng = np.random.default_rng([spec.seed, 2, lang_index, speaker, session])
    cum = np.ascontiguousarray(np.cumsum(lang.transition, axis=1))
    cum[:, -1] = 1.0
    start = int(rng.choice(lang.emission.n_components, p=lang.stationary))
    states = _kernels.markov_walk(cum, np.ascontiguousarray(rng.random(n)), start)
    noise = rng.standard_normal((n, lang.emission.dim))
    frames = means[states] + np.sqrt(lang.emission.variances)[states] * noise + offset
    return FeatureMatrix(frames, spec.frame_shift_ms, lang.id)


class SyntheticCorpus:
    """Re-iterable view of a corpus; sessions are regenerated on each pass."""

    def __init__(self, spec: CorpusSpec):
        self.spec = spec

    def keys(self):
        s = self.spec
        for li in range(len(s.languages)):
            for spk in range(s.first_speaker, s.first_speaker + s.speakers_per_language):
                for sess in range(s.sessions_per_speaker):
                    yield li, spk, sess

    def __len__(self):
        s = self.spec
        return len(s.languages) * s.speakers_per_language * s.sessions_per_speaker

    def __iter__(self):
        for li, spk, sess in self.keys():
            yield Session(generate_session(self.spec, li, spk, sess),
                          self.spec.languages[li].id, spk, sess)


def generate(spec: CorpusSpec) -> list:
    """All sessions as a list of (features, language, speaker, session)."""
    return list(SyntheticCorpus(spec))


def default_spec(seed: int = 0, n_languages: int = 10) -> CorpusSpec:
    """10 languages x 8 speakers x 4 sessions x 3 min, 39-dimensional frames."""
    return CorpusSpec(tuple(make_languages(n_languages, seed=seed)), 8, 4, 180.0, seed=seed)


def write_tone(freq: float, amplitude: float, rate: int, duration: float, path,
               bits: int = 16) -> AudioClip:
    """Write a sine tone as a mono PCM WAV and return the clip that was written."""
    n = int(round(duration * rate))
    t = np.arange(n) / rate
    clip = AudioClip(amplitude * np.sin(2.0 * np.pi * freq * t), rate,
                     os.path.splitext(os.path.basename(os.fspath(path)))[0])
    write_wav(clip, path, bits)
    return clip
