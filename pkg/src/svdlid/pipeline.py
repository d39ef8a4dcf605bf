"""Training and test phases for both schemes, model persistence and the
plain-text configuration format.

Scheme 1: MAP-adapt each clip, decode its frames against the adapted model,
build the skip-K transition matrix and flatten it. Scheme 2: MAP-adapt each
clip and subtract the UBM mean supervector. Both then go through the SVD
embedding and one-vs-rest linear SVMs.
"""

from __future__ import annotations

import contextlib
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Iterable, Optional

import numpy as np

from . import embedding, svm
from .audio import AudioClip, VadConfig, remove_silence
from .container import read_container, write_container
from .errors import LidError, PipelineError, ShapeMismatchError, VersionMismatchError
from .features import FeatureMatrix, MfccConfig, cmn_sliding, mfcc
from .gmm import DiagGmm, MapConfig, decode_symbols, map_adapt, train_ubm
from .ngram import SkipgramConfig, flatten, skipgram
from .segmentation import SegmentationConfig, segment
from .supervector import difference_vector

log = logging.getLogger(__name__)

MODEL_VERSION = 1


@dataclass(frozen=True)
class PipelineConfig:
    frame_ms: float = 25.0
    shift_ms: float = 10.0
    apply_cmn: bool = True
    cmn_window_s: float = 1.0
    mixtures: int = 64
    em_iters: int = 10
    ubm_frames_per_utterance: int = 1000
    map_relevance: float = 16.0
    skip_k: int = 7
    decode_with_weights: bool = True
    energy_tau: float = 0.60
    svm_c: float = 1.0
    svm_tol: float = 1e-4
    standardize: bool = False
    clip_s: float = 60.0
    vad_threshold_db: float = -40.0
    seed: int = 0

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in asdict(self).items())

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise PipelineError(f"config line {n}: expected key=value", stage="config")
            key, raw = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise PipelineError(f"config line {n}: unknown key {key!r}", stage="config")
            values[key] = _parse_value(types[key], raw, key)
        return cls(**values)

    @classmethod
    def read(cls, path) -> "PipelineConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())


def _parse_value(typ, raw, key):
    try:
        if typ in ("bool", bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ in ("int", int):
            return int(raw)
        return float(raw)
    except ValueError:
        raise PipelineError(f"config key {key!r}: cannot parse {raw!r}", stage="config") from None


@dataclass(frozen=True, eq=False)
class TrainedSystem:
    scheme: int
    config: PipelineConfig
    ubm: DiagGmm
    space: embedding.EmbeddingSpace
    svm: svm.SvmModel
    train_embedding: np.ndarray
    train_labels: tuple
    version: int = MODEL_VERSION

    @property
    def class_names(self) -> tuple:
        return self.svm.class_names


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except LidError as exc:
        if exc.stage in ("svdlid", "pipeline"):
            exc.stage = name
        raise
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise PipelineError(str(exc), stage=name) from exc


def _record_features(record, cfg: PipelineConfig) -> FeatureMatrix:
    """Features of a corpus record; audio records go through VAD and MFCC."""
    obj = record[0] if isinstance(record, tuple) else record
    if isinstance(obj, AudioClip):
        with _stage("audio"):
            obj = remove_silence(obj, VadConfig(cfg.frame_ms, cfg.shift_ms, cfg.vad_threshold_db))
        with _stage("features"):
            obj = mfcc(obj, MfccConfig(frame_ms=cfg.frame_ms, shift_ms=cfg.shift_ms))
    elif not isinstance(obj, FeatureMatrix):
        obj = FeatureMatrix(obj, cfg.shift_ms)
    return obj


def normalize(feats: FeatureMatrix, cfg: PipelineConfig) -> FeatureMatrix:
    if not cfg.apply_cmn:
        return feats
    with _stage("cmn"):
        return cmn_sliding(feats, cfg.cmn_window_s)


def split_clips(frames: np.ndarray, clip_frames: int) -> list:
    """Consecutive clips of ``clip_frames``; a trailing remainder shorter than
    half a clip is dropped, and a short utterance is a single clip."""
    t = frames.shape[0]
    if t <= clip_frames:
        return [frames]
    clips = [frames[s:s + clip_frames] for s in range(0, t - clip_frames + 1, clip_frames)]
    rest = t - len(clips) * clip_frames
    if rest >= clip_frames / 2:
        clips.append(frames[t - rest:])
    return clips


def feature_dim(scheme: int, ubm: DiagGmm) -> int:
    return ubm.n_components ** 2 if scheme == 1 else ubm.n_components * ubm.dim


def scheme_vectors(frames: np.ndarray, ubm: DiagGmm, cfg: PipelineConfig,
                   schemes=(1, 2)) -> dict:
    """Per-scheme feature vector of one (normalised) clip."""
    out = {}
    with _stage("map"):
        adapted = map_adapt(ubm, frames, MapConfig(cfg.map_relevance))
    if 1 in schemes:
        with _stage("ngram"):
            symbols = decode_symbols(adapted, frames, cfg.decode_with_weights)
            out[1] = flatten(skipgram(symbols, SkipgramConfig(cfg.skip_k, ubm.n_components)))
    if 2 in schemes:
        with _stage("supervector"):
            out[2] = difference_vector(adapted, ubm)
    return out


def train_background_model(corpus: Iterable, cfg: PipelineConfig) -> DiagGmm:
    """UBM on a pool of evenly strided frames from every normalised session."""
    pool = []
    for rec in corpus:
        x = normalize(_record_features(rec, cfg), cfg).frames
        step = max(1, x.shape[0] // cfg.ubm_frames_per_utterance)
        pool.append(x[::step][:cfg.ubm_frames_per_utterance])
    if not pool:
        raise PipelineError("empty corpus", stage="ubm")
    with _stage("ubm"):
        return train_ubm(np.vstack(pool), cfg.mixtures, cfg.em_iters, cfg.seed)


def build_training_matrices(corpus: Iterable, ubm: DiagGmm, cfg: PipelineConfig,
                            schemes=(1, 2)) -> dict:
    """{scheme: (N x D matrix, labels)} over every adaptation clip of the corpus."""
    clip_frames = int(round(cfg.clip_s * 1000.0 / cfg.shift_ms))
    rows = {s: [] for s in schemes}
    labels = []
    for rec in corpus:
        feats = normalize(_record_features(rec, cfg), cfg)
        lang = str(rec[1])
        for clip in split_clips(feats.frames, clip_frames):
            vecs = scheme_vectors(clip, ubm, cfg, schemes)
            for s in schemes:
                rows[s].append(vecs[s])
            labels.append(lang)
    return {s: (np.array(rows[s]), list(labels)) for s in schemes}


def fit_classifier(scheme: int, ubm: DiagGmm, x: np.ndarray, labels: list,
                   cfg: PipelineConfig) -> TrainedSystem:
    if len(set(labels)) < 2:
        raise PipelineError("training corpus needs at least two languages", stage="train")
    with _stage("embedding"):
        space, emb = embedding.fit(x, cfg.energy_tau, labels)
    log.info("scheme %d: %d x %d matrix, %d singular values, L = %d",
             scheme, x.shape[0], x.shape[1], space.spectrum.size, space.rank)
    with _stage("svm"):
        model = svm.train(emb.rows, labels,
                          svm.TrainConfig(cfg.svm_c, cfg.svm_tol, standardize=cfg.standardize))
    return TrainedSystem(scheme, cfg, ubm, space, model, emb.rows, tuple(labels))


def train(corpus: Iterable, scheme: int, cfg: PipelineConfig = PipelineConfig(),
          ubm: Optional[DiagGmm] = None) -> TrainedSystem:
    """Full training phase. ``corpus`` must be re-iterable (it is read twice
    when no UBM is supplied); records are ``(features_or_audio, language, ...)``."""
    if scheme not in (1, 2):
        raise PipelineError(f"unknown scheme {scheme}", stage="train")
    if ubm is None:
        ubm = train_background_model(corpus, cfg)
    x, labels = build_training_matrices(corpus, ubm, cfg, (scheme,))[scheme]
    return fit_classifier(scheme, ubm, x, labels, cfg)


def embed_vector(system: TrainedSystem, frames: np.ndarray) -> np.ndarray:
    vec = scheme_vectors(frames, system.ubm, system.config, (system.scheme,))[system.scheme]
    with _stage("embedding"):
        return embedding.project(system.space, vec)


def classify_normalized(system: TrainedSystem, frames: np.ndarray):
    """(label, scores) for frames that already went through CMN."""
    z = embed_vector(system, frames)
    with _stage("svm"):
        return svm.predict(system.svm, z)


def identify(system: TrainedSystem, utterance, duration_s: float = None):
    """Test phase: normalise, adapt, build the scheme vector, project, classify.

    ``duration_s`` truncates the utterance to its first seconds.
    """
    feats = _record_features(utterance, system.config)
    if feats.dim != system.ubm.dim:
        raise LidError(f"features have dimension {feats.dim}, model expects "
                       f"{system.ubm.dim}", stage="identify")
    if duration_s is not None:
        n = int(round(duration_s * 1000.0 / feats.frame_shift_ms))
        feats = feats.with_frames(feats.frames[:max(n, 1)])
    if system.scheme == 1 and feats.n_frames <= system.config.skip_k:
        raise LidError(f"utterance of {feats.n_frames} frames is too short for "
                       f"skip {system.config.skip_k}", stage="identify")
    return classify_normalized(system, normalize(feats, system.config).frames)


def evaluate(system: TrainedSystem, corpus: Iterable, duration_s: float = None) -> dict:
    """Identification accuracy per language and overall."""
    hits, totals = {}, {}
    for rec in corpus:
        lang = str(rec[1])
        pred, _ = identify(system, rec, duration_s)
        totals[lang] = totals.get(lang, 0) + 1
        hits[lang] = hits.get(lang, 0) + (pred == lang)
    per = {l: hits[l] / totals[l] for l in sorted(totals)}
    overall = sum(hits.values()) / max(sum(totals.values()), 1)
    return {"per_language": per, "overall": overall, "n": sum(totals.values())}


def segment_stream(system: TrainedSystem, stream: FeatureMatrix, window_s: float,
                   shift_s: float = 1.0):
    """CMN over the whole stream, then classify each sliding window with an
    independent MAP adaptation."""
    norm = normalize(stream, system.config)
    cfg = SegmentationConfig(window_s, shift_s, system.scheme)
    with _stage("segmentation"):
        return segment(norm, lambda fr: classify_normalized(system, fr), cfg,
                       system.class_names)


# persistence

def save(system: TrainedSystem, path) -> None:
    names = list(system.class_names)
    arrays = {
        "ubm_weights": system.ubm.weights,
        "ubm_means": system.ubm.means,
        "ubm_variances": system.ubm.variances,
        "embedding_s": system.space.singular_values,
        "embedding_V": system.space.vectors,
        "embedding_spectrum": system.space.spectrum,
        "svm_weights": system.svm.weights,
        "svm_biases": system.svm.biases,
        "svm_scale": system.svm.scale,
        "train_embedding": system.train_embedding,
        "train_labels": np.array([names.index(l) for l in system.train_labels], dtype=np.float64),
    }
    meta = {
        "kind": "trained_system",
        "model_version": system.version,
        "scheme": system.scheme,
        "class_names": names,
        "svm_c": system.svm.c,
        "energy_fraction": system.space.energy_fraction,
        "config": asdict(system.config),
    }
    write_container(path, arrays, meta)


def _expect(arrays, name, shape):
    a = arrays.get(name)
    if a is None:
        raise ShapeMismatchError(f"array {name!r} is missing")
    if a.shape != tuple(shape):
        raise ShapeMismatchError(f"array {name!r} has shape {a.shape}, expected {tuple(shape)}")
    return a


def load(path) -> TrainedSystem:
    arrays, meta = read_container(path)
    if meta.get("kind") != "trained_system":
        raise ShapeMismatchError(f"{path}: not a trained model container")
    if meta.get("model_version") != MODEL_VERSION:
        raise VersionMismatchError(f"{path}: model version {meta.get('model_version')} "
                                   f"is not supported")
    scheme = int(meta["scheme"])
    names = tuple(meta["class_names"])
    cfg = PipelineConfig(**meta["config"])
    means = arrays.get("ubm_means")
    if means is None or means.ndim != 2:
        raise ShapeMismatchError("array 'ubm_means' is missing or not a matrix")
    m, d = means.shape
    dim = m * m if scheme == 1 else m * d
    s = arrays.get("embedding_s")
    if s is None or s.ndim != 1:
        raise ShapeMismatchError("array 'embedding_s' is missing or not a vector")
    rank = s.size
    k = len(names)
    _expect(arrays, "ubm_weights", (m,))
    _expect(arrays, "ubm_variances", (m, d))
    _expect(arrays, "embedding_V", (dim, rank))
    spectrum = arrays.get("embedding_spectrum")
    if spectrum is None or spectrum.ndim != 1 or spectrum.size < rank:
        raise ShapeMismatchError("array 'embedding_spectrum' is inconsistent with 'embedding_s'")
    _expect(arrays, "svm_weights", (k, rank))
    _expect(arrays, "svm_biases", (k,))
    _expect(arrays, "svm_scale", (rank,))
    tl = arrays.get("train_labels")
    if tl is None or tl.ndim != 1:
        raise ShapeMismatchError("array 'train_labels' is missing")
    _expect(arrays, "train_embedding", (tl.size, rank))
    ubm = DiagGmm(arrays["ubm_weights"], means, arrays["ubm_variances"])
    space = embedding.EmbeddingSpace(s, arrays["embedding_V"], float(meta["energy_fraction"]),
                                     spectrum)
    model = svm.SvmModel(arrays["svm_weights"], arrays["svm_biases"], float(meta["svm_c"]),
                         names, arrays["svm_scale"])
    labels = tuple(names[int(i)] for i in tl)
    return TrainedSystem(scheme, cfg, ubm, space, model, arrays["train_embedding"], labels,
                         int(meta["model_version"]))


def systems_equal(a: TrainedSystem, b: TrainedSystem) -> bool:
    """Bit-exact equality of every array and every metadata field."""
    arrs = lambda s: [s.ubm.weights, s.ubm.means, s.ubm.variances, s.space.singular_values,
                      s.space.vectors, s.space.spectrum, s.svm.weights, s.svm.biases,
                      s.svm.scale, s.train_embedding]
    return (a.scheme == b.scheme and a.config == b.config and a.version == b.version
            and a.class_names == b.class_names and a.train_labels == b.train_labels
            and a.svm.c == b.svm.c and a.space.energy_fraction == b.space.energy_fraction
            and all(x.shape == y.shape and x.tobytes() == y.tobytes()
                    for x, y in zip(arrs(a), arrs(b))))


def with_config(system: TrainedSystem, **changes) -> TrainedSystem:
    return replace(system, config=replace(system.config, **changes))


# corpus directories

MANIFEST = "manifest.txt"


class CorpusDir:
    """Feature-container corpus on disk, indexed by ``manifest.txt`` lines of
    the form ``language speaker session relative/path``. Re-iterable; each
    pass reloads the files."""

    def __init__(self, root):
        from .errors import CorpusError

        self.root = os.fspath(root)
        path = os.path.join(self.root, MANIFEST)
        if not os.path.isfile(path):
            raise CorpusError(f"corpus manifest not found: {path}", stage="corpus")
        self.entries = []
        with open(path) as fh:
            for n, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 4:
                    raise CorpusError(f"{path}:{n}: expected 4 fields", stage="corpus")
                self.entries.append((parts[0], int(parts[1]), int(parts[2]), parts[3]))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        from .container import load_features
        from .synthcorpus import Session

        for lang, spk, sess, rel in self.entries:
            yield Session(load_features(os.path.join(self.root, rel)), lang, spk, sess)


def write_corpus_dir(root, sessions: Iterable) -> int:
    """Store ``(features, language, speaker, session)`` records as feature
    containers plus a manifest; returns the number written."""
    from .container import save_features

    root = os.fspath(root)
    os.makedirs(root, exist_ok=True)
    lines = []
    for feats, lang, spk, sess in sessions:
        rel = os.path.join(str(lang), f"spk{spk:04d}_s{sess:02d}.svdc")
        os.makedirs(os.path.join(root, str(lang)), exist_ok=True)
        save_features(os.path.join(root, rel), feats, language=str(lang))
        lines.append(f"{lang} {spk} {sess} {rel}\n")
    with open(os.path.join(root, MANIFEST), "w") as fh:
        fh.writelines(lines)
    return len(lines)


def with_config_values(cfg: PipelineConfig, **changes) -> PipelineConfig:
    try:
        return replace(cfg, **changes)
    except TypeError as exc:
        raise PipelineError(str(exc), stage="config") from None
