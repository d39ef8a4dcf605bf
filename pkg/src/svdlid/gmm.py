"""Diagonal-covariance GMMs: EM training of the UBM, mean-only MAP
adaptation, likelihood evaluation and frame-wise component decoding."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionMismatchError, GmmError
from .features import FeatureMatrix

log = logging.getLogger(__name__)

LOG_2PI = np.log(2.0 * np.pi)
_CHUNK = 65536


def _as_frames(feats) -> np.ndarray:
    if isinstance(feats, FeatureMatrix):
        return feats.frames
    x = np.asarray(feats, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    return x


@dataclass(frozen=True, eq=False)
class DiagGmm:
    """M-component mixture with diagonal covariances."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        mu = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        var = np.atleast_2d(np.asarray(self.variances, dtype=np.float64))
        if w.ndim != 1 or mu.shape[0] != w.size or var.shape != mu.shape:
            raise GmmError(f"inconsistent GMM shapes: weights {w.shape}, "
                           f"means {mu.shape}, variances {var.shape}")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise GmmError("mixture weights must be non-negative and sum to 1")
        if np.any(var <= 0) or not np.all(np.isfinite(mu)):
            raise GmmError("variances must be positive and means finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", var)

    @property
    def n_components(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def replace_means(self, means) -> "DiagGmm":
        return DiagGmm(self.weights, means, self.variances)

    def _check(self, x):
        if x.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"features have dimension {x.shape[1]}, model expects {self.dim}",
                stage="gmm")

    def component_log_densities(self, feats, with_weights=True) -> np.ndarray:
        """T x M matrix of log N(x_t; mu_m, var_m) (+ log w_m)."""
        x = _as_frames(feats)
        self._check(x)
        prec = 1.0 / self.variances
        const = -0.5 * (self.dim * LOG_2PI + np.log(self.variances).sum(axis=1)
                        + (self.means ** 2 * prec).sum(axis=1))
        out = const + x @ (self.means * prec).T - 0.5 * ((x ** 2) @ prec.T)
        if with_weights:
            with np.errstate(divide="ignore"):
                out += np.log(self.weights)
        return out

    def equals(self, other: "DiagGmm") -> bool:
        return (np.array_equal(self.weights, other.weights)
                and np.array_equal(self.means, other.means)
                and np.array_equal(self.variances, other.variances))


def responsibilities(model: DiagGmm, feats) -> np.ndarray:
    lj = model.component_log_densities(feats)
    return np.exp(lj - logsumexp(lj, axis=1, keepdims=True))


def log_likelihood(model: DiagGmm, feats) -> float:
    """Mean per-frame log-likelihood."""
    x = _as_frames(feats)
    model._check(x)
    total = 0.0
    for s in range(0, x.shape[0], _CHUNK):
        total += logsumexp(model.component_log_densities(x[s:s + _CHUNK]), axis=1).sum()
    return total / x.shape[0]


def _direct_log_densities(model: DiagGmm, x, with_weights):
    """Same quantity as ``component_log_densities`` written as a sum of
    squared differences, so exact ties between components stay exact."""
    dev = ((x[:, None, :] - model.means[None]) ** 2 / model.variances[None]).sum(axis=2)
    out = -0.5 * (dev + np.log(model.variances).sum(axis=1))
    if with_weights:
        with np.errstate(divide="ignore"):
            out += np.log(model.weights)
    return out


def decode_symbols(model: DiagGmm, feats, with_weights: bool = True) -> np.ndarray:
    """Index of the best-scoring component for every frame (ties -> lowest).

    The fast expanded form can break a tie by rounding, so frames whose two
    best scores are within rounding distance are rescored directly.
    """
    x = _as_frames(feats)
    lj = model.component_log_densities(x, with_weights)
    best = np.argmax(lj, axis=1)
    if lj.shape[1] > 1:
        top2 = np.partition(lj, -2, axis=1)[:, -2:]
        scale = 1.0 + np.abs(top2[:, 1]) + 0.5 * ((x ** 2).sum(axis=1) / model.variances.min())
        close = np.flatnonzero(top2[:, 1] - top2[:, 0] <= 1e-10 * scale)
        if close.size:
            best[close] = np.argmax(_direct_log_densities(model, x[close], with_weights), axis=1)
    return best.astype(np.int64)


def kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[c] = x[rng.integers(n)]
        else:
            centers[c] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((x - centers[c]) ** 2).sum(axis=1))
    return centers


def _nearest(x, centers):
    d = (x ** 2).sum(1)[:, None] - 2 * x @ centers.T + (centers ** 2).sum(1)[None, :]
    return np.argmin(d, axis=1)


def _em_step(x, model, floor):
    n_comp, d = model.means.shape
    nk = np.zeros(n_comp)
    sx = np.zeros((n_comp, d))
    sxx = np.zeros((n_comp, d))
    ll = 0.0
    for s in range(0, x.shape[0], _CHUNK):
        xc = x[s:s + _CHUNK]
        lj = model.component_log_densities(xc)
        norm = logsumexp(lj, axis=1, keepdims=True)
        ll += norm.sum()
        g = np.exp(lj - norm)
        nk += g.sum(axis=0)
        sx += g.T @ xc
        sxx += g.T @ (xc ** 2)
    return nk, sx, sxx, ll / x.shape[0]


def train_ubm(feats, n_components: int, em_iters: int = 10, seed: int = 0,
              init_samples: int = 20000, return_history: bool = False):
    """EM-trained diagonal GMM on pooled frames.

    Initialisation is seeded k-means++ on a subsample followed by a few Lloyd
    iterations. The variance floor is 1e-4 times the global variance. With
    ``return_history`` the per-iteration mean log-likelihood is also returned
    (entry 0 is the initial model, entry i the model after iteration i).
    """
    x = _as_frames(feats)
    n, d = x.shape
    if n < 10 * n_components:
        raise GmmError(f"{n} frames are too few for {n_components} components "
                       f"(need at least {10 * n_components})")
    rng = np.random.default_rng(seed)
    floor = 1e-4 * x.var(axis=0)
    floor = np.where(floor > 0, floor, 1e-10)

    sub = x if n <= init_samples else x[np.sort(rng.choice(n, init_samples, replace=False))]
    centers = kmeans_pp(sub, n_components, rng)
    for _ in range(5):
        assign = _nearest(sub, centers)
        for c in range(n_components):
            members = sub[assign == c]
            if len(members):
                centers[c] = members.mean(axis=0)
    assign = _nearest(sub, centers)
    counts = np.bincount(assign, minlength=n_components).astype(np.float64)
    variances = np.empty((n_components, d))
    gvar = sub.var(axis=0)
    for c in range(n_components):
        members = sub[assign == c]
        variances[c] = members.var(axis=0) if len(members) > 1 else gvar
    counts = np.maximum(counts, 1.0)
    model = DiagGmm(counts / counts.sum(), centers, np.maximum(variances, floor))

    history = []
    for it in range(em_iters):
        nk, sx, sxx, ll = _em_step(x, model, floor)
        history.append(ll)
        empty = nk < 1e-10 * n
        safe = np.where(empty, 1.0, nk)
        means = sx / safe[:, None]
        variances = np.maximum(sxx / safe[:, None] - means ** 2, floor)
        if empty.any():
            for c in np.flatnonzero(empty):
                log.warning("EM iteration %d: component %d is empty, re-seeding", it, c)
                means[c] = x[rng.integers(n)]
                variances[c] = np.maximum(x.var(axis=0), floor)
            nk = np.where(empty, 1e-3 * n / n_components, nk)
        model = DiagGmm(nk / nk.sum(), means, variances)
    if return_history:
        history.append(log_likelihood(model, x))
        return model, history
    return model


@dataclass(frozen=True)
class MapConfig:
    relevance_factor: float = 16.0
    adapt_means: bool = True
    adapt_weights: bool = False
    adapt_variances: bool = False

    def __post_init__(self):
        if not np.isfinite(self.relevance_factor) or self.relevance_factor < 0:
            raise ValueError("relevance_factor must be finite and non-negative")
        if not self.adapt_means or self.adapt_weights or self.adapt_variances:
            raise ValueError("only mean adaptation is supported")


def map_adapt(ubm: DiagGmm, feats, cfg: MapConfig = MapConfig()) -> DiagGmm:
    """Mean-only MAP adaptation.

    With posterior counts n_m and first-order statistics F_m against the UBM,
    the adapted mean is ``(F_m + r mu_m) / (n_m + r)``, i.e. the convex
    combination alpha_m E_m[x] + (1 - alpha_m) mu_m with alpha_m = n_m/(n_m + r).
    Weights and variances are copied from the UBM.
    """
    x = _as_frames(feats)
    if x.shape[0] == 0:
        if x.shape[1] != ubm.dim:
            raise DimensionMismatchError("dimension mismatch", stage="gmm")
        return ubm.replace_means(ubm.means.copy())
    g = responsibilities(ubm, x)
    n = g.sum(axis=0)
    f = g.T @ x
    r = cfg.relevance_factor
    denom = n + r
    safe = np.where(denom > 0, denom, 1.0)
    means = np.where((denom > 0)[:, None], (f + r * ubm.means) / safe[:, None], ubm.means)
    return ubm.replace_means(means)
