"""SVD feature embedding with singular-value energy truncation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, EmbeddingError

RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EmbeddingSpace:
    """Retained singular values/right vectors plus the full spectrum.

    ``spectrum`` holds every non-negligible singular value (R of them);
    ``singular_values`` and ``vectors`` (D x L) the first L.
    """

    singular_values: np.ndarray
    vectors: np.ndarray
    energy_fraction: float
    spectrum: np.ndarray

    @property
    def rank(self) -> int:
        return self.singular_values.size

    @property
    def ambient_dim(self) -> int:
        return self.vectors.shape[0]

    def project(self, x) -> np.ndarray:
        return project(self, x)


@dataclass(frozen=True)
class EmbeddedMatrix:
    rows: np.ndarray
    labels: Optional[list] = None


def energy_fractions(spectrum) -> np.ndarray:
    e = np.asarray(spectrum, dtype=np.float64) ** 2
    return np.cumsum(e) / e.sum()


def retained_rank(spectrum, tau: float) -> int:
    """Smallest k whose cumulative squared-singular-value fraction reaches tau."""
    frac = energy_fractions(spectrum)
    # 1e-12 slack so tau = 1 is reachable despite rounding in the cumulative sum.
    return int(np.searchsorted(frac, tau - 1e-12, side="left")) + 1


def thin_svd(x: np.ndarray):
    """Thin SVD with a reproducible sign convention: the largest-magnitude
    entry of every left singular vector is made non-negative."""
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    pivot = np.argmax(np.abs(u), axis=0)
    signs = np.where(u[pivot, np.arange(u.shape[1])] < 0, -1.0, 1.0)
    return u * signs, s, vt * signs[:, None]


def fit(x, tau: float = 0.60, labels=None):
    """Fit the embedding on an N x D training matrix.

    Directions with singular value below 1e-12 * s_1 are discarded before
    truncation. Returns the space and the training rows projected into it
    (``X V_L S_L^-1``, which equals the first L left singular vectors).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise EmbeddingError(f"need an N x D matrix with N >= 2, got {x.shape}")
    if not 0 < tau <= 1:
        raise EmbeddingError(f"energy fraction must lie in (0, 1], got {tau}")
    if not np.any(x):
        raise EmbeddingError("cannot embed an all-zero matrix")
    u, s, vt = thin_svd(x)
    keep = s > RANK_TOL * s[0]
    spectrum = s[keep]
    rank = retained_rank(spectrum, tau)
    space = EmbeddingSpace(spectrum[:rank].copy(), np.ascontiguousarray(vt[:rank].T),
                           float(tau), spectrum.copy())
    return space, EmbeddedMatrix(project(space, x), labels)


def project(space: EmbeddingSpace, x) -> np.ndarray:
    """x V_L diag(s_L)^-1 for a D-vector or an N x D matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != space.ambient_dim:
        raise DimensionMismatchError(
            f"vector length {x.shape[-1]} does not match embedding dimension "
            f"{space.ambient_dim}", stage="embedding")
    return (x @ space.vectors) / space.singular_values


def energy_curve(spectrum_or_space) -> list:
    """[(index, cumulative energy fraction)] with 1-based indices."""
    spec = (spectrum_or_space.spectrum if isinstance(spectrum_or_space, EmbeddingSpace)
            else np.atleast_1d(np.asarray(spectrum_or_space, dtype=np.float64)))
    if spec.size == 0:
        raise EmbeddingError("empty spectrum")
    return [(i + 1, float(f)) for i, f in enumerate(energy_fractions(spec))]


def write_energy_curve(curve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "energy_fraction"])
        w.writerows(curve)
