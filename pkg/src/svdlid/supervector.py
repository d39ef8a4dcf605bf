"""Mean supervectors and the UBM-centred difference matrix (scheme 2)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .gmm import DiagGmm


def supervector(model: DiagGmm) -> np.ndarray:
    """Component-major concatenation of the means: mean i fills [i*d, (i+1)*d)."""
    return model.means.reshape(-1).copy()


def difference_vector(model: DiagGmm, ubm: DiagGmm) -> np.ndarray:
    if model.means.shape != ubm.means.shape:
        raise DimensionMismatchError(
            f"model means {model.means.shape} do not match UBM {ubm.means.shape}",
            stage="supervector")
    return supervector(model) - supervector(ubm)


@dataclass(frozen=True)
class DifferenceMatrix:
    rows: np.ndarray
    labels: list
    ubm_mean: np.ndarray


def build_difference_matrix(models, ubm: DiagGmm) -> DifferenceMatrix:
    """One row per (adapted model, label): its supervector minus the UBM's."""
    ubm_mean = supervector(ubm)
    rows = np.empty((len(models), ubm_mean.size))
    labels = []
    for u, (model, label) in enumerate(models):
        rows[u] = difference_vector(model, ubm)
        labels.append(label)
    return DifferenceMatrix(rows, labels, ubm_mean)
