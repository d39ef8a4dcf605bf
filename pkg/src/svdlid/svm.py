"""One-vs-rest linear soft-margin SVMs trained in the dual with SMO."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatchError, SvmError


@dataclass(frozen=True)
class TrainConfig:
    c: float = 1.0
    tol: float = 1e-4
    max_passes: int = 10000
    standardize: bool = False

    def __post_init__(self):
        if self.c <= 0 or self.tol <= 0:
            raise ValueError("C and tolerance must be positive")


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Per-class hyperplanes; row m of ``weights`` and ``biases[m]`` score
    class ``class_names[m]``. Inputs are divided by ``scale`` first."""

    weights: np.ndarray
    biases: np.ndarray
    c: float
    class_names: tuple
    scale: np.ndarray = None

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.weights, dtype=np.float64))
        b = np.asarray(self.biases, dtype=np.float64).reshape(-1)
        names = tuple(self.class_names)
        if len(names) < 2 or len(set(names)) != len(names):
            raise SvmError("need at least two unique class names")
        if w.shape[0] != len(names) or b.size != len(names):
            raise SvmError("weights/biases do not match the number of classes")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise SvmError("non-finite SVM parameters")
        scale = np.ones(w.shape[1]) if self.scale is None else np.asarray(self.scale, np.float64)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "scale", scale)

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def decision_function(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise DimensionMismatchError(
                f"input length {x.shape[-1]} does not match SVM dimension {self.dim}",
                stage="svm")
        return (x / self.scale) @ self.weights.T + self.biases


@dataclass
class BinarySolution:
    alpha: np.ndarray
    w: np.ndarray
    b: float
    dual_objective: float
    n_iter: int


def dual_objective(alpha, k, y) -> float:
    """sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ k @ ay)


def _bias(alpha, grad, y, c):
    yg = y * grad
    free = (alpha > 0) & (alpha < c)
    if free.any():
        rho = yg[free].mean()
    else:
        at_upper = alpha >= c
        ub_mask = (at_upper & (y < 0)) | (~at_upper & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (~at_upper & (y < 0))
        ub = yg[ub_mask].min() if ub_mask.any() else np.inf
        lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub + lb) else (ub if np.isfinite(ub) else lb)
    return -float(rho)


def train_binary(x, y, c: float, tol: float = 1e-4, max_iter: int = 10_000_000,
                 gram=None) -> BinarySolution:
    """Solve min 1/2|w|^2 + C sum xi with labels y in {-1, +1}."""
    x = np.asarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    k = np.ascontiguousarray(x @ x.T if gram is None else gram)
    alpha, grad, n_iter = _kernels.smo(k, y, float(c), float(tol), int(max_iter))
    alpha = np.clip(alpha, 0.0, c)
    w = (alpha * y) @ x
    return BinarySolution(alpha, w, _bias(alpha, grad, y, c), dual_objective(alpha, k, y), n_iter)


def train(x, labels: Sequence, cfg: TrainConfig = TrainConfig(), class_names=None) -> SvmModel:
    """One-vs-rest training: class m against all others, one hyperplane each."""
    x = np.asarray(x, dtype=np.float64)
    labels = list(labels)
    if x.ndim != 2 or x.shape[0] != len(labels):
        raise SvmError("feature rows and labels differ in number")
    if not np.all(np.isfinite(x)):
        raise SvmError("non-finite features")
    names = tuple(class_names) if class_names is not None else tuple(sorted(set(labels)))
    if len(set(labels)) < 2:
        raise SvmError("training data contains a single class")
    scale = None
    if cfg.standardize:
        scale = x.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        x = x / scale
    gram = np.ascontiguousarray(x @ x.T)
    lab = np.asarray(labels, dtype=object)
    weights, biases = [], []
    for name in names:
        y = np.where(lab == name, 1.0, -1.0)
        sol = train_binary(x, y, cfg.c, cfg.tol, cfg.max_passes * max(len(labels), 1), gram)
        weights.append(sol.w)
        biases.append(sol.b)
    return SvmModel(np.array(weights), np.array(biases), cfg.c, names, scale)


def predict(model: SvmModel, x):
    """Return (class name, per-class scores); ties go to the lowest class index."""
    scores = model.decision_function(x)
    return model.class_names[int(np.argmax(scores))], scores
