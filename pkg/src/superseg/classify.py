"""Multi-class linear SVM trained by stochastic gradient descent, plus
semantic-map painting of predicted region labels.

One-vs-rest hinge loss with L2 penalty; features are standardized with
training statistics; step schedule eta_t = eta0 / (1 + eta0*lambda*t).
Training is deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster import UNLABELED, LabelMap, Segmentation
from .features import FeatureSet


@dataclass(frozen=True)
class TrainConfig:
    lam: float = 1e-4
    epochs: int = 20
    eta0: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.lam <= 0 or self.epochs < 1 or self.eta0 <= 0:
            raise ValueError("invalid training configuration")


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray  # (num_classes, dim)
    biases: np.ndarray   # (num_classes,)
    mean: np.ndarray     # (dim,)
    std: np.ndarray      # (dim,) > 0

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def standardize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std

    def scores(self, x: np.ndarray) -> np.ndarray:
        return self.standardize(x) @ self.weights.T + self.biases


def _objective(w, b, lam, x, y):
    """Mean hinge loss + (lam/2)*||w||^2 for one binary problem."""
    margins = y * (x @ w + b)
    return float(np.maximum(0.0, 1.0 - margins).mean() + 0.5 * lam * (w @ w))


def train_svm(samples: FeatureSet, labels: np.ndarray, cfg: TrainConfig = TrainConfig(),
              objective_log: list | None = None) -> LinearModel:
    """Train one-vs-rest linear SVMs by SGD.

    UNLABELED samples are dropped; at least two distinct classes must
    remain. If objective_log is given, the summed regularized objective
    at the end of each epoch is appended to it.
    """
    labels = np.asarray(labels)
    if len(labels) != samples.region_count:
        raise ValueError("one label per sample required")
    keep = labels != UNLABELED
    x = samples.vectors[keep]
    y = labels[keep]
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("training needs at least 2 distinct classes")
    num_classes = int(y.max()) + 1

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    xs = (x - mean) / std

    n, dim = xs.shape
    w = np.zeros((num_classes, dim))
    b = np.zeros(num_classes)
    rng = np.random.default_rng(cfg.seed)
    t = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            eta = cfg.eta0 / (1.0 + cfg.eta0 * cfg.lam * t)
            xi = xs[i]
            for c in range(num_classes):
                yc = 1.0 if y[i] == c else -1.0
                margin = yc * (w[c] @ xi + b[c])
                w[c] *= (1.0 - eta * cfg.lam)
                if margin < 1.0:
                    w[c] += eta * yc * xi
                    b[c] += eta * yc
        if objective_log is not None:
            objective_log.append(sum(
                _objective(w[c], b[c], cfg.lam, xs,
                           np.where(y == c, 1.0, -1.0))
                for c in range(num_classes)))
    return LinearModel(w, b, mean, std)


def predict(model: LinearModel, sample: np.ndarray) -> int:
    """Argmax class score; ties break toward the smallest class id."""
    sample = np.asarray(sample, dtype=np.float64)
    if sample.shape != (model.dim,):
        raise ValueError("sample dimension does not match the model")
    return int(np.argmax(model.scores(sample)))


def predict_batch(model: LinearModel, samples: FeatureSet) -> np.ndarray:
    if samples.dim != model.dim:
        raise ValueError("sample dimension does not match the model")
    return np.argmax(model.scores(samples.vectors), axis=1).astype(np.int32)


def training_accuracy(model: LinearModel, samples: FeatureSet, labels: np.ndarray) -> float:
    labels = np.asarray(labels)
    keep = labels != UNLABELED
    pred = predict_batch(model, FeatureSet(samples.vectors[keep]))
    return float((pred == labels[keep]).mean())


def build_semantic_map(seg: Segmentation, region_labels: np.ndarray) -> LabelMap:
    """Paint each pixel with the label of its region."""
    region_labels = np.asarray(region_labels, dtype=np.int32)
    if len(region_labels) != seg.region_count:
        raise ValueError("one label per region required")
    return LabelMap(region_labels[seg.regions])


def save_model(model: LinearModel, path) -> None:
    """Text format: 'num_classes dim' header, standardization rows, then
    per-class weight row + bias row."""
    lines = [f"{model.num_classes} {model.dim}",
             " ".join(repr(float(v)) for v in model.mean),
             " ".join(repr(float(v)) for v in model.std)]
    for c in range(model.num_classes):
        lines.append(" ".join(repr(float(v)) for v in model.weights[c]))
        lines.append(repr(float(model.biases[c])))
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> LinearModel:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    num_classes, dim = (int(v) for v in lines[0].split())
    mean = np.array([float(v) for v in lines[1].split()])
    std = np.array([float(v) for v in lines[2].split()])
    weights = np.empty((num_classes, dim))
    biases = np.empty(num_classes)
    for c in range(num_classes):
        weights[c] = [float(v) for v in lines[3 + 2 * c].split()]
        biases[c] = float(lines[4 + 2 * c])
    return LinearModel(weights, biases, mean, std)
