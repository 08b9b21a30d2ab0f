"""Classification metrics between a predicted label map and ground
truth: overall pixel accuracy, Cohen's kappa, and per-class F1, all
built on a shared confusion matrix. Pixels whose ground truth is
UNLABELED are skipped entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import UNLABELED, LabelMap


class MetricUndefined(ValueError):
    """The requested metric has no defined value on this matrix."""


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (num_classes, num_classes) int64, rows = gt

    def __post_init__(self):
        c = self.counts
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("confusion matrix must be square")
        if (c < 0).any():
            raise ValueError("counts must be non-negative")

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)


def confusion(pred: LabelMap, gt: LabelMap, num_classes: int) -> ConfusionMatrix:
    """Accumulate (gt, pred) counts over pixels with labeled ground truth."""
    if pred.labels.shape != gt.labels.shape:
        raise ValueError("prediction and ground truth dimensions differ")
    mask = gt.labels != UNLABELED
    g = gt.labels[mask].astype(np.int64)
    p = pred.labels[mask].astype(np.int64)
    if g.size and (g.max() >= num_classes or p.max() >= num_classes or (p < 0).any()):
        raise ValueError("label out of range for the declared class count")
    counts = np.bincount(g * num_classes + p,
                         minlength=num_classes * num_classes)
    return ConfusionMatrix(counts.reshape(num_classes, num_classes))


def overall_accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.total


def cohen_kappa(cm: ConfusionMatrix) -> float:
    """kappa = (p_o - p_e) / (1 - p_e); returns 1.0 for the degenerate
    perfect single-cell matrix where p_e = p_o = 1."""
    total = cm.total
    if total == 0:
        raise ValueError("empty confusion matrix")
    p_o = float(np.trace(cm.counts)) / total
    rows = cm.counts.sum(axis=1).astype(np.float64)
    cols = cm.counts.sum(axis=0).astype(np.float64)
    p_e = float(rows @ cols) / (total * total)
    if p_e == 1.0:
        if p_o == 1.0:
            return 1.0
        raise MetricUndefined("kappa undefined: expected agreement is 1 but observed is not")
    return (p_o - p_e) / (1.0 - p_e)


def f1_score(cm: ConfusionMatrix, class_id: int) -> float:
    """F1 for one class. Raises MetricUndefined when the class appears
    in neither the prediction nor the ground truth."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    tp = int(cm.counts[class_id, class_id])
    fp = int(cm.counts[:, class_id].sum()) - tp
    fn = int(cm.counts[class_id, :].sum()) - tp
    if tp == 0:
        if fp == 0 and fn == 0:
            raise MetricUndefined(
                f"F1 not applicable: class {class_id} absent from prediction and ground truth")
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


CSV_HEADER = "algorithm,regions,acc_pct,f1_car,kappa"


def csv_row(algorithm: str, regions: float, cm: ConfusionMatrix, car_class: int) -> str:
    """Classification report row: algorithm, regions, Acc.%, F1, kappa."""
    try:
        f1 = f"{f1_score(cm, car_class):.2f}"
    except MetricUndefined:
        f1 = "n/a"
    return (f"{algorithm},{regions:g},{overall_accuracy(cm) * 100:.2f},"
            f"{f1},{cohen_kappa(cm):.2f}")
