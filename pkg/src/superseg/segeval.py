"""Segmentation-quality metrics: undersegmentation error, boundary
recall, average purity, and the oracle accuracy of the best per-region
constant labeling.

Ground-truth segments are the 4-connected components of same-class
pixels. UNLABELED pixels are excluded from every numerator and
denominator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import (UNLABELED, LabelMap, Segmentation, extract_boundaries,
                     majority_label)

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass(frozen=True)
class SegMetricsReport:
    region_count: int
    ue: float
    br: float
    ap: float
    oracle: float

    def csv_row(self, algorithm: str) -> str:
        """Segmentation report row: algorithm, regions, UE%, BR%, AP%,
        oracle%."""
        return (f"{algorithm},{self.region_count},{self.ue * 100:.2f},"
                f"{self.br * 100:.2f},{self.ap * 100:.2f},{self.oracle * 100:.2f}")


CSV_HEADER = "algorithm,regions,ue_pct,br_pct,ap_pct,oracle_pct"


def _check_dims(seg: Segmentation, gt: LabelMap):
    if seg.regions.shape != gt.labels.shape:
        raise ValueError("segmentation and ground truth dimensions differ")


def gt_segments(gt: LabelMap) -> np.ndarray:
    """4-connected components of same-class non-sentinel pixels,
    labeled 1..K (0 where UNLABELED)."""
    out = np.zeros(gt.labels.shape, dtype=np.int64)
    next_id = 1
    for cls in np.unique(gt.labels):
        if cls == UNLABELED:
            continue
        comp, ncomp = ndimage.label(gt.labels == cls, structure=_FOUR_CONN)
        mask = comp > 0
        out[mask] = comp[mask] + (next_id - 1)
        next_id += ncomp
    return out


def undersegmentation_error(seg: Segmentation, gt: LabelMap) -> float:
    """UE = (1/N) * sum over gt segments S, regions P overlapping S of
    min(|P & S|, |P| - |P & S|), with P restricted to labeled pixels and
    N the labeled pixel count."""
    _check_dims(seg, gt)
    labeled = gt.labels != UNLABELED
    n = int(labeled.sum())
    if n == 0:
        raise ValueError("ground truth is entirely unlabeled")
    segments = gt_segments(gt)
    nseg = int(segments.max())
    rid = seg.regions[labeled].astype(np.int64)
    sid = segments[labeled]  # >= 1 everywhere under the mask
    region_sizes = np.bincount(rid, minlength=seg.region_count)
    overlap = np.bincount(rid * (nseg + 1) + sid,
                          minlength=seg.region_count * (nseg + 1))
    overlap = overlap.reshape(seg.region_count, nseg + 1)[:, 1:]
    leak = np.minimum(overlap, region_sizes[:, None] - overlap)
    total = int(leak[overlap > 0].sum())
    return total / n


def boundary_recall(seg: Segmentation, gt: LabelMap, tol: int = 3) -> float:
    """Fraction of labeled ground-truth boundary pixels with a
    segmentation boundary pixel within Chebyshev distance tol."""
    _check_dims(seg, gt)
    gt_bnd = extract_boundaries(gt) & (gt.labels != UNLABELED)
    total = int(gt_bnd.sum())
    if total == 0:
        return 1.0
    seg_bnd = extract_boundaries(seg)
    if tol > 0:
        seg_bnd = ndimage.maximum_filter(seg_bnd, size=2 * tol + 1)
    tp = int((gt_bnd & seg_bnd).sum())
    return tp / total


def _region_class_counts(seg: Segmentation, gt: LabelMap) -> np.ndarray:
    num_classes = int(gt.labels.max()) + 1 if gt.labels.max() >= 0 else 0
    mask = gt.labels != UNLABELED
    rid = seg.regions[mask].astype(np.int64)
    cid = gt.labels[mask].astype(np.int64)
    counts = np.bincount(rid * num_classes + cid,
                         minlength=seg.region_count * num_classes)
    return counts.reshape(seg.region_count, num_classes)


def average_purity(seg: Segmentation, gt: LabelMap) -> float:
    """Unweighted mean over regions (with >= 1 labeled pixel) of the
    fraction of labeled region pixels in the region's dominant class."""
    _check_dims(seg, gt)
    counts = _region_class_counts(seg, gt)
    sizes = counts.sum(axis=1)
    keep = sizes > 0
    if not keep.any():
        raise ValueError("no region has labeled pixels")
    return float((counts[keep].max(axis=1) / sizes[keep]).mean())


def oracle_accuracy(seg: Segmentation, gt: LabelMap) -> float:
    """Pixel accuracy of painting every region with its majority label:
    the best any classifier constant on regions can do."""
    _check_dims(seg, gt)
    labels = majority_label(seg, gt)
    painted = labels[seg.regions]
    mask = gt.labels != UNLABELED
    n = int(mask.sum())
    if n == 0:
        raise ValueError("ground truth is entirely unlabeled")
    return int((painted[mask] == gt.labels[mask]).sum()) / n


def evaluate(seg: Segmentation, gt: LabelMap, br_tol: int = 3) -> SegMetricsReport:
    return SegMetricsReport(
        region_count=seg.region_count,
        ue=undersegmentation_error(seg, gt),
        br=boundary_recall(seg, gt, br_tol),
        ap=average_purity(seg, gt),
        oracle=oracle_accuracy(seg, gt),
    )
