"""Per-region feature construction: multi-scale patches centered on
region centroids, bilinear resizing, a built-in color-statistics
descriptor, and ingestion of externally computed feature files (the
substitution point for deep feature extractors).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster import RasterImage, Segmentation, region_stats


@dataclass(frozen=True)
class DescriptorKind:
    """Feature descriptor selector: builtin color statistics, or an
    external file of precomputed per-region vectors."""

    kind: str  # "builtin" | "external"
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("builtin", "external"):
            raise ValueError("descriptor kind must be 'builtin' or 'external'")
        if self.kind == "external" and not self.path:
            raise ValueError("external descriptor needs a feature file path")


@dataclass(frozen=True)
class PatchSpec:
    scales: tuple[int, ...] = (32, 64, 128)
    resize_to: int = 228

    def __post_init__(self):
        if not self.scales or any(s < 1 for s in self.scales):
            raise ValueError("scales must be non-empty positive side lengths")
        if self.resize_to < 1:
            raise ValueError("resize_to must be >= 1")


@dataclass(frozen=True)
class FeatureSet:
    """One feature vector per region, row i = region i."""

    vectors: np.ndarray  # (region_count, dim) float64

    @property
    def region_count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else int(math.ceil(x - 0.5))


def extract_patch(img: RasterImage, center: tuple[float, float], side: int) -> RasterImage:
    """side x side window centered at round(center), translated to lie
    fully inside the image. Never pads."""
    if side > min(img.height, img.width):
        raise ValueError("patch side exceeds image size")
    r0 = _round_half_away(center[0]) - side // 2
    c0 = _round_half_away(center[1]) - side // 2
    r0 = min(max(r0, 0), img.height - side)
    c0 = min(max(c0, 0), img.width - side)
    return RasterImage(img.data[r0:r0 + side, c0:c0 + side].copy())


def resize_patch(patch: RasterImage, out_side: int) -> RasterImage:
    """Bilinear resize with corner-aligned sample mapping."""
    h, w = patch.height, patch.width
    if h == out_side and w == out_side:
        return RasterImage(patch.data.copy())

    def axis_coords(n_in, n_out):
        if n_out == 1:
            return np.zeros(1)
        return np.arange(n_out) * (n_in - 1) / (n_out - 1)

    ry = axis_coords(h, out_side)
    rx = axis_coords(w, out_side)
    y0 = np.clip(np.floor(ry).astype(int), 0, max(h - 2, 0))
    x0 = np.clip(np.floor(rx).astype(int), 0, max(w - 2, 0))
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ry - y0)[:, None, None]
    fx = (rx - x0)[None, :, None]
    d = patch.data
    rows = d[y0] * (1 - fy) + d[y1] * fy            # (out, w, c)
    out = rows[:, x0] * (1 - fx) + rows[:, x1] * fx  # (out, out, c)
    return RasterImage(np.clip(out, 0.0, 1.0))


def describe_builtin(patch: RasterImage, bins: int = 8) -> np.ndarray:
    """Per channel: mean, population std, and a normalized intensity
    histogram over [0, 1] -> dim = channels * (2 + bins)."""
    parts = []
    for ch in range(patch.channels):
        v = patch.data[:, :, ch].ravel()
        # equivalent to np.histogram over [0, 1] with `bins` equal bins
        idx = np.minimum((v * bins).astype(np.int64), bins - 1)
        hist = np.bincount(idx, minlength=bins)
        parts.append([v.mean(), v.std()])
        parts.append(hist / v.size)
    return np.concatenate(parts)


def load_external_features(path) -> dict[int, np.ndarray]:
    """Parse a feature file: one 'region_id, v1, ..., vd' row per region,
    '#' comments. All rows must share the same dimension."""
    vectors: dict[int, np.ndarray] = {}
    dim = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) < 2:
            raise ValueError(f"{path}:{lineno}: expected 'region_id, v1, ...'")
        rid = int(parts[0])
        if rid in vectors:
            raise ValueError(f"{path}:{lineno}: duplicate region id {rid}")
        vec = np.array([float(p) for p in parts[1:]])
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise ValueError(f"{path}:{lineno}: inconsistent dims ({len(vec)} vs {dim})")
        vectors[rid] = vec
    if not vectors:
        raise ValueError(f"{path}: no feature rows")
    return vectors


def save_features(features: FeatureSet, path) -> None:
    with open(path, "w") as f:
        for rid, vec in enumerate(features.vectors):
            f.write(str(rid) + ", " + ", ".join(repr(float(v)) for v in vec) + "\n")


def build_samples(img: RasterImage, seg: Segmentation, spec: PatchSpec,
                  external: dict[int, np.ndarray] | None = None) -> FeatureSet:
    """One sample per region.

    With the builtin descriptor (external=None): patches at every scale
    centered on the region centroid, resized to spec.resize_to,
    described, and concatenated in ascending-scale order. With an
    external feature map: vectors looked up by region id.
    """
    if seg.regions.shape != (img.height, img.width):
        raise ValueError("image and segmentation dimensions differ")
    if external is not None:
        missing = [r for r in range(seg.region_count) if r not in external]
        if missing:
            raise ValueError(f"external features missing region ids {missing[:5]}")
        return FeatureSet(np.stack([external[r] for r in range(seg.region_count)]))
    stats = region_stats(seg)
    scales = sorted(spec.scales)
    rows = []
    for rid in range(seg.region_count):
        center = tuple(stats.centroids[rid])
        blocks = [describe_builtin(resize_patch(extract_patch(img, center, s),
                                                spec.resize_to))
                  for s in scales]
        rows.append(np.concatenate(blocks))
    return FeatureSet(np.stack(rows))
