"""Core raster data model: images, label maps, segmentations, and file I/O.

Conventions shared by the whole package:

* images are H x W x C float64 arrays with intensities in [0, 1]
  (8-bit samples are mapped by v / 255 on load);
* label maps are H x W int32 arrays of class ids, with ``UNLABELED``
  (-1) marking pixels excluded from every vote and every metric;
* segmentations are H x W int32 arrays whose region ids form the
  contiguous range [0, region_count).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

UNLABELED = -1

_SUPPORTED_SUFFIXES = {".png", ".ppm", ".pgm"}


class RasterFormatError(ValueError):
    """Unsupported or malformed raster file."""


@dataclass(frozen=True)
class RasterImage:
    """Multi-channel image, intensities normalized to [0, 1]."""

    data: np.ndarray  # (H, W, C) float64

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ValueError("image data must be H x W x C")
        if self.data.size and (self.data.min() < 0.0 or self.data.max() > 1.0):
            raise ValueError("intensities must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel class ids; UNLABELED marks excluded pixels."""

    labels: np.ndarray  # (H, W) int32

    def __post_init__(self):
        if self.labels.ndim != 2:
            raise ValueError("labels must be H x W")
        if self.labels.size and self.labels.min() < UNLABELED:
            raise ValueError("labels must be class ids or UNLABELED")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True)
class Segmentation:
    """Total partition of the pixel grid into regions [0, region_count)."""

    regions: np.ndarray  # (H, W) int32
    region_count: int

    def __post_init__(self):
        if self.regions.ndim != 2:
            raise ValueError("regions must be H x W")
        ids = np.unique(self.regions)
        if len(ids) != self.region_count or ids[0] != 0 or ids[-1] != self.region_count - 1:
            raise ValueError("region ids must be exactly [0, region_count)")

    @property
    def height(self) -> int:
        return self.regions.shape[0]

    @property
    def width(self) -> int:
        return self.regions.shape[1]


@dataclass(frozen=True)
class Palette:
    """Ordered (class name, RGB triple) pairs; class id = position."""

    names: tuple[str, ...]
    colors: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if len(self.names) != len(self.colors):
            raise ValueError("names and colors must pair up")
        if len(set(self.colors)) != len(self.colors):
            raise ValueError("palette colors must be pairwise distinct")

    def __len__(self) -> int:
        return len(self.names)

    def class_id(self, name: str) -> int:
        return self.names.index(name)


@dataclass(frozen=True)
class RegionStats:
    """Per-region size, centroid and bounding box."""

    sizes: np.ndarray       # (R,) int64
    centroids: np.ndarray   # (R, 2) float64, (row, col)
    bboxes: np.ndarray      # (R, 4) int64, (rmin, cmin, rmax, cmax) inclusive


def load_image(path) -> RasterImage:
    """Read an 8-bit PNG / PPM / PGM into a normalized RasterImage."""
    path = Path(path)
    if path.suffix.lower() not in _SUPPORTED_SUFFIXES:
        raise RasterFormatError(f"unsupported raster format: {path}")
    try:
        with Image.open(path) as im:
            if im.mode == "P":
                im = im.convert("RGB")
            if im.mode not in ("L", "RGB"):
                raise RasterFormatError(f"unsupported bit depth or mode {im.mode!r}: {path}")
            arr = np.asarray(im, dtype=np.float64) / 255.0
    except RasterFormatError:
        raise
    except Exception as exc:
        raise RasterFormatError(f"unreadable raster file {path}: {exc}") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return RasterImage(arr)


def save_image(img: RasterImage, path) -> None:
    """Write a RasterImage as an 8-bit PNG (1 or 3 channels)."""
    arr = np.round(img.data * 255.0).astype(np.uint8)
    if img.channels == 1:
        Image.fromarray(arr[:, :, 0], mode="L").save(path)
    elif img.channels == 3:
        Image.fromarray(arr, mode="RGB").save(path)
    else:
        raise RasterFormatError(f"cannot save {img.channels}-channel image as PNG")


def load_palette(path) -> Palette:
    """Read a palette file: one 'name R G B' entry per line, '#' comments."""
    names, colors = [], []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 'name R G B'")
        names.append(parts[0])
        colors.append(tuple(int(v) for v in parts[1:]))
    return Palette(tuple(names), tuple(colors))


def save_palette(palette: Palette, path) -> None:
    lines = [f"{n} {c[0]} {c[1]} {c[2]}" for n, c in zip(palette.names, palette.colors)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_labels(path, palette: Palette, unknown_to_unlabeled: bool = False) -> LabelMap:
    """Read an RGB label image, mapping each pixel color to its palette index.

    Colors absent from the palette raise unless ``unknown_to_unlabeled``
    is set, in which case they become UNLABELED.
    """
    with Image.open(path) as im:
        rgb = np.asarray(im.convert("RGB"), dtype=np.int64)
    h, w, _ = rgb.shape
    # pack RGB into a single int for a vectorized lookup
    packed = (rgb[:, :, 0] << 16) | (rgb[:, :, 1] << 8) | rgb[:, :, 2]
    labels = np.full((h, w), UNLABELED, dtype=np.int32)
    known = np.zeros((h, w), dtype=bool)
    for cid, (r, g, b) in enumerate(palette.colors):
        mask = packed == ((r << 16) | (g << 8) | b)
        labels[mask] = cid
        known |= mask
    if not unknown_to_unlabeled and not known.all():
        r, c = np.argwhere(~known)[0]
        color = tuple(int(v) for v in rgb[r, c])
        raise ValueError(f"unknown label color {color} at pixel ({r}, {c}) in {path}")
    return LabelMap(labels)


def save_labels(labels: LabelMap, palette: Palette, path,
                unlabeled_color: tuple[int, int, int] = (0, 0, 0)) -> None:
    """Write a LabelMap as an RGB PNG using the palette colors."""
    lut = np.array(list(palette.colors) + [unlabeled_color], dtype=np.uint8)
    idx = np.where(labels.labels == UNLABELED, len(palette), labels.labels)
    Image.fromarray(lut[idx], mode="RGB").save(path)


def save_segmentation(seg: Segmentation, path) -> None:
    """Persist a segmentation: 16-bit PNG of ids + JSON sidecar (.png),
    or a plain-text H x W id grid (.txt)."""
    path = Path(path)
    if path.suffix == ".txt":
        with open(path, "w") as f:
            for row in seg.regions:
                f.write(" ".join(str(int(v)) for v in row) + "\n")
        return
    if seg.region_count > 65536:
        raise ValueError("too many regions for 16-bit PNG; use the .txt format")
    Image.fromarray(seg.regions.astype(np.uint16)).save(path)
    Path(str(path) + ".json").write_text(
        json.dumps({"region_count": seg.region_count}) + "\n")


def load_segmentation(path) -> Segmentation:
    path = Path(path)
    if path.suffix == ".txt":
        raw = np.loadtxt(path, dtype=np.int32, ndmin=2)
    else:
        with Image.open(path) as im:
            raw = np.asarray(im, dtype=np.int32)
        meta = json.loads(Path(str(path) + ".json").read_text())
        seg = Segmentation(raw, int(meta["region_count"]))
        return seg
    return relabel_contiguous(raw)


def relabel_contiguous(raw: np.ndarray) -> Segmentation:
    """Remap arbitrary region ids to [0, n) by first occurrence in
    row-major order."""
    raw = np.asarray(raw)
    flat = raw.ravel()
    _, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    # unique sorts by id value; rerank by first occurrence instead
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    regions = rank[inverse].reshape(raw.shape).astype(np.int32)
    return Segmentation(regions, len(order))


def region_stats(seg: Segmentation) -> RegionStats:
    """Size, centroid (mean pixel coordinates) and bounding box per region."""
    ids = seg.regions.ravel()
    n = seg.region_count
    sizes = np.bincount(ids, minlength=n).astype(np.int64)
    rows, cols = np.indices(seg.regions.shape)
    rsum = np.bincount(ids, weights=rows.ravel(), minlength=n)
    csum = np.bincount(ids, weights=cols.ravel(), minlength=n)
    centroids = np.stack([rsum / sizes, csum / sizes], axis=1)
    bboxes = np.empty((n, 4), dtype=np.int64)
    order = np.argsort(ids, kind="stable")
    bounds = np.searchsorted(ids[order], np.arange(n + 1))
    rflat, cflat = rows.ravel()[order], cols.ravel()[order]
    for i in range(n):
        lo, hi = bounds[i], bounds[i + 1]
        bboxes[i] = (rflat[lo:hi].min(), cflat[lo:hi].min(),
                     rflat[lo:hi].max(), cflat[lo:hi].max())
    return RegionStats(sizes, centroids, bboxes)


def majority_label(seg: Segmentation, gt: LabelMap) -> np.ndarray:
    """Majority ground-truth class per region.

    UNLABELED pixels are excluded from the vote; ties break toward the
    smallest class id; regions with no labeled pixel get UNLABELED.
    """
    if seg.regions.shape != gt.labels.shape:
        raise ValueError("segmentation and label map dimensions differ")
    n = seg.region_count
    num_classes = int(gt.labels.max()) + 1 if gt.labels.max() >= 0 else 0
    out = np.full(n, UNLABELED, dtype=np.int32)
    if num_classes == 0:
        return out
    mask = gt.labels != UNLABELED
    rid = seg.regions[mask].astype(np.int64)
    cid = gt.labels[mask].astype(np.int64)
    counts = np.bincount(rid * num_classes + cid,
                         minlength=n * num_classes).reshape(n, num_classes)
    voted = counts.sum(axis=1) > 0
    out[voted] = counts[voted].argmax(axis=1)  # argmax picks smallest id on ties
    return out


def extract_boundaries(ids: np.ndarray) -> np.ndarray:
    """Boolean mask of pixels with a 4-connected neighbor of different id.

    Accepts a raw H x W id array, a Segmentation, or a LabelMap.
    """
    if isinstance(ids, Segmentation):
        ids = ids.regions
    elif isinstance(ids, LabelMap):
        ids = ids.labels
    out = np.zeros(ids.shape, dtype=bool)
    dv = ids[1:, :] != ids[:-1, :]
    out[1:, :] |= dv
    out[:-1, :] |= dv
    dh = ids[:, 1:] != ids[:, :-1]
    out[:, 1:] |= dh
    out[:, :-1] |= dh
    return out
