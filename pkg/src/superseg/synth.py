"""Synthetic scene generator: geometric shapes with per-class noisy
colors, so the full pipeline and its tests run without any external
dataset."""

from __future__ import annotations

import numpy as np

from .raster import LabelMap, Palette, RasterImage

DEFAULT_CLASS_COLORS = {
    "ground": (0.75, 0.72, 0.60),
    "building": (0.25, 0.30, 0.75),
    "car": (0.80, 0.15, 0.15),
}

DEFAULT_PALETTE = Palette(
    names=("ground", "building", "car"),
    colors=((191, 184, 153), (64, 77, 191), (204, 38, 38)),
)


def generate_scene(size: int = 256, num_shapes: int = 12, noise_sigma: float = 0.03,
                   seed: int = 0) -> tuple[RasterImage, LabelMap]:
    """Scene of >= num_shapes rectangles/disks of classes 1..2 over a
    class-0 background, with Gaussian pixel noise on distinct per-class
    base colors."""
    rng = np.random.default_rng(seed)
    labels = np.zeros((size, size), dtype=np.int32)
    rows, cols = np.indices((size, size))
    for i in range(num_shapes):
        cls = 1 + i % 2
        if rng.random() < 0.5:
            h = rng.integers(size // 6, size // 3)
            w = rng.integers(size // 6, size // 3)
            r0 = rng.integers(0, size - h)
            c0 = rng.integers(0, size - w)
            labels[r0:r0 + h, c0:c0 + w] = cls
        else:
            rad = rng.integers(size // 10, size // 6)
            cr = rng.integers(rad, size - rad)
            cc = rng.integers(rad, size - rad)
            labels[(rows - cr) ** 2 + (cols - cc) ** 2 <= rad * rad] = cls

    base = np.array([DEFAULT_CLASS_COLORS[n] for n in DEFAULT_PALETTE.names])
    img = base[labels] + rng.normal(0.0, noise_sigma, (size, size, 3))
    img = np.clip(img, 0.0, 1.0)
    # match what an 8-bit round trip through PNG files would give
    img = np.round(img * 255.0) / 255.0
    return RasterImage(img), LabelMap(labels)
