"""Segmentation algorithms: SLIC and LSC superpixels, Quickshift mode
seeking, a sliding-window grid baseline, and a hierarchical best-merge
baseline.

Every algorithm is deterministic: identical inputs and parameters give
bit-identical segmentations. All outputs satisfy the Segmentation
invariants (total partition, contiguous ids).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .raster import RasterImage, Segmentation, relabel_contiguous

# sRGB -> XYZ (D65)
_RGB2XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_WHITE_D65 = np.array([0.95047, 1.0, 1.08883])


@dataclass(frozen=True)
class SlicParams:
    k: int
    compactness: float = 10.0
    max_iters: int = 10
    min_region_fraction: float = 0.25

    def __post_init__(self):
        if self.k < 1 or self.compactness <= 0 or self.max_iters < 1:
            raise ValueError("invalid SLIC parameters")
        if not 0 < self.min_region_fraction <= 1:
            raise ValueError("min_region_fraction must be in (0, 1]")


@dataclass(frozen=True)
class LscParams:
    k: int
    ratio: float = 0.5
    max_iters: int = 10

    def __post_init__(self):
        if self.k < 1 or self.ratio <= 0 or self.max_iters < 1:
            raise ValueError("invalid LSC parameters")


@dataclass(frozen=True)
class QuickshiftParams:
    kernel_size: float = 2.0
    max_dist: float = 8.0
    color_ratio: float = 1.0

    def __post_init__(self):
        if self.kernel_size <= 0 or self.max_dist <= 0:
            raise ValueError("invalid Quickshift parameters")


@dataclass(frozen=True)
class MergeParams:
    target_regions: int

    def __post_init__(self):
        if self.target_regions < 1:
            raise ValueError("target_regions must be >= 1")


def rgb_to_lab(img: RasterImage) -> RasterImage:
    """sRGB -> CIELAB under D65, channel order (R, G, B).

    Returns a raw H x W x 3 float array (L in [0, 100], a/b unbounded),
    not a RasterImage, since Lab values leave [0, 1].
    """
    if img.channels != 3:
        raise ValueError("Lab conversion needs exactly 3 channels")
    srgb = img.data
    linear = np.where(srgb <= 0.04045, srgb / 12.92,
                      ((srgb + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _RGB2XYZ.T / _WHITE_D65
    eps = (6.0 / 29.0) ** 3
    f = np.where(xyz > eps, np.cbrt(xyz), xyz / (3 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def _color_features(img: RasterImage) -> np.ndarray:
    """Lab for 3-channel images, raw channel values otherwise."""
    return rgb_to_lab(img) if img.channels == 3 else np.array(img.data)


def _seed_grid(h: int, w: int, k: int) -> np.ndarray:
    """Seed positions (row, col) on a near-square grid of ~k cells.

    Seeds sit at cell centers in pixel-center coordinates, i.e. at
    (i + 0.5) * cell - 0.5, so even-sized tilings split without ties.
    """
    gr = max(1, round(math.sqrt(k * h / w)))
    gc = max(1, round(k / gr))
    rows = (np.arange(gr) + 0.5) * h / gr - 0.5
    cols = (np.arange(gc) + 0.5) * w / gc - 0.5
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    return np.stack([rr.ravel(), cc.ravel()], axis=1)


def _perturb_seeds(seeds: np.ndarray, feat: np.ndarray) -> np.ndarray:
    """Move each seed to the strictly lowest-gradient pixel in the 3x3
    neighborhood of its nearest pixel (row-major first on ties)."""
    h, w = feat.shape[:2]
    gr, gc = np.gradient(feat, axis=(0, 1))
    grad = (gr ** 2 + gc ** 2).sum(axis=2)
    out = seeds.copy()
    for i, (r, c) in enumerate(seeds):
        r0 = min(max(int(round(r)), 0), h - 1)
        c0 = min(max(int(round(c)), 0), w - 1)
        best = grad[r0, c0]
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                rr, cc = r0 + dr, c0 + dc
                if 0 <= rr < h and 0 <= cc < w and grad[rr, cc] < best:
                    best = grad[rr, cc]
                    out[i] = (rr, cc)
    return out


def slic(img: RasterImage, p: SlicParams) -> Segmentation:
    """SLIC superpixels: localized k-means over (color, position).

    Distance D = sqrt(d_color^2 + (d_xy / S)^2 * m^2) with grid step
    S = sqrt(H*W / k); color distances in Lab for 3-channel input, raw
    channel space otherwise. Connectivity is enforced afterwards with
    min_size = min_region_fraction * S^2.
    """
    h, w = img.height, img.width
    if p.k > h * w:
        raise ValueError("k exceeds pixel count")
    feat = _color_features(img)
    s = math.sqrt(h * w / p.k)
    pos = _perturb_seeds(_seed_grid(h, w, p.k), feat)
    rows0 = np.clip(np.round(pos[:, 0]).astype(int), 0, h - 1)
    cols0 = np.clip(np.round(pos[:, 1]).astype(int), 0, w - 1)
    colors = feat[rows0, cols0].astype(np.float64)
    m2s2 = (p.compactness / s) ** 2
    rows_idx, cols_idx = np.indices((h, w))
    labels = np.zeros((h, w), dtype=np.int32)
    for _ in range(p.max_iters):
        dist = np.full((h, w), np.inf)
        labels.fill(-1)
        for i in range(len(pos)):
            r, c = pos[i]
            r0, r1 = max(0, int(math.floor(r - 2 * s))), min(h, int(math.ceil(r + 2 * s)) + 1)
            c0, c1 = max(0, int(math.floor(c - 2 * s))), min(w, int(math.ceil(c + 2 * s)) + 1)
            win = feat[r0:r1, c0:c1]
            dc2 = ((win - colors[i]) ** 2).sum(axis=2)
            dr = rows_idx[r0:r1, c0:c1] - r
            dcc = cols_idx[r0:r1, c0:c1] - c
            d2 = dc2 + (dr ** 2 + dcc ** 2) * m2s2
            closer = d2 < dist[r0:r1, c0:c1]
            dist[r0:r1, c0:c1][closer] = d2[closer]
            labels[r0:r1, c0:c1][closer] = i
        # 2S windows cover the grid, but guard against drifted centers
        if (labels < 0).any():
            miss = labels < 0
            mr, mc = rows_idx[miss], cols_idx[miss]
            d = (mr[:, None] - pos[:, 0]) ** 2 + (mc[:, None] - pos[:, 1]) ** 2
            labels[miss] = d.argmin(axis=1)
        counts = np.bincount(labels.ravel(), minlength=len(pos))
        nz = counts > 0
        flat = labels.ravel()
        for axis, coords in ((0, rows_idx), (1, cols_idx)):
            sums = np.bincount(flat, weights=coords.ravel(), minlength=len(pos))
            pos[nz, axis] = sums[nz] / counts[nz]
        for ch in range(feat.shape[2]):
            sums = np.bincount(flat, weights=feat[:, :, ch].ravel(), minlength=len(pos))
            colors[nz, ch] = sums[nz] / counts[nz]
    min_size = max(1, int(round(p.min_region_fraction * s * s)))
    return enforce_connectivity(labels, min_size)


def _lsc_embed(img: RasterImage, s: float, ratio: float) -> np.ndarray:
    """Trigonometric kernel embedding: (cos, sin) pairs per color channel
    plus ratio-weighted (cos, sin) pairs for each spatial coordinate
    normalized by the grid step."""
    h, w, c = img.data.shape
    parts = []
    for ch in range(c):
        ang = np.pi * img.data[:, :, ch] / 2.0
        parts += [np.cos(ang), np.sin(ang)]
    rows, cols = np.indices((h, w))
    for coord in (rows / s, cols / s):
        ang = np.pi * coord / 2.0
        parts += [ratio * np.cos(ang), ratio * np.sin(ang)]
    return np.stack(parts, axis=2)


def lsc(img: RasterImage, p: LscParams) -> Segmentation:
    """LSC superpixels: weighted k-means in a trigonometric embedding
    (2 dims per channel + 4 spatial), point weights = embedding norms."""
    h, w = img.height, img.width
    if p.k > h * w:
        raise ValueError("k exceeds pixel count")
    s = math.sqrt(h * w / p.k)
    phi = _lsc_embed(img, s, p.ratio)
    weight = np.sqrt((phi ** 2).sum(axis=2))
    # initialize each center as the mean embedding of its grid cell;
    # sampling the seed pixel instead creates assignment ties that lock
    # in unbalanced tilings on uniform images
    gr = max(1, round(math.sqrt(p.k * h / w)))
    gc = max(1, round(p.k / gr))
    redges = np.linspace(0, h, gr + 1).round().astype(int)
    cedges = np.linspace(0, w, gc + 1).round().astype(int)
    centers = np.empty((gr * gc, phi.shape[2]))
    pos = np.empty((gr * gc, 2))
    for i in range(gr):
        for j in range(gc):
            cell = phi[redges[i]:redges[i + 1], cedges[j]:cedges[j + 1]]
            centers[i * gc + j] = cell.reshape(-1, phi.shape[2]).mean(axis=0)
            pos[i * gc + j] = ((redges[i] + redges[i + 1] - 1) / 2.0,
                               (cedges[j] + cedges[j + 1] - 1) / 2.0)
    rows_idx, cols_idx = np.indices((h, w))
    labels = np.zeros((h, w), dtype=np.int32)
    for _ in range(p.max_iters):
        dist = np.full((h, w), np.inf)
        labels.fill(-1)
        for i in range(len(centers)):
            r, c = pos[i]
            r0, r1 = max(0, int(math.floor(r - 2 * s))), min(h, int(math.ceil(r + 2 * s)) + 1)
            c0, c1 = max(0, int(math.floor(c - 2 * s))), min(w, int(math.ceil(c + 2 * s)) + 1)
            d2 = ((phi[r0:r1, c0:c1] - centers[i]) ** 2).sum(axis=2)
            closer = d2 < dist[r0:r1, c0:c1]
            dist[r0:r1, c0:c1][closer] = d2[closer]
            labels[r0:r1, c0:c1][closer] = i
        if (labels < 0).any():
            miss = labels < 0
            mr, mc = rows_idx[miss], cols_idx[miss]
            d = (mr[:, None] - pos[:, 0]) ** 2 + (mc[:, None] - pos[:, 1]) ** 2
            labels[miss] = d.argmin(axis=1)
        flat = labels.ravel()
        wsum = np.bincount(flat, weights=weight.ravel(), minlength=len(centers))
        nz = wsum > 0
        wflat = weight.ravel()
        for d in range(phi.shape[2]):
            sums = np.bincount(flat, weights=(phi[:, :, d].ravel() * wflat),
                               minlength=len(centers))
            centers[nz, d] = sums[nz] / wsum[nz]
        for axis, coords in ((0, rows_idx), (1, cols_idx)):
            sums = np.bincount(flat, weights=coords.ravel() * wflat,
                               minlength=len(centers))
            pos[nz, axis] = sums[nz] / wsum[nz]
    min_size = max(1, int(round(s * s / 4.0)))
    return enforce_connectivity(labels, min_size)


def _shift_slices(h, w, dr, dc):
    """Slice pairs (p, q) so that arr[q] is arr[p] shifted by (dr, dc),
    restricted to in-bounds pixels."""
    pr = slice(max(0, -dr), h - max(0, dr))
    pc = slice(max(0, -dc), w - max(0, dc))
    qr = slice(max(0, dr), h + min(0, dr))
    qc = slice(max(0, dc), w + min(0, dc))
    return (pr, pc), (qr, qc)


def quickshift_forest(img: RasterImage, p: QuickshiftParams):
    """Quickshift density estimate and parent links.

    Returns (density, parent) where density is the Gaussian Parzen
    estimate of bandwidth kernel_size over a ceil(3*sigma)-radius
    spatial window and parent[r, c] is the flat index of the nearest
    (in joint space) pixel with higher density within spatial distance
    max_dist, or -1 for roots. Density ties rank earlier row-major
    pixels higher; distance ties pick the smaller flat index.
    """
    h, w = img.height, img.width
    feat = _color_features(img) * p.color_ratio
    rows, cols = np.indices((h, w))
    joint = np.dstack([feat, rows.astype(np.float64), cols.astype(np.float64)])
    sigma = p.kernel_size
    rad = int(math.ceil(3 * sigma))

    density = np.zeros((h, w))
    for dr in range(-min(rad, h - 1), min(rad, h - 1) + 1):
        for dc in range(-min(rad, w - 1), min(rad, w - 1) + 1):
            pp, qq = _shift_slices(h, w, dr, dc)
            d2 = ((joint[pp] - joint[qq]) ** 2).sum(axis=2)
            density[pp] += np.exp(-d2 / (2 * sigma * sigma))

    idx = (rows * w + cols).astype(np.int64)
    trad = int(math.ceil(p.max_dist))
    best_d2 = np.full((h, w), np.inf)
    parent = np.full((h, w), -1, dtype=np.int64)
    best_qidx = np.full((h, w), np.iinfo(np.int64).max)
    for dr in range(-trad, trad + 1):
        for dc in range(-trad, trad + 1):
            if dr == 0 and dc == 0:
                continue
            if dr * dr + dc * dc > p.max_dist * p.max_dist:
                continue
            if abs(dr) >= h or abs(dc) >= w:
                continue
            pp, qq = _shift_slices(h, w, dr, dc)
            qi = idx[qq]
            higher = (density[qq] > density[pp]) | (
                (density[qq] == density[pp]) & (qi < idx[pp]))
            d2 = ((joint[pp] - joint[qq]) ** 2).sum(axis=2)
            better = higher & ((d2 < best_d2[pp]) |
                               ((d2 == best_d2[pp]) & (qi < best_qidx[pp])))
            best_d2[pp] = np.where(better, d2, best_d2[pp])
            best_qidx[pp] = np.where(better, qi, best_qidx[pp])
            parent[pp] = np.where(better, qi, parent[pp])
    return density, parent


def quickshift(img: RasterImage, p: QuickshiftParams) -> Segmentation:
    """Quickshift mode seeking: forest components of the parent links
    from quickshift_forest, relabeled contiguously."""
    h, w = img.height, img.width
    _, parent = quickshift_forest(img, p)
    parent = parent.ravel()
    roots = parent < 0
    parent[roots] = np.nonzero(roots)[0]
    # parents strictly increase in (density, -index) rank, so no cycles
    while True:
        grand = parent[parent]
        if (grand == parent).all():
            break
        parent = grand
    return relabel_contiguous(parent.reshape(h, w))


def sliding_window(height: int, width: int, window: int, stride: int) -> Segmentation:
    """Grid partition baseline.

    With stride == window the image tiles row-major and the last
    row/column of tiles absorbs the remainder. With stride < window each
    pixel joins the window whose center is nearest (ties -> smaller
    window index).
    """
    if not (1 <= stride <= window <= min(height, width)):
        raise ValueError("need 1 <= stride <= window <= min(height, width)")
    if stride == window:
        tr = max(1, height // window)
        tc = max(1, width // window)
        row_tile = np.minimum(np.arange(height) // window, tr - 1)
        col_tile = np.minimum(np.arange(width) // window, tc - 1)
        regions = (row_tile[:, None] * tc + col_tile[None, :]).astype(np.int32)
        return Segmentation(regions, tr * tc)
    r_starts = np.arange(0, height - window + 1, stride)
    c_starts = np.arange(0, width - window + 1, stride)
    r_centers = r_starts + (window - 1) / 2.0
    c_centers = c_starts + (window - 1) / 2.0
    # nearest along each axis independently (squared distance separates)
    row_near = np.abs(np.arange(height)[:, None] - r_centers[None, :]).argmin(axis=1)
    col_near = np.abs(np.arange(width)[:, None] - c_centers[None, :]).argmin(axis=1)
    raw = row_near[:, None] * len(c_starts) + col_near[None, :]
    return relabel_contiguous(raw)


def _ward_cost(size_a, sum_a, size_b, sum_b):
    mean_a = sum_a / size_a
    mean_b = sum_b / size_b
    return (size_a * size_b / (size_a + size_b)) * float(((mean_a - mean_b) ** 2).sum())


def hswo_merge(img: RasterImage, p: MergeParams) -> Segmentation:
    """Hierarchical best-merge segmentation.

    Starts from one region per pixel and repeatedly merges the 4-adjacent
    pair with the smallest Ward cost
    (n1*n2/(n1+n2)) * ||mean1 - mean2||^2 until target_regions remain.
    Ties break on the smaller (id1, id2) pair; a merged region keeps the
    smaller id.
    """
    labels, _ = _hswo(img, p.target_regions)
    return relabel_contiguous(labels)


def hswo_merge_trace(img: RasterImage, target_regions: int):
    """Merge sequence [(id1, id2, cost), ...] for verification."""
    _, trace = _hswo(img, target_regions)
    return trace


def _hswo(img: RasterImage, target: int):
    h, w = img.height, img.width
    n = h * w
    if target > n:
        raise ValueError("target_regions exceeds pixel count")
    data = img.data.reshape(n, -1)
    size = {i: 1 for i in range(n)}
    csum = {i: data[i].copy() for i in range(n)}
    neighbors = {i: set() for i in range(n)}
    idx = np.arange(n).reshape(h, w)
    for a, b in zip(idx[:-1, :].ravel(), idx[1:, :].ravel()):
        neighbors[a].add(b)
        neighbors[b].add(a)
    for a, b in zip(idx[:, :-1].ravel(), idx[:, 1:].ravel()):
        neighbors[a].add(b)
        neighbors[b].add(a)

    version = {i: 0 for i in range(n)}
    heap = []
    for a in range(n):
        for b in neighbors[a]:
            if a < b:
                cost = _ward_cost(size[a], csum[a], size[b], csum[b])
                heapq.heappush(heap, (cost, a, b, 0, 0))

    parent = np.arange(n)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    trace = []
    alive = n
    while alive > target:
        cost, a, b, va, vb = heapq.heappop(heap)
        if a not in size or b not in size or version[a] != va or version[b] != vb:
            continue
        trace.append((a, b, cost))
        keep, gone = a, b  # a < b by construction
        size[keep] += size[gone]
        csum[keep] = csum[keep] + csum[gone]
        version[keep] += 1
        gone_neighbors = neighbors.pop(gone)
        neighbors[keep] |= gone_neighbors
        neighbors[keep].discard(keep)
        neighbors[keep].discard(gone)
        for nb in gone_neighbors:
            if nb == keep:
                continue
            neighbors[nb].discard(gone)
            neighbors[nb].add(keep)
        del size[gone], csum[gone], version[gone]
        parent[gone] = keep
        for nb in neighbors[keep]:
            lo, hi = (keep, nb) if keep < nb else (nb, keep)
            c = _ward_cost(size[lo], csum[lo], size[hi], csum[hi])
            heapq.heappush(heap, (c, lo, hi, version[lo], version[hi]))
        alive -= 1

    labels = np.array([find(i) for i in range(n)]).reshape(h, w)
    return labels, trace


def _grid_components(ids: np.ndarray):
    """4-connected components of an id map, labeled 0..K-1."""
    h, w = ids.shape
    n = h * w
    idx = np.arange(n).reshape(h, w)
    edges = []
    same_v = ids[1:, :] == ids[:-1, :]
    edges.append((idx[:-1, :][same_v], idx[1:, :][same_v]))
    same_h = ids[:, 1:] == ids[:, :-1]
    edges.append((idx[:, :-1][same_h], idx[:, 1:][same_h]))
    src = np.concatenate([e[0] for e in edges])
    dst = np.concatenate([e[1] for e in edges])
    graph = coo_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))
    _, comp = connected_components(graph, directed=False)
    return comp.reshape(h, w)


def enforce_connectivity(ids, min_size: int) -> Segmentation:
    """Absorb 4-connected components smaller than min_size into their
    largest adjacent region (ties -> smallest region id), then relabel
    contiguously. Accepts a raw id map or a Segmentation."""
    if isinstance(ids, Segmentation):
        ids = ids.regions
    ids = np.asarray(ids)
    comp = _grid_components(ids)
    k = int(comp.max()) + 1
    sizes = np.bincount(comp.ravel(), minlength=k).astype(np.int64)
    # original region id of each component, for tie-breaking
    flat_c, flat_i = comp.ravel(), ids.ravel()
    comp_ids, first_pos = np.unique(flat_c, return_index=True)
    first = np.zeros(k, dtype=np.int64)
    first[comp_ids] = flat_i[first_pos]

    adj = {i: set() for i in range(k)}
    for a, b in ((comp[:-1, :], comp[1:, :]), (comp[:, :-1], comp[:, 1:])):
        diff = a != b
        for x, y in zip(a[diff].ravel(), b[diff].ravel()):
            adj[int(x)].add(int(y))
            adj[int(y)].add(int(x))

    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    sizes = sizes.tolist()
    first = first.tolist()
    changed = True
    while changed:
        changed = False
        for c in range(k):
            r = find(c)
            if sizes[r] >= min_size or not adj[r]:
                continue
            cand = sorted({find(x) for x in adj[r]} - {r})
            if not cand:
                continue
            best = min(cand, key=lambda x: (-sizes[x], first[x], x))
            parent[r] = best
            sizes[best] += sizes[r]
            adj[best] |= adj[r]
            adj[best].discard(best)
            adj[best].discard(r)
            for nb in adj[r]:
                adj[nb].discard(r)
                if nb != best:
                    adj[nb].add(best)
            adj[r] = set()
            changed = True
    roots = np.array([find(c) for c in range(k)])
    return relabel_contiguous(roots[comp])
