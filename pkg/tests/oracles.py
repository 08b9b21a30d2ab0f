"""Independent brute-force reference implementations of every metric.

Deliberately written with plain Python loops and set arithmetic, not
numpy, and without importing anything from the package under test, so
the two implementations can only agree by computing the same function.

Label convention matches the library: -1 marks unlabeled pixels, which
are excluded from every count.
"""

SENTINEL = -1


def _shape(grid):
    return len(grid), len(grid[0])


def _neighbors4(r, c, h, w):
    if r > 0:
        yield r - 1, c
    if r + 1 < h:
        yield r + 1, c
    if c > 0:
        yield r, c - 1
    if c + 1 < w:
        yield r, c + 1


def class_components(labels):
    """4-connected components of same-class labeled pixels, as a list of
    pixel sets."""
    h, w = _shape(labels)
    seen = set()
    comps = []
    for r0 in range(h):
        for c0 in range(w):
            if (r0, c0) in seen or labels[r0][c0] == SENTINEL:
                continue
            cls = labels[r0][c0]
            comp = set()
            stack = [(r0, c0)]
            seen.add((r0, c0))
            while stack:
                r, c = stack.pop()
                comp.add((r, c))
                for nr, nc in _neighbors4(r, c, h, w):
                    if (nr, nc) not in seen and labels[nr][nc] == cls:
                        seen.add((nr, nc))
                        stack.append((nr, nc))
            comps.append(comp)
    return comps


def _region_pixel_sets(regions, labels):
    """Region id -> set of labeled pixels inside that region."""
    h, w = _shape(regions)
    out = {}
    for r in range(h):
        for c in range(w):
            if labels[r][c] == SENTINEL:
                continue
            out.setdefault(regions[r][c], set()).add((r, c))
    return out


def bf_undersegmentation_error(regions, labels):
    h, w = _shape(labels)
    n = sum(labels[r][c] != SENTINEL for r in range(h) for c in range(w))
    region_pixels = _region_pixel_sets(regions, labels)
    total = 0
    for segment in class_components(labels):
        for pixels in region_pixels.values():
            inter = len(pixels & segment)
            if inter:
                total += min(inter, len(pixels) - inter)
    return total / n


def _boundary_set(grid):
    """Pixels with at least one 4-neighbor carrying a different value."""
    h, w = _shape(grid)
    out = set()
    for r in range(h):
        for c in range(w):
            for nr, nc in _neighbors4(r, c, h, w):
                if grid[nr][nc] != grid[r][c]:
                    out.add((r, c))
                    break
    return out


def bf_boundary_recall(regions, labels, tol):
    gt_bnd = {(r, c) for (r, c) in _boundary_set(labels)
              if labels[r][c] != SENTINEL}
    if not gt_bnd:
        return 1.0
    seg_bnd = _boundary_set(regions)
    recalled = 0
    for r, c in gt_bnd:
        if any(max(abs(r - sr), abs(c - sc)) <= tol for sr, sc in seg_bnd):
            recalled += 1
    return recalled / len(gt_bnd)


def _class_counts(pixels, labels):
    counts = {}
    for r, c in pixels:
        cls = labels[r][c]
        counts[cls] = counts.get(cls, 0) + 1
    return counts


def bf_average_purity(regions, labels):
    region_pixels = _region_pixel_sets(regions, labels)
    purities = []
    for pixels in region_pixels.values():
        counts = _class_counts(pixels, labels)
        purities.append(max(counts.values()) / len(pixels))
    return sum(purities) / len(purities)


def bf_majority_labels(regions, labels):
    """Region id -> majority class (smallest class id on ties)."""
    region_pixels = _region_pixel_sets(regions, labels)
    out = {}
    for rid, pixels in region_pixels.items():
        counts = _class_counts(pixels, labels)
        best = max(counts.values())
        out[rid] = min(cls for cls, n in counts.items() if n == best)
    return out


def bf_oracle_accuracy(regions, labels):
    majority = bf_majority_labels(regions, labels)
    h, w = _shape(labels)
    correct = total = 0
    for r in range(h):
        for c in range(w):
            if labels[r][c] == SENTINEL:
                continue
            total += 1
            if majority[regions[r][c]] == labels[r][c]:
                correct += 1
    return correct / total


def _pairs(pred, gt):
    h, w = _shape(gt)
    return [(gt[r][c], pred[r][c]) for r in range(h) for c in range(w)
            if gt[r][c] != SENTINEL]


def bf_overall_accuracy(pred, gt):
    pairs = _pairs(pred, gt)
    return sum(g == p for g, p in pairs) / len(pairs)


def bf_cohen_kappa(pred, gt):
    """Returns None when kappa is undefined (expected agreement 1 with
    imperfect observed agreement)."""
    pairs = _pairs(pred, gt)
    total = len(pairs)
    p_o = sum(g == p for g, p in pairs) / total
    classes = {g for g, _ in pairs} | {p for _, p in pairs}
    p_e = sum((sum(g == c for g, _ in pairs) / total)
              * (sum(p == c for _, p in pairs) / total) for c in classes)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else None
    return (p_o - p_e) / (1.0 - p_e)


def bf_merge_trace(pixels, h, w, target):
    """Brute-force best-merge sequence for an h x w image.

    pixels is a row-major list of per-pixel channel tuples. Each step
    scans every 4-adjacent alive region pair, picks the one minimizing
    the Ward cost n1*n2/(n1+n2) * ||mean1 - mean2||^2 (ties -> smaller
    (id1, id2)), and merges into the smaller id. Returns
    [(id1, id2, cost), ...].
    """
    size = {i: 1 for i in range(h * w)}
    sums = {i: list(pixels[i]) for i in range(h * w)}
    neighbors = {i: set() for i in range(h * w)}
    for r in range(h):
        for c in range(w):
            i = r * w + c
            if r + 1 < h:
                neighbors[i].add(i + w)
                neighbors[i + w].add(i)
            if c + 1 < w:
                neighbors[i].add(i + 1)
                neighbors[i + 1].add(i)

    def cost(a, b):
        na, nb = size[a], size[b]
        d = sum((sa / na - sb / nb) ** 2 for sa, sb in zip(sums[a], sums[b]))
        return na * nb / (na + nb) * d

    trace = []
    while len(size) > target:
        best = None
        for a in sorted(size):
            for b in sorted(neighbors[a]):
                if a < b:
                    cand = (cost(a, b), a, b)
                    if best is None or cand < best:
                        best = cand
        c, a, b = best
        trace.append((a, b, c))
        size[a] += size.pop(b)
        sums[a] = [x + y for x, y in zip(sums[a], sums.pop(b))]
        for nb in neighbors.pop(b):
            neighbors[nb].discard(b)
            if nb != a:
                neighbors[nb].add(a)
                neighbors[a].add(nb)
        neighbors[a].discard(a)
    return trace


def bf_f1(pred, gt, cls):
    """Returns None when the class appears in neither map (not
    applicable)."""
    pairs = _pairs(pred, gt)
    tp = sum(g == cls and p == cls for g, p in pairs)
    fp = sum(g != cls and p == cls for g, p in pairs)
    fn = sum(g == cls and p != cls for g, p in pairs)
    if tp == 0:
        if fp == 0 and fn == 0:
            return None
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)
