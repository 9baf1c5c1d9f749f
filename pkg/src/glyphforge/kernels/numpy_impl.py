"""Pure-numpy fallback implementations of the hot kernels.

Same contracts as ``numba_impl``; selected via ``GLYPHFORGE_KERNELS=numpy``
or automatically when numba is unavailable.  Component labeling works on
horizontal runs instead of single pixels so the Python-level loop is per
row, not per pixel.
"""

from __future__ import annotations

import numpy as np

# 8 neighbor directions in counterclockwise ring order (image rows grow
# downward, so index 2 "north" is up): E, NE, N, NW, W, SW, S, SE.
DR8 = np.array([0, -1, -1, -1, 0, 1, 1, 1], dtype=np.int64)
DC8 = np.array([1, 1, 0, -1, -1, -1, 0, 1], dtype=np.int64)

# (dr+1, dc+1) -> ring index
DIR_LUT = np.full((3, 3), -1, dtype=np.int64)
for _d in range(8):
    DIR_LUT[DR8[_d] + 1, DC8[_d] + 1] = _d


def _find(parent: list, x: int) -> int:
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def label_image(ink: np.ndarray, eight: bool = True) -> np.ndarray:
    """Label connected components of a binary plane.

    Returns an int32 plane: 0 background, components numbered 1..n in
    first-pixel raster order.
    """
    ink = np.ascontiguousarray(ink, dtype=np.uint8)
    h, w = ink.shape
    labels = np.zeros((h, w), dtype=np.int32)
    if h == 0 or w == 0:
        return labels

    parent: list[int] = [0]
    all_runs: list[tuple[int, int, int, int]] = []  # (row, start, end, provisional)
    prev: list[tuple[int, int, int]] = []  # (start, end, provisional) of row above

    pad = np.zeros(w + 2, dtype=np.int8)
    for r in range(h):
        pad[1:-1] = ink[r] != 0
        delta = np.diff(pad)
        starts = np.flatnonzero(delta == 1)
        ends = np.flatnonzero(delta == -1)
        cur: list[tuple[int, int, int]] = []
        j = 0
        for s, e in zip(starts.tolist(), ends.tolist()):
            # previous-row runs that can touch [s, e): 8-conn allows a
            # one-column diagonal reach, 4-conn needs direct overlap
            while j < len(prev) and (prev[j][1] < s if eight else prev[j][1] <= s):
                j += 1
            lab = 0
            k = j
            while k < len(prev) and (prev[k][0] <= e if eight else prev[k][0] < e):
                other = _find(parent, prev[k][2])
                if lab == 0:
                    lab = other
                elif other != lab:
                    hi, lo = max(lab, other), min(lab, other)
                    parent[hi] = lo
                    lab = lo
                k += 1
            if lab == 0:
                lab = len(parent)
                parent.append(lab)
            cur.append((s, e, lab))
            all_runs.append((r, s, e, lab))
        prev = cur

    compact: dict[int, int] = {}
    for r, s, e, lab in all_runs:
        root = _find(parent, lab)
        cid = compact.get(root)
        if cid is None:
            cid = len(compact) + 1
            compact[root] = cid
        labels[r, s:e] = cid
    return labels


def _trace(ink: np.ndarray, r0: int, c0: int, d_back: int,
           hist: np.ndarray, cell_px: int, cells: int) -> None:
    """Moore boundary walk from (r0, c0) whose neighbor at ring direction
    d_back is known background.  Each unit step adds 1 to the (cell of the
    step midpoint, step direction) histogram bin."""
    h, w = ink.shape
    br, bc = r0, c0
    first = (-1, -1)
    steps = 0
    limit = 4 * h * w + 8
    while steps <= limit:
        found = -1
        d = d_back
        for _ in range(7):  # skip d_back itself: known background
            d = (d - 1) % 8
            nr, nc = br + DR8[d], bc + DC8[d]
            if 0 <= nr < h and 0 <= nc < w and ink[nr, nc]:
                found = d
                break
        if found < 0:
            return  # isolated pixel, no steps
        nr, nc = br + int(DR8[found]), bc + int(DC8[found])
        if (br, bc) == (r0, c0) and first == (nr, nc):
            return  # closed the loop entering the start the same way
        if first == (-1, -1):
            first = (nr, nc)
        cell_r = (br + nr) // (2 * cell_px)
        cell_c = (bc + nc) // (2 * cell_px)
        hist[(cell_r * cells + cell_c) * 8 + found] += 1.0
        # new backtrack: the background probed just before the hit
        pr = br + int(DR8[(found + 1) % 8])
        pc = bc + int(DC8[(found + 1) % 8])
        br, bc = nr, nc
        d_back = int(DIR_LUT[pr - br + 1, pc - bc + 1])
        steps += 1


def contour_histogram(grid: np.ndarray, cell_px: int, cells: int):
    """Direction histogram of all outer and inner (hole) contours.

    Returns (hist of length cells*cells*8, contour count).  Outer contours
    follow 8-connected ink components; holes are 4-connected background
    regions that do not touch the frame, traced along their ink wall.
    """
    grid = np.ascontiguousarray(grid, dtype=np.uint8)
    h, w = grid.shape
    hist = np.zeros(cells * cells * 8, dtype=np.float64)
    n_contours = 0

    comp = label_image(grid, eight=True)
    n_comp = int(comp.max())
    seen = 0
    found_first = np.full(n_comp + 1, -1, dtype=np.int64)
    for r in range(h):
        if seen == n_comp:
            break
        for c in np.flatnonzero(comp[r]).tolist():
            lab = comp[r, c]
            if found_first[lab] < 0:
                found_first[lab] = r * w + c
                seen += 1
    for lab in range(1, n_comp + 1):
        pos = found_first[lab]
        _trace(grid, int(pos // w), int(pos % w), 4, hist, cell_px, cells)
        n_contours += 1

    bg = (grid == 0).astype(np.uint8)
    holes = label_image(bg, eight=False)
    outside = np.unique(
        np.concatenate([holes[0], holes[-1], holes[:, 0], holes[:, -1]])
    )
    is_outside = np.zeros(int(holes.max()) + 1, dtype=np.bool_)
    is_outside[outside] = True
    traced = np.zeros(int(holes.max()) + 1, dtype=np.bool_)
    for r in range(1, h - 1):
        row = holes[r]
        for c in np.flatnonzero(row).tolist():
            lab = row[c]
            if is_outside[lab] or traced[lab]:
                continue
            traced[lab] = True
            # first hole pixel in raster order: the pixel above is ink
            _trace(grid, r - 1, int(c), 6, hist, cell_px, cells)
            n_contours += 1
    return hist, n_contours


def assign_nearest(points: np.ndarray, centers: np.ndarray):
    """Index and squared distance of the nearest center for every point."""
    points = np.asarray(points, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    p2 = (points * points).sum(axis=1)[:, None]
    c2 = (centers * centers).sum(axis=1)[None, :]
    d2 = np.maximum(p2 + c2 - 2.0 * points @ centers.T, 0.0)
    idx = np.argmin(d2, axis=1).astype(np.int32)
    return idx, d2[np.arange(len(points)), idx]


def sum_by_label(points: np.ndarray, labels: np.ndarray, k: int):
    """Per-label vector sums and member counts (k-means update step)."""
    points = np.asarray(points, dtype=np.float64)
    sums = np.zeros((k, points.shape[1]), dtype=np.float64)
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts
