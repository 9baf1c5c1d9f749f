"""Numba-jitted implementations of the hot kernels.

Contracts match ``numpy_impl`` exactly; see that module for the semantics.
All kernels compile with ``cache=True`` so repeated runs skip compilation.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .numpy_impl import DC8, DIR_LUT, DR8


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _union(parent, a, b):
    ra, rb = _find(parent, a), _find(parent, b)
    if ra == rb:
        return ra
    if ra < rb:
        parent[rb] = ra
        return ra
    parent[ra] = rb
    return rb


@njit(cache=True)
def _label_image(ink, eight):
    h, w = ink.shape
    labels = np.zeros((h, w), dtype=np.int32)
    parent = np.zeros(h * w // 2 + 2, dtype=np.int32)
    nlab = 0
    for r in range(h):
        for c in range(w):
            if ink[r, c] == 0:
                continue
            best = 0
            if c > 0 and labels[r, c - 1] != 0:
                best = labels[r, c - 1]
            if r > 0:
                if labels[r - 1, c] != 0:
                    best = labels[r - 1, c] if best == 0 else _union(parent, best, labels[r - 1, c])
                if eight and c > 0 and labels[r - 1, c - 1] != 0:
                    best = labels[r - 1, c - 1] if best == 0 else _union(parent, best, labels[r - 1, c - 1])
                if eight and c < w - 1 and labels[r - 1, c + 1] != 0:
                    best = labels[r - 1, c + 1] if best == 0 else _union(parent, best, labels[r - 1, c + 1])
            if best == 0:
                nlab += 1
                parent[nlab] = nlab
                best = nlab
            labels[r, c] = best
    compact = np.zeros(nlab + 1, dtype=np.int32)
    nxt = 0
    for r in range(h):
        for c in range(w):
            lab = labels[r, c]
            if lab == 0:
                continue
            root = _find(parent, lab)
            if compact[root] == 0:
                nxt += 1
                compact[root] = nxt
            labels[r, c] = compact[root]
    return labels


def label_image(ink: np.ndarray, eight: bool = True) -> np.ndarray:
    return _label_image(np.ascontiguousarray(ink, dtype=np.uint8), eight)


@njit(cache=True)
def _trace(ink, r0, c0, d_back, hist, cell_px, cells):
    h, w = ink.shape
    br, bc = r0, c0
    first_r, first_c = -1, -1
    steps = 0
    limit = 4 * h * w + 8
    while steps <= limit:
        found = -1
        d = d_back
        for _ in range(7):
            d = (d - 1) % 8
            nr = br + DR8[d]
            nc = bc + DC8[d]
            if 0 <= nr < h and 0 <= nc < w and ink[nr, nc] != 0:
                found = d
                break
        if found < 0:
            return
        nr = br + DR8[found]
        nc = bc + DC8[found]
        if br == r0 and bc == c0 and nr == first_r and nc == first_c:
            return
        if first_r == -1:
            first_r, first_c = nr, nc
        cell_r = (br + nr) // (2 * cell_px)
        cell_c = (bc + nc) // (2 * cell_px)
        hist[(cell_r * cells + cell_c) * 8 + found] += 1.0
        pr = br + DR8[(found + 1) % 8]
        pc = bc + DC8[(found + 1) % 8]
        br, bc = nr, nc
        d_back = DIR_LUT[pr - br + 1, pc - bc + 1]
        steps += 1


@njit(cache=True)
def _contour_histogram(grid, cell_px, cells):
    h, w = grid.shape
    hist = np.zeros(cells * cells * 8, dtype=np.float64)
    n_contours = 0

    comp = _label_image(grid, True)
    n_comp = 0
    for r in range(h):
        for c in range(w):
            if comp[r, c] > n_comp:
                n_comp = comp[r, c]
    traced = np.zeros(n_comp + 1, dtype=np.uint8)
    for r in range(h):
        for c in range(w):
            lab = comp[r, c]
            if lab != 0 and traced[lab] == 0:
                traced[lab] = 1
                _trace(grid, r, c, 4, hist, cell_px, cells)
                n_contours += 1

    bg = np.empty((h, w), dtype=np.uint8)
    for r in range(h):
        for c in range(w):
            bg[r, c] = 1 if grid[r, c] == 0 else 0
    holes = _label_image(bg, False)
    n_bg = 0
    for r in range(h):
        for c in range(w):
            if holes[r, c] > n_bg:
                n_bg = holes[r, c]
    skip = np.zeros(n_bg + 1, dtype=np.uint8)
    for c in range(w):
        skip[holes[0, c]] = 1
        skip[holes[h - 1, c]] = 1
    for r in range(h):
        skip[holes[r, 0]] = 1
        skip[holes[r, w - 1]] = 1
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            lab = holes[r, c]
            if lab != 0 and skip[lab] == 0:
                skip[lab] = 1
                _trace(grid, r - 1, c, 6, hist, cell_px, cells)
                n_contours += 1
    return hist, n_contours


def contour_histogram(grid: np.ndarray, cell_px: int, cells: int):
    hist, n = _contour_histogram(
        np.ascontiguousarray(grid, dtype=np.uint8), cell_px, cells
    )
    return hist, int(n)


@njit(cache=True)
def _assign_nearest(points, centers):
    n, d = points.shape
    k = centers.shape[0]
    idx = np.empty(n, dtype=np.int32)
    dist = np.empty(n, dtype=np.float64)
    for i in range(n):
        best = -1
        bestd = np.inf
        for j in range(k):
            s = 0.0
            for t in range(d):
                diff = points[i, t] - centers[j, t]
                s += diff * diff
            if s < bestd:
                bestd = s
                best = j
        idx[i] = best
        dist[i] = bestd
    return idx, dist


def assign_nearest(points: np.ndarray, centers: np.ndarray):
    return _assign_nearest(
        np.ascontiguousarray(points, dtype=np.float64),
        np.ascontiguousarray(centers, dtype=np.float64),
    )


@njit(cache=True)
def _sum_by_label(points, labels, k):
    n, d = points.shape
    sums = np.zeros((k, d), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    for i in range(n):
        lab = labels[i]
        counts[lab] += 1
        for t in range(d):
            sums[lab, t] += points[i, t]
    return sums, counts


def sum_by_label(points: np.ndarray, labels: np.ndarray, k: int):
    return _sum_by_label(
        np.ascontiguousarray(points, dtype=np.float64),
        np.ascontiguousarray(labels, dtype=np.int64),
        k,
    )
