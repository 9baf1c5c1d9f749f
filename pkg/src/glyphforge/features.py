"""Glyph normalization and the two feature families.

A blob is scaled (nearest-neighbor, aspect preserved) so its longest side
fills a 32x32 grid and recentered on its ink centroid.  From that grid come
128 micro-features: every unit step along the outer and inner contours adds
one count to the bin of its midpoint's 4x4 spatial cell and 8-quantized
direction, and the histogram is L2-normalized.  Eight coarser features (the
class-pruning family) mix raw-blob geometry with grid statistics:

    [aspect, centroid_x, centroid_y, mxx, myy, mxy, density, contours/8]

aspect is width/(width+height) of the raw bbox; centroid and the normalized
second moments come from the raw ink (y up, like box coordinates); density
and contour count from the grid.  Feature arrays are float32, matching the
on-disk layout, so save/load round-trips are exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .boxfile import BoxPage
from .errors import DataError, FormatError
from .raster import Bitmap, ComponentBlob, connected_components

GRID = 32
CELLS = 4
CELL_PX = GRID // CELLS
N_DIRS = 8
MICRO_DIM = CELLS * CELLS * N_DIRS  # 128
CN_DIM = 8

TR_MAGIC = b"GFTR"
TR_VERSION = 1


@dataclass(eq=False)
class NormalizedGlyph:
    """32x32 binary plane plus the raw-blob statistics the cn features need."""

    grid: np.ndarray
    source_bbox: tuple[int, int, int, int]
    scale: float
    raw_centroid: tuple[float, float]  # (x, y) in [0,1], y up
    raw_moments: tuple[float, float, float]  # (mxx, myy, mxy), bbox-normalized


@dataclass(eq=False)
class GlyphFeatures:
    micro: np.ndarray  # 128 float32, L2 norm 1 (all-zero for empty glyphs)
    cn: np.ndarray  # 8 float32

    def is_empty(self) -> bool:
        return not self.micro.any()


@dataclass
class TrainingFile:
    """Labelled feature vectors of one training page (the `.tr` analogue)."""

    entries: list[tuple[str, GlyphFeatures]] = field(default_factory=list)
    source: str = ""


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def normalize_glyph(blob: ComponentBlob) -> NormalizedGlyph:
    """Scale and recenter a blob onto the 32x32 grid.

    Nearest-neighbor sampling keeps the plane binary; the longest bbox side
    maps to exactly 32 cells and the result is shifted so the ink centroid
    sits at the grid center, clipping anything pushed off-grid.
    """
    if blob.pixel_count < 1:
        raise DataError("cannot normalize an empty blob")
    mask = blob.mask
    h, w = mask.shape
    if h >= w:
        h2, w2 = GRID, max(1, _round_half_up(w * GRID / h))
    else:
        h2, w2 = max(1, _round_half_up(h * GRID / w)), GRID
    scale = GRID / max(h, w)
    src_r = ((np.arange(h2) + 0.5) * h / h2).astype(np.int64)
    src_c = ((np.arange(w2) + 0.5) * w / w2).astype(np.int64)
    scaled = mask[src_r][:, src_c]

    grid = np.zeros((GRID, GRID), dtype=np.uint8)
    rows, cols = np.nonzero(scaled)
    if len(rows) > 0:
        center = (GRID - 1) / 2.0
        dr = _round_half_up(center - float(rows.mean()))
        dc = _round_half_up(center - float(cols.mean()))
        rr, cc = rows + dr, cols + dc
        keep = (rr >= 0) & (rr < GRID) & (cc >= 0) & (cc < GRID)
        grid[rr[keep], cc[keep]] = 1

    raw_rows, raw_cols = np.nonzero(mask)
    cx = (float(raw_cols.mean()) + 0.5) / w
    cy = ((h - 1 - float(raw_rows.mean())) + 0.5) / h
    mxx = float(raw_cols.var()) / (w * w)
    myy = float(raw_rows.var()) / (h * h)
    # y grows upward in box coords, so the cross moment flips sign
    mxy = -float(np.mean((raw_cols - raw_cols.mean()) * (raw_rows - raw_rows.mean()))) / (w * h)
    return NormalizedGlyph(
        grid=grid,
        source_bbox=blob.bbox,
        scale=scale,
        raw_centroid=(cx, cy),
        raw_moments=(mxx, myy, mxy),
    )


def extract_features(g: NormalizedGlyph) -> GlyphFeatures:
    """Micro and cn feature vectors of a normalized glyph (deterministic)."""
    hist, n_contours = kernels.contour_histogram(g.grid, CELL_PX, CELLS)
    norm = float(np.sqrt((hist * hist).sum()))
    micro = hist / norm if norm > 0 else hist
    left, bottom, right, top = g.source_bbox
    w, h = right - left, top - bottom
    density = float(np.count_nonzero(g.grid)) / (GRID * GRID)
    cn = np.array(
        [
            w / (w + h),
            g.raw_centroid[0],
            g.raw_centroid[1],
            g.raw_moments[0],
            g.raw_moments[1],
            g.raw_moments[2],
            density,
            n_contours / 8.0,
        ],
        dtype=np.float64,
    )
    return GlyphFeatures(
        micro=micro.astype(np.float32), cn=cn.astype(np.float32)
    )


def featurize_blob(blob: ComponentBlob) -> GlyphFeatures:
    return extract_features(normalize_glyph(blob))


def build_training_file(
    page: Bitmap,
    boxes: BoxPage,
    noise_floor: float | None = None,
) -> tuple[TrainingFile, int]:
    """Featurize every labelled box of a page.

    Each box is cropped, the largest surviving blob inside it normalized and
    featurized, and paired with the box's glyph.  Returns the training file
    and the number of boxes skipped because their crop held no usable ink.
    A bbox outside the page bounds is an error naming the record.
    """
    h, w = page.height, page.width
    entries: list[tuple[str, GlyphFeatures]] = []
    skipped = 0
    for index, rec in enumerate(boxes.records):
        if rec.left < 0 or rec.bottom < 0 or rec.right > w or rec.top > h:
            raise DataError(
                f"record {index} ({rec.glyph!r}): bbox {rec.left},{rec.bottom},"
                f"{rec.right},{rec.top} outside {w}x{h} page"
            )
        crop = page.pixels[h - rec.top : h - rec.bottom, rec.left : rec.right]
        kwargs = {} if noise_floor is None else {"noise_floor": noise_floor}
        blobs = connected_components(Bitmap(crop.copy(), dpi=page.dpi), **kwargs)
        if not blobs:
            skipped += 1
            continue
        largest = max(blobs, key=lambda b: b.pixel_count)
        entries.append((rec.glyph, featurize_blob(largest)))
    return TrainingFile(entries=entries, source=boxes.image_ref), skipped


def dump_training_file(tf: TrainingFile) -> bytes:
    """Binary form: GFTR magic, u32 version, u32 count, then per entry a u32
    codepoint, 128 f32 micro and 8 f32 cn, all little-endian."""
    out = [struct.pack("<4sII", TR_MAGIC, TR_VERSION, len(tf.entries))]
    for label, feats in tf.entries:
        if len(label) != 1:
            raise DataError(f"label {label!r} is not a single glyph")
        out.append(struct.pack("<I", ord(label)))
        out.append(np.asarray(feats.micro, dtype="<f4").tobytes())
        out.append(np.asarray(feats.cn, dtype="<f4").tobytes())
    return b"".join(out)


def load_training_file(data: bytes, source: str = "") -> TrainingFile:
    if len(data) < 12:
        raise FormatError("training file truncated")
    magic, version, count = struct.unpack_from("<4sII", data, 0)
    if magic != TR_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {TR_MAGIC!r}")
    if version != TR_VERSION:
        raise FormatError(f"unsupported training file version {version}")
    entry_size = 4 + 4 * MICRO_DIM + 4 * CN_DIM
    if len(data) != 12 + count * entry_size:
        raise FormatError(
            f"training file size {len(data)} does not match {count} entries"
        )
    entries = []
    off = 12
    for _ in range(count):
        (code,) = struct.unpack_from("<I", data, off)
        off += 4
        micro = np.frombuffer(data, dtype="<f4", count=MICRO_DIM, offset=off).copy()
        off += 4 * MICRO_DIM
        cn = np.frombuffer(data, dtype="<f4", count=CN_DIM, offset=off).copy()
        off += 4 * CN_DIM
        entries.append((chr(code), GlyphFeatures(micro=micro, cn=cn)))
    return TrainingFile(entries=entries, source=source)
