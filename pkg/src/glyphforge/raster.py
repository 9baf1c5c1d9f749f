"""Page rasters: decode, binarize, split into component blobs and text lines.

Image coordinates are row-major with row 0 at the top; box-file coordinates
put the origin at the bottom-left with y growing upward.  The conversion for
a page of height H maps a pixel block spanning rows [r0, r1] and columns
[c0, c1] (inclusive) to ``left=c0, bottom=H-r1-1, right=c1+1, top=H-r0``,
which round-trips exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DataError

DEFAULT_DPI = 300
NOISE_FLOOR = 8          # px at 300 dpi, scaled by (dpi/300)^2
GAP_FACTOR = 0.4         # line split when y-gap >= 0.4 x median blob height
OVERSIZED_FACTOR = 1.8   # blob wider than 1.8 x line median width


@dataclass(eq=False)
class Bitmap:
    """Binarized page: uint8 plane, 1 = ink, row 0 = top of page."""

    pixels: np.ndarray
    dpi: int = DEFAULT_DPI

    def __post_init__(self):
        self.pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise DataError("bitmap must be a non-empty 2-d plane")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def ink_count(self) -> int:
        return int(np.count_nonzero(self.pixels))

    def to_gray(self) -> np.ndarray:
        """Render back to 8-bit grayscale (ink black on white)."""
        return np.where(self.pixels != 0, 0, 255).astype(np.uint8)


@dataclass(eq=False)
class ComponentBlob:
    """One connected ink region.

    ``bbox`` is (left, bottom, right, top) in box-file coordinates; ``mask``
    is the cropped binary plane in image orientation (mask[0] is the blob's
    top row) with ``row0``/``col0`` giving the crop origin in image coords.
    """

    bbox: tuple[int, int, int, int]
    pixel_count: int
    mask: np.ndarray = field(repr=False)
    row0: int
    col0: int

    @property
    def left(self) -> int:
        return self.bbox[0]

    @property
    def bottom(self) -> int:
        return self.bbox[1]

    @property
    def right(self) -> int:
        return self.bbox[2]

    @property
    def top(self) -> int:
        return self.bbox[3]

    @property
    def width(self) -> int:
        return self.bbox[2] - self.bbox[0]

    @property
    def height(self) -> int:
        return self.bbox[3] - self.bbox[1]

    def pixel_coords(self) -> set[tuple[int, int]]:
        """Ink pixels as (row, col) image coordinates."""
        rs, cs = np.nonzero(self.mask)
        return {(int(r) + self.row0, int(c) + self.col0) for r, c in zip(rs, cs)}


@dataclass
class TextLine:
    """Blobs of one text line, left to right."""

    blobs: list[ComponentBlob]
    baseline_band: tuple[int, int]  # (y_low, y_high) in box coords


def otsu_threshold(hist: np.ndarray) -> int:
    """Threshold t maximizing between-class variance of {v < t} vs {v >= t}.

    Ties resolve to the lowest t; a single-level histogram yields t = 0
    (nothing below the threshold).
    """
    hist = np.asarray(hist, dtype=np.int64)
    if hist.shape != (256,):
        raise ValueError("expected a 256-bin histogram")
    values = np.arange(256, dtype=np.int64)
    # w0[t], m0[t]: count and value-sum of pixels with v < t
    w0 = np.concatenate(([0], np.cumsum(hist)))[:256]
    m0 = np.concatenate(([0], np.cumsum(hist * values)))[:256]
    total, msum = int(hist.sum()), int((hist * values).sum())
    w1 = total - w0
    ok = (w0 > 0) & (w1 > 0)
    var = np.zeros(256, dtype=np.float64)
    mu0 = np.divide(m0, w0, out=np.zeros(256), where=ok)
    mu1 = np.divide(msum - m0, w1, out=np.zeros(256), where=ok)
    d = mu0 - mu1
    var[ok] = ((w0 * w1)[ok]).astype(np.float64) * (d * d)[ok]
    return int(np.argmax(var))


def binarize(gray: np.ndarray, dpi: int = DEFAULT_DPI, invert: bool = False) -> Bitmap:
    """Global-Otsu binarization of an 8-bit grayscale plane (dark = ink).

    With ``invert`` the plane is flipped first, so light-on-dark input
    yields the same bitmap as its dark-on-light mirror.
    """
    gray = np.asarray(gray)
    if gray.ndim != 2 or gray.size == 0:
        raise DataError("expected a non-empty 2-d grayscale plane")
    gray = gray.astype(np.uint8)
    if invert:
        gray = 255 - gray
    t = otsu_threshold(np.bincount(gray.ravel(), minlength=256))
    return Bitmap(pixels=(gray < t).astype(np.uint8), dpi=dpi)


def connected_components(
    bitmap: Bitmap,
    noise_floor: float = NOISE_FLOOR,
    connectivity: int = 8,
) -> list[ComponentBlob]:
    """8-connected ink components above the noise floor.

    The floor is ``noise_floor`` pixels at 300 dpi, scaled by (dpi/300)^2.
    Output order is (left, bottom, top, right, pixel_count) ascending, which
    is deterministic for any input.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    labels = kernels.label_image(bitmap.pixels, eight=connectivity == 8)
    n = int(labels.max())
    if n == 0:
        return []
    h = bitmap.height
    rows, cols = np.nonzero(labels)
    labs = labels[rows, cols]
    counts = np.bincount(labs, minlength=n + 1)
    rmin = np.full(n + 1, h, dtype=np.int64)
    rmax = np.full(n + 1, -1, dtype=np.int64)
    cmin = np.full(n + 1, bitmap.width, dtype=np.int64)
    cmax = np.full(n + 1, -1, dtype=np.int64)
    np.minimum.at(rmin, labs, rows)
    np.maximum.at(rmax, labs, rows)
    np.minimum.at(cmin, labs, cols)
    np.maximum.at(cmax, labs, cols)

    floor = noise_floor * (bitmap.dpi / DEFAULT_DPI) ** 2
    blobs = []
    for lab in range(1, n + 1):
        if counts[lab] < floor:
            continue
        r0, r1, c0, c1 = int(rmin[lab]), int(rmax[lab]), int(cmin[lab]), int(cmax[lab])
        mask = (labels[r0 : r1 + 1, c0 : c1 + 1] == lab).astype(np.uint8)
        blobs.append(
            ComponentBlob(
                bbox=(c0, h - r1 - 1, c1 + 1, h - r0),
                pixel_count=int(counts[lab]),
                mask=mask,
                row0=r0,
                col0=c0,
            )
        )
    blobs.sort(key=lambda b: (b.left, b.bottom, b.top, b.right, b.pixel_count))
    return blobs


def segment_lines(blobs: list[ComponentBlob], gap_factor: float = GAP_FACTOR) -> list[TextLine]:
    """Group blobs into text lines by their vertical extents.

    Blobs whose y-intervals overlap or sit closer than ``gap_factor`` times
    the page median blob height share a line; lines come out top to bottom,
    blobs within a line left to right.
    """
    if not blobs:
        return []
    gap_min = gap_factor * float(np.median([b.height for b in blobs]))
    ordered = sorted(blobs, key=lambda b: (-b.top, b.bottom, b.left))
    lines: list[list[ComponentBlob]] = []
    band_low = 0
    current: list[ComponentBlob] = []
    for blob in ordered:
        if current and band_low - blob.top >= gap_min:
            lines.append(current)
            current = []
        band_low = blob.bottom if not current else min(band_low, blob.bottom)
        current.append(blob)
    lines.append(current)
    return [
        TextLine(
            blobs=sorted(chunk, key=lambda b: (b.left, b.bottom, b.right)),
            baseline_band=(min(b.bottom for b in chunk), max(b.top for b in chunk)),
        )
        for chunk in lines
    ]


def flag_oversized(
    line: TextLine, factor: float = OVERSIZED_FACTOR
) -> list[tuple[ComponentBlob, bool]]:
    """Flag blobs wider than ``factor`` times the line's median blob width.

    Oversized blobs stay recognition candidates; the flag feeds the
    evaluation report as a potential under-segmentation.
    """
    if not line.blobs:
        raise DataError("cannot flag an empty line")
    med = float(np.median([b.width for b in line.blobs]))
    return [(b, b.width > factor * med) for b in line.blobs]


SUPPORTED_SUFFIXES = {".png", ".pgm", ".pbm", ".ppm", ".tif", ".tiff"}


def load_gray(path: str | Path, dpi: int | None = None) -> tuple[np.ndarray, int]:
    """Load a page image as (8-bit grayscale plane, dpi).

    Accepts single-page PNG, PGM/PBM and single-strip TIFF.  dpi comes from
    the file metadata when present, else from the ``dpi`` argument, else 300.
    """
    from PIL import Image

    path = Path(path)
    try:
        with Image.open(path) as img:
            meta_dpi = img.info.get("dpi")
            gray = np.asarray(img.convert("L"), dtype=np.uint8)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise DataError(f"cannot decode image {path}: {exc}") from exc
    if gray.ndim != 2 or gray.size == 0:
        raise DataError(f"image {path} decoded to an empty plane")
    if meta_dpi:
        dpi = int(round(float(meta_dpi[0])))
    elif dpi is None:
        dpi = DEFAULT_DPI
    if dpi <= 0:
        raise DataError("dpi must be positive")
    return gray, dpi
