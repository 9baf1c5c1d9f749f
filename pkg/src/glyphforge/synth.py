"""Synthetic handwritten-digit pages for demos and end-to-end tests.

Each "writer" is a parameter set (slant, stroke thickness, scale, wobble)
applied to a fixed 5x7 digit font; per-sample jitter comes from a seeded
generator, so pages are reproducible.  Rendered pages come with exact box
ground truth measured from the placed ink, which makes them suitable as a
scaled stand-in for scanned handwriting when exercising the full
train/recognize/evaluate loop.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boxfile import BoxPage, BoxRecord, write_box_file
from .raster import Bitmap

_FONT = {
    "0": ("01110", "10001", "10011", "10101", "11001", "10001", "01110"),
    "1": ("00100", "01100", "00100", "00100", "00100", "00100", "01110"),
    "2": ("01110", "10001", "00001", "00010", "00100", "01000", "11111"),
    "3": ("11111", "00010", "00100", "00010", "00001", "10001", "01110"),
    "4": ("00010", "00110", "01010", "10010", "11111", "00010", "00010"),
    "5": ("11111", "10000", "11110", "00001", "00001", "10001", "01110"),
    "6": ("00110", "01000", "10000", "11110", "10001", "10001", "01110"),
    "7": ("11111", "00001", "00010", "00100", "01000", "01000", "01000"),
    "8": ("01110", "10001", "10001", "01110", "10001", "10001", "01110"),
    "9": ("01110", "10001", "10001", "01111", "00001", "00010", "01100"),
}


@dataclass(frozen=True)
class Writer:
    """Parametric perturbation profile standing in for one person's hand."""

    name: str
    shear: float = 0.0  # columns of slant per row of height
    thickness: int = 0  # dilation (+) / erosion (-) passes
    scale: float = 4.0  # base upscale of the 5x7 font
    wobble: float = 0.0  # probability of a row-shift step


# zero slant and wobble: pure block upscaling, guaranteed one blob per glyph
PRISTINE_WRITER = Writer("pristine", shear=0.0, thickness=0, scale=4.0, wobble=0.0)

KNOWN_WRITERS = (
    Writer("known-a", shear=0.10, thickness=0, scale=4.0, wobble=0.05),
    Writer("known-b", shear=-0.12, thickness=1, scale=4.4, wobble=0.08),
    Writer("known-c", shear=0.02, thickness=0, scale=3.6, wobble=0.12),
)

UNKNOWN_WRITERS = (
    Writer("unknown-x", shear=0.28, thickness=1, scale=4.2, wobble=0.16),
    Writer("unknown-y", shear=-0.30, thickness=0, scale=3.4, wobble=0.20),
    Writer("unknown-z", shear=0.18, thickness=2, scale=4.6, wobble=0.10),
)


def _upscale(mask: np.ndarray, factor: float) -> np.ndarray:
    h, w = mask.shape
    h2 = max(1, int(round(h * factor)))
    w2 = max(1, int(round(w * factor)))
    src_r = ((np.arange(h2) + 0.5) * h / h2).astype(np.int64)
    src_c = ((np.arange(w2) + 0.5) * w / w2).astype(np.int64)
    return mask[src_r][:, src_c]


def _shear(mask: np.ndarray, shear: float) -> np.ndarray:
    h, w = mask.shape
    shifts = np.array([int(round(shear * (h / 2.0 - r))) for r in range(h)])
    lo, hi = int(shifts.min()), int(shifts.max())
    out = np.zeros((h, w + hi - lo), dtype=np.uint8)
    for r in range(h):
        s = shifts[r] - lo
        out[r, s : s + w] = mask[r]
    return out


def _wobble(mask: np.ndarray, prob: float, rng: np.random.Generator) -> np.ndarray:
    h, w = mask.shape
    out = np.zeros((h, w + 2 * h), dtype=np.uint8)
    shift = h
    for r in range(h):
        if rng.random() < prob:
            shift += int(rng.integers(-1, 2))
        shift = min(max(shift, 0), 2 * h)
        out[r, shift : shift + w] = mask[r]
    return out


def _dilate(mask: np.ndarray) -> np.ndarray:
    padded = np.pad(mask, 1)
    out = np.zeros_like(padded)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            out |= np.roll(np.roll(padded, dr, axis=0), dc, axis=1)
    return out[1:-1, 1:-1]


def _erode(mask: np.ndarray) -> np.ndarray:
    padded = np.pad(mask, 1)
    out = np.ones_like(padded)
    for dr in (-1, 0, 1):
        for dc in (0,) if dr else (-1, 0, 1):
            out &= np.roll(np.roll(padded, dr, axis=0), dc, axis=1)
    return out[1:-1, 1:-1]


def _crop(mask: np.ndarray) -> np.ndarray:
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if len(rows) == 0:
        return np.ones((1, 1), dtype=np.uint8)
    return mask[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]


def render_glyph(
    digit: str, writer: Writer, rng: np.random.Generator | None = None
) -> np.ndarray:
    """One digit in one writer's hand; pristine when rng is None."""
    base = np.array(
        [[1 if ch == "1" else 0 for ch in row] for row in _FONT[digit]], dtype=np.uint8
    )
    scale = writer.scale
    shear = writer.shear
    if rng is not None:
        scale *= float(rng.uniform(0.92, 1.08))
        shear += float(rng.uniform(-0.04, 0.04))
    mask = _upscale(base, scale)
    mask = _shear(mask, shear)
    if rng is not None and writer.wobble > 0:
        mask = _wobble(mask, writer.wobble, rng)
    for _ in range(writer.thickness):
        mask = _dilate(mask)
    for _ in range(-writer.thickness):
        mask = _erode(mask)
    return _crop(mask)


def render_page(
    digits: str,
    writer: Writer,
    rng: np.random.Generator | None = None,
    cols: int = 12,
    dpi: int = 300,
) -> tuple[Bitmap, BoxPage]:
    """Lay glyphs on a grid page and measure their exact boxes.

    Cells are sized so neighboring glyphs never touch; the returned box
    records use the tight bbox of each placed glyph.
    """
    glyphs = [render_glyph(d, writer, rng) for d in digits]
    if not glyphs:
        page = np.zeros((64, 64), dtype=np.uint8)
        return Bitmap(page, dpi=dpi), BoxPage(records=[])
    # generous vertical spacing keeps synthetic rows separable as lines
    cell_h = max(g.shape[0] for g in glyphs) + 24
    cell_w = max(g.shape[1] for g in glyphs) + 12
    rows = (len(glyphs) + cols - 1) // cols
    margin = 16
    page = np.zeros((rows * cell_h + 2 * margin, cols * cell_w + 2 * margin), dtype=np.uint8)
    height = page.shape[0]
    records = []
    for idx, (digit, glyph) in enumerate(zip(digits, glyphs)):
        cell_r, cell_c = divmod(idx, cols)
        jr = int(rng.integers(-3, 4)) if rng is not None else 0
        jc = int(rng.integers(-3, 4)) if rng is not None else 0
        r0 = margin + cell_r * cell_h + (cell_h - glyph.shape[0]) // 2 + jr
        c0 = margin + cell_c * cell_w + (cell_w - glyph.shape[1]) // 2 + jc
        page[r0 : r0 + glyph.shape[0], c0 : c0 + glyph.shape[1]] |= glyph
        records.append(
            BoxRecord(
                glyph=digit,
                left=c0,
                bottom=height - (r0 + glyph.shape[0]),
                right=c0 + glyph.shape[1],
                top=height - r0,
                page=0,
            )
        )
    return Bitmap(page, dpi=dpi), BoxPage(records=records)


def save_page_png(bitmap: Bitmap, path: str | Path) -> None:
    from PIL import Image

    Image.fromarray(bitmap.to_gray(), mode="L").save(
        str(path), dpi=(bitmap.dpi, bitmap.dpi)
    )


def _digit_sequence(n: int, rng: np.random.Generator) -> str:
    return "".join(str(int(d)) for d in rng.integers(0, 10, size=n))


def generate_experiment(
    root: str | Path,
    seed: int = 0,
    train_glyphs: int = 1226,
    td1_glyphs: int = 249,
    td2_glyphs: int = 349,
    page_capacity: int = 120,
) -> Path:
    """Write a full synthetic dataset (pages, boxes, manifest) under root.

    Training and the known-user split share the three known writers; the
    unknown-user split uses three fresh writers.  Returns the manifest path.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    manifest = {"pages": []}

    def emit(prefix: str, writer: Writer, role: str, total: int) -> None:
        left = total
        page_no = 0
        while left > 0:
            n = min(page_capacity, left)
            left -= n
            bitmap, boxes = render_page(_digit_sequence(n, rng), writer, rng)
            name = f"{prefix}-{writer.name}-{page_no:02d}"
            save_page_png(bitmap, root / f"{name}.png")
            (root / f"{name}.box").write_bytes(write_box_file(boxes))
            manifest["pages"].append(
                {
                    "image": f"{name}.png",
                    "box": f"{name}.box",
                    "user": writer.name,
                    "role": role,
                }
            )
            page_no += 1

    per_writer = _spread(train_glyphs, len(KNOWN_WRITERS))
    for writer, n in zip(KNOWN_WRITERS, per_writer):
        emit("train", writer, "training", n)
    for writer, n in zip(KNOWN_WRITERS, _spread(td1_glyphs, len(KNOWN_WRITERS))):
        emit("td1", writer, "td1", n)
    for writer, n in zip(UNKNOWN_WRITERS, _spread(td2_glyphs, len(UNKNOWN_WRITERS))):
        emit("td2", writer, "td2", n)

    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return manifest_path


def _spread(total: int, buckets: int) -> list[int]:
    base, extra = divmod(total, buckets)
    return [base + (1 if i < extra else 0) for i in range(buckets)]


def run_experiment(root: str | Path, seed: int = 0, **generate_kwargs):
    """Generate a synthetic dataset, train on its training split and
    evaluate the known/unknown splits.  Returns (report, bundle)."""
    from .evaluate import load_manifest, run_evaluation
    from .training import train_from_pages

    manifest = load_manifest(generate_experiment(root, seed=seed, **generate_kwargs))
    bundle = train_from_pages(
        "num",
        [(p.image, p.box) for p in manifest.split("training")],
        seed=seed,
    )
    return run_evaluation(manifest, bundle, config_echo={"seed": seed}), bundle
