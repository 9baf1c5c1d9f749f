"""Static classification and page-level recognition.

Classification is two-stage: the cn features prune classes by diagonal
Mahalanobis distance (top P survive), then the micro vector is matched
against every surviving prototype by Euclidean distance.  The best distance
wins; anything above the rejection threshold, or an all-zero micro vector,
is rejected.  Ties go to the class with the higher training frequency, then
the lowest codepoint.

Dictionary machinery never changes a label: when a line's text misses both
dawgs but one ambiguity-rule application lands in the frequent-word dawg,
the rewrite is attached as a suggestion next to the raw string.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .boxfile import BoxPage, BoxRecord
from .errors import DataError
from .features import CN_DIM, MICRO_DIM, GlyphFeatures, featurize_blob
from .raster import (
    GAP_FACTOR,
    NOISE_FLOOR,
    OVERSIZED_FACTOR,
    Bitmap,
    connected_components,
    flag_oversized,
    segment_lines,
)
from .training import LangBundle

REJECT = "<reject>"
REJECT_THRESHOLD = 0.9
PRUNER_KEEP = 5


@dataclass
class Classification:
    label: str  # glyph, or REJECT
    distance: float
    alternatives: list[tuple[str, float]] = field(default_factory=list)

    @property
    def rejected(self) -> bool:
        return self.label == REJECT


@dataclass(eq=False)
class BlobResult:
    bbox: tuple[int, int, int, int]
    classification: Classification
    oversized: bool


@dataclass(eq=False)
class LineResult:
    items: list[BlobResult]
    text: str  # accepted labels, left to right
    baseline_band: tuple[int, int]
    suggestion: str | None = None


@dataclass(eq=False)
class PageResult:
    lines: list[LineResult]

    @property
    def text(self) -> str:
        """Accepted labels in reading order, one text line per page line."""
        return "\n".join(line.text for line in self.lines)


def classify_glyph(
    f: GlyphFeatures,
    bundle: LangBundle,
    reject_threshold: float = REJECT_THRESHOLD,
    pruner_keep: int = PRUNER_KEEP,
) -> Classification:
    """Classify one glyph's features against a loaded bundle."""
    micro = np.asarray(f.micro, dtype=np.float64)
    cn = np.asarray(f.cn, dtype=np.float64)
    if micro.shape != (MICRO_DIM,) or cn.shape != (CN_DIM,):
        raise DataError(
            f"feature dimensions {micro.shape}/{cn.shape} do not match the bundle"
        )
    if not micro.any():
        return Classification(label=REJECT, distance=float("inf"))

    glyphs = [
        g for g in bundle.normprotos.classes if bundle.prototypes.classes.get(g)
    ]
    if not glyphs:
        raise DataError("bundle has no trained classes")
    means = np.stack([bundle.normprotos.classes[g][0] for g in glyphs])
    variances = np.stack([bundle.normprotos.classes[g][1] for g in glyphs])
    d_cn = (((cn - means) ** 2) / variances).sum(axis=1)
    codes = np.array([ord(g) for g in glyphs])
    survivors = [glyphs[i] for i in np.lexsort((codes, d_cn))[:pruner_keep]]

    ranked = []
    for g in survivors:
        protos = np.stack([p.centroid for p in bundle.prototypes.classes[g]])
        _, d2 = kernels.assign_nearest(micro[None, :], protos)
        dist = float(np.sqrt(d2[0]))
        freq = bundle.frequencies.counts.get(g, 0)
        ranked.append((dist, -freq, ord(g), g))
    ranked.sort()
    best_dist, _, _, best_glyph = ranked[0]
    alternatives = [(g, d) for d, _, _, g in ranked[:3]]
    label = best_glyph if best_dist <= reject_threshold else REJECT
    return Classification(label=label, distance=best_dist, alternatives=alternatives)


def recognize_page(
    img: Bitmap,
    bundle: LangBundle,
    *,
    noise_floor: float = NOISE_FLOOR,
    connectivity: int = 8,
    gap_factor: float = GAP_FACTOR,
    oversized_factor: float = OVERSIZED_FACTOR,
    reject_threshold: float = REJECT_THRESHOLD,
    pruner_keep: int = PRUNER_KEEP,
) -> PageResult:
    """Segment a page and classify every blob, reading order preserved."""
    blobs = connected_components(img, noise_floor=noise_floor, connectivity=connectivity)
    lines = segment_lines(blobs, gap_factor=gap_factor)
    out_lines = []
    for line in lines:
        items = []
        for blob, oversized in flag_oversized(line, factor=oversized_factor):
            cls = classify_glyph(
                featurize_blob(blob),
                bundle,
                reject_threshold=reject_threshold,
                pruner_keep=pruner_keep,
            )
            items.append(BlobResult(bbox=blob.bbox, classification=cls, oversized=oversized))
        text = "".join(i.classification.label for i in items if not i.classification.rejected)
        out_lines.append(
            LineResult(
                items=items,
                text=text,
                baseline_band=line.baseline_band,
                suggestion=_suggest(text, bundle),
            )
        )
    return PageResult(lines=out_lines)


def _suggest(text: str, bundle: LangBundle) -> str | None:
    """A single ambiguity-rule rewrite that turns a dictionary miss into a
    frequent-word hit, if one exists; the raw string always stays primary."""
    if not text or text in bundle.word_dawg or text in bundle.freq_dawg:
        return None
    for rule in bundle.ambigs.rules:
        src = "".join(rule.source)
        dst = "".join(rule.replacement)
        start = text.find(src)
        while start != -1:
            candidate = text[:start] + dst + text[start + len(src) :]
            if candidate in bundle.freq_dawg:
                return candidate
            start = text.find(src, start + 1)
    return None


def to_box_page(
    result: PageResult, page_index: int = 0, reject_glyph: str = "?"
) -> BoxPage:
    """Predicted box records in reading order; rejected blobs get the
    placeholder glyph so a human can fix them in the editor."""
    records = []
    for line in result.lines:
        for item in line.items:
            glyph = item.classification.label
            if glyph == REJECT:
                glyph = reject_glyph
            left, bottom, right, top = item.bbox
            records.append(
                BoxRecord(glyph, left, bottom, right, top, page_index)
            )
    return BoxPage(records=records)


def propose_boxes(
    img: Bitmap,
    bundle: LangBundle | None,
    *,
    noise_floor: float = NOISE_FLOOR,
    connectivity: int = 8,
    gap_factor: float = GAP_FACTOR,
    reject_threshold: float = REJECT_THRESHOLD,
    placeholder: str = "?",
) -> BoxPage:
    """Segmentation-driven box proposals (the bootstrap labelling step).

    With a bundle the current model labels each blob; without one every blob
    gets the placeholder glyph and a human corrects them in the editor.
    """
    if bundle is not None:
        result = recognize_page(
            img,
            bundle,
            noise_floor=noise_floor,
            connectivity=connectivity,
            gap_factor=gap_factor,
            reject_threshold=reject_threshold,
        )
        return to_box_page(result, reject_glyph=placeholder)
    blobs = connected_components(img, noise_floor=noise_floor, connectivity=connectivity)
    records = []
    for line in segment_lines(blobs, gap_factor=gap_factor):
        for blob in line.blobs:
            left, bottom, right, top = blob.bbox
            records.append(BoxRecord(placeholder, left, bottom, right, top, 0))
    return BoxPage(records=records)
