"""Prediction-to-ground-truth matching and the accuracy/rejection reports.

Matching is greedy by descending IoU with a 0.5 acceptance threshold.  A
leftover prediction that covers at least half of two or more unmatched
ground-truth boxes (each with per-box IoU below 0.5) counts as one
under-segmentation event and those boxes are marked absorbed.  On every
page ``true + misclassified + rejected + absorbed == total``.

The headline percentage is ``true / (true + misclassified + under_segmented)``
with rejected samples excluded from every term.  The legacy ratio
``true / (misclassified + under_segmented)`` exceeds 100 and is reproduced
only in the report footnote for traceability.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .boxfile import BoxPage, BoxRecord, parse_box_file
from .errors import DataError
from .raster import binarize, load_gray
from .recognize import REJECT, BlobResult, PageResult, recognize_page
from .training import LangBundle

IOU_THRESHOLD = 0.5
ROLES = ("training", "td1", "td2")

UNMATCHED = "<unmatched>"
ABSORBED = "<absorbed>"


@dataclass
class EvalCounts:
    c_t: int = 0  # true classifications
    c_m: int = 0  # misclassifications
    c_s: int = 0  # under-segmentation events
    rejected: int = 0
    total_gt: int = 0
    rejected_by_classifier: int = 0  # matched to a rejecting prediction
    rejected_unmatched: int = 0  # ground truth no prediction claimed
    absorbed: int = 0  # gt boxes swallowed by under-segmentation events
    oversized_flagged: int = 0

    def __add__(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(
            *(getattr(self, f) + getattr(other, f) for f in self.__dataclass_fields__)
        )

    def conserved(self) -> bool:
        return self.c_t + self.c_m + self.rejected + self.absorbed == self.total_gt


@dataclass
class BoxMatch:
    gt_index: int
    pred_index: int  # -1 for unmatched/absorbed ground truth
    iou: float
    outcome: str  # "true" | "misclassified" | "rejected" | "unmatched" | "absorbed"


@dataclass
class PageMatches:
    matches: list[BoxMatch]
    counts: EvalCounts
    confusion: Counter  # (gt glyph, predicted label or marker) -> count


def _iou_inter(a: BoxRecord, b: tuple[int, int, int, int]) -> tuple[float, int]:
    il = max(a.left, b[0])
    ib = max(a.bottom, b[1])
    ir = min(a.right, b[2])
    it = min(a.top, b[3])
    inter = max(0, ir - il) * max(0, it - ib)
    if inter == 0:
        return 0.0, 0
    area_a = (a.right - a.left) * (a.top - a.bottom)
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter), inter


def match_boxes(
    gt: BoxPage, pred: PageResult, iou_threshold: float = IOU_THRESHOLD
) -> PageMatches:
    """Align predictions to ground truth and tally the page's counts."""
    items: list[BlobResult] = [it for line in pred.lines for it in line.items]
    counts = EvalCounts(total_gt=len(gt.records))
    counts.oversized_flagged = sum(1 for it in items if it.oversized)
    confusion: Counter = Counter()
    matches: list[BoxMatch] = []

    pairs = []
    for j, item in enumerate(items):
        for i, rec in enumerate(gt.records):
            iou, _ = _iou_inter(rec, item.bbox)
            if iou > 0:
                pairs.append((-iou, item.bbox[0], rec.left, j, i))
    pairs.sort()

    gt_taken = [False] * len(gt.records)
    pred_taken = [False] * len(items)
    for neg_iou, _, _, j, i in pairs:
        iou = -neg_iou
        if iou < iou_threshold:
            break
        if gt_taken[i] or pred_taken[j]:
            continue
        gt_taken[i] = True
        pred_taken[j] = True
        rec, cls = gt.records[i], items[j].classification
        if cls.rejected:
            counts.rejected_by_classifier += 1
            outcome = "rejected"
            confusion[(rec.glyph, REJECT)] += 1
        elif cls.label == rec.glyph:
            counts.c_t += 1
            outcome = "true"
            confusion[(rec.glyph, cls.label)] += 1
        else:
            counts.c_m += 1
            outcome = "misclassified"
            confusion[(rec.glyph, cls.label)] += 1
        matches.append(BoxMatch(gt_index=i, pred_index=j, iou=iou, outcome=outcome))

    # under-segmentation: one leftover prediction spanning >= 2 leftover
    # gt boxes, each mostly covered but below the IoU bar
    for j, item in enumerate(items):
        if pred_taken[j]:
            continue
        swallowed = []
        for i, rec in enumerate(gt.records):
            if gt_taken[i]:
                continue
            iou, inter = _iou_inter(rec, item.bbox)
            area_gt = (rec.right - rec.left) * (rec.top - rec.bottom)
            if iou < iou_threshold and inter / area_gt >= 0.5:
                swallowed.append((i, iou))
        if len(swallowed) >= 2:
            counts.c_s += 1
            pred_taken[j] = True
            for i, iou in swallowed:
                gt_taken[i] = True
                counts.absorbed += 1
                confusion[(gt.records[i].glyph, ABSORBED)] += 1
                matches.append(
                    BoxMatch(gt_index=i, pred_index=j, iou=iou, outcome="absorbed")
                )

    for i, rec in enumerate(gt.records):
        if not gt_taken[i]:
            counts.rejected_unmatched += 1
            confusion[(rec.glyph, UNMATCHED)] += 1
            matches.append(BoxMatch(gt_index=i, pred_index=-1, iou=0.0, outcome="unmatched"))

    counts.rejected = counts.rejected_by_classifier + counts.rejected_unmatched
    return PageMatches(matches=matches, counts=counts, confusion=confusion)


def compute_accuracy(c: EvalCounts) -> float | None:
    """Percentage of true results among considered (non-rejected) samples.

    ``true / (true + misclassified + under_segmented) * 100``; rejected
    samples appear in no term.  Returns None when the denominator is zero.
    """
    denom = c.c_t + c.c_m + c.c_s
    if denom == 0:
        return None
    return 100.0 * c.c_t / denom


def rejection_rate(c: EvalCounts) -> float | None:
    if c.total_gt == 0:
        return None
    return 100.0 * c.rejected / c.total_gt


@dataclass
class ManifestPage:
    image: str
    box: str
    user: str
    role: str


@dataclass
class DatasetManifest:
    pages: list[ManifestPage] = field(default_factory=list)

    def known_users(self) -> set[str]:
        return {p.user for p in self.pages if p.role == "training"}

    def validate(self) -> None:
        known = self.known_users()
        for p in self.pages:
            if p.role not in ROLES:
                raise DataError(f"page {p.image}: unknown role {p.role!r}")
            if p.role == "td1" and p.user not in known:
                raise DataError(
                    f"page {p.image}: td1 requires a known user, {p.user!r} "
                    f"contributed no training pages"
                )
            if p.role == "td2" and p.user in known:
                raise DataError(
                    f"page {p.image}: td2 requires an unknown user, but "
                    f"{p.user!r} contributed training pages"
                )

    def split(self, role: str) -> list[ManifestPage]:
        return [p for p in self.pages if p.role == role]


def load_manifest(path: str | Path) -> DatasetManifest:
    """Read a dataset manifest (JSON: {"pages": [{image, box, user, role}]});
    paths are resolved relative to the manifest file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    pages = []
    base = path.parent
    for entry in raw.get("pages", []):
        try:
            pages.append(
                ManifestPage(
                    image=str(base / entry["image"]),
                    box=str(base / entry["box"]),
                    user=str(entry["user"]),
                    role=str(entry["role"]),
                )
            )
        except KeyError as exc:
            raise DataError(f"manifest entry missing field {exc}") from exc
    manifest = DatasetManifest(pages=pages)
    manifest.validate()
    return manifest


FOOTNOTE = (
    "success_pct = true / (true + misclassified + under_segmented) * 100, "
    "rejected samples excluded from every term.  The legacy ratio "
    "true / (misclassified + under_segmented) is not a percentage (it "
    "exceeds 100 whenever most samples are correct) and is shown per split "
    "as legacy_ratio for traceability."
)


@dataclass
class SplitResult:
    counts: EvalCounts
    confusion: Counter


@dataclass
class EvalReport:
    splits: dict[str, SplitResult]
    config: dict
    footnote: str = FOOTNOTE

    def row(self, split: str) -> dict:
        c = self.splits[split].counts
        acc = compute_accuracy(c)
        rej = rejection_rate(c)
        legacy = None
        if c.c_m + c.c_s > 0:
            legacy = c.c_t / (c.c_m + c.c_s)
        return {
            "split": split,
            "total": c.total_gt,
            "true": c.c_t,
            "misclassified": c.c_m,
            "rejected": c.rejected,
            "under_segmented": c.c_s,
            "absorbed": c.absorbed,
            "oversized_flagged": c.oversized_flagged,
            "success_pct": None if acc is None else round(acc, 2),
            "rejection_rate_pct": None if rej is None else round(rej, 2),
            "legacy_ratio": None if legacy is None else round(legacy, 4),
        }

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "rows": [self.row(s) for s in self.splits],
            "confusion": {
                split: {
                    f"{gt}->{pred}": n
                    for (gt, pred), n in sorted(res.confusion.items())
                }
                for split, res in self.splits.items()
            },
            "footnote": self.footnote,
        }

    def to_text(self) -> str:
        headers = [
            "split", "total", "misclassified", "rejected",
            "under_segmented", "success_pct", "rejection_rate_pct",
        ]
        lines = ["\t".join(headers)]
        for split in self.splits:
            row = self.row(split)
            lines.append(
                "\t".join(
                    "undefined" if row[h] is None else str(row[h]) for h in headers
                )
            )
        lines.append("")
        lines.append("config: " + json.dumps(self.config, sort_keys=True))
        lines.append("note: " + self.footnote)
        return "\n".join(lines) + "\n"


def build_report(
    manifest: DatasetManifest,
    results: list[tuple[ManifestPage, PageMatches]],
    config: dict | None = None,
) -> EvalReport:
    """Aggregate per-page matches into per-split rows.

    Every td1/td2 page of the manifest must appear in the results.
    """
    manifest.validate()
    done = {id(p) for p, _ in results}
    for page in manifest.pages:
        if page.role in ("td1", "td2") and id(page) not in done:
            raise DataError(f"page {page.image} ({page.role}) was not evaluated")
    splits: dict[str, SplitResult] = {}
    for role in ("td1", "td2"):
        counts = EvalCounts()
        confusion: Counter = Counter()
        for page, pm in results:
            if page.role == role:
                counts = counts + pm.counts
                confusion.update(pm.confusion)
        splits[role] = SplitResult(counts=counts, confusion=confusion)
    return EvalReport(splits=splits, config=config or {})


def run_evaluation(
    manifest: DatasetManifest,
    bundle: LangBundle,
    *,
    dpi: int | None = None,
    invert: bool = False,
    iou_threshold: float = IOU_THRESHOLD,
    config_echo: dict | None = None,
    **recognize_kwargs,
) -> EvalReport:
    """Recognize every td1/td2 page of the manifest and build the report."""
    results = []
    for page in manifest.pages:
        if page.role not in ("td1", "td2"):
            continue
        gray, page_dpi = load_gray(page.image, dpi=dpi)
        bitmap = binarize(gray, dpi=page_dpi, invert=invert)
        pred = recognize_page(bitmap, bundle, **recognize_kwargs)
        gt = parse_box_file(Path(page.box).read_bytes())
        results.append((page, match_boxes(gt, pred, iou_threshold=iou_threshold)))
    return build_report(manifest, results, config=config_echo)


def frequency_report(manifest: DatasetManifest) -> dict[str, dict[str, int]]:
    """Per-glyph sample counts per split, plus per-split totals.

    Returns {role: {glyph: count, ..., "total": n}} over the manifest's box
    files.
    """
    out: dict[str, dict[str, int]] = {}
    for role in ROLES:
        counter: Counter = Counter()
        for page in manifest.split(role):
            boxes = parse_box_file(Path(page.box).read_bytes())
            counter.update(rec.glyph for rec in boxes.records)
        row = {g: counter[g] for g in sorted(counter)}
        row["total"] = sum(counter.values())
        out[role] = row
    return out


def render_frequency_report(freqs: dict[str, dict[str, int]]) -> str:
    glyphs = sorted({g for row in freqs.values() for g in row if g != "total"})
    lines = ["\t".join(["split", *glyphs, "total"])]
    for role, row in freqs.items():
        lines.append(
            "\t".join([role, *[str(row.get(g, 0)) for g in glyphs], str(row.get("total", 0))])
        )
    return "\n".join(lines) + "\n"
