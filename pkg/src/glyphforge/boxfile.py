"""Box-file ground truth: one labelled bounding box per line.

The interchange format is UTF-8 text, one record per line::

    <glyph> <left> <bottom> <right> <top> <page>

Coordinates are pixels with the origin at the page's bottom-left corner and
y growing upward; ``left``/``bottom`` are inclusive edges, ``right``/``top``
exclusive, so ``left < right`` and ``bottom < top`` always hold.  The page
field is optional on input (older five-field files) but always written.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from .errors import EmptyTrainingSetError, InvalidRecordError, ParseError

DIGITS = "0123456789"


@dataclass(frozen=True)
class BoxRecord:
    """A single labelled glyph box."""

    glyph: str
    left: int
    bottom: int
    right: int
    top: int
    page: int = 0

    def validate(self) -> None:
        """Raise InvalidRecordError if any invariant is broken."""
        if len(self.glyph) != 1:
            raise InvalidRecordError(
                f"glyph must be a single unicode scalar, got {self.glyph!r}"
            )
        if self.glyph.isspace() or unicodedata.category(self.glyph).startswith("Z"):
            raise InvalidRecordError("glyph must not be whitespace")
        for name in ("left", "bottom", "right", "top", "page"):
            if getattr(self, name) < 0:
                raise InvalidRecordError(f"{name} must be >= 0")
        if self.left >= self.right:
            raise InvalidRecordError(
                f"invalid geometry: left {self.left} >= right {self.right}"
            )
        if self.bottom >= self.top:
            raise InvalidRecordError(
                f"invalid geometry: bottom {self.bottom} >= top {self.top}"
            )

    @property
    def width(self) -> int:
        return self.right - self.left

    @property
    def height(self) -> int:
        return self.top - self.bottom


@dataclass
class BoxPage:
    """Ordered records of one page; order is reading order and is preserved
    verbatim through parse/write round-trips."""

    records: list[BoxRecord] = field(default_factory=list)
    image_ref: str = field(default="", compare=False)

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class Unicharset:
    """Character inventory: (glyph, is_digit, sample_count) in first-seen order."""

    entries: list[tuple[str, bool, int]] = field(default_factory=list)

    def glyphs(self) -> list[str]:
        return [g for g, _, _ in self.entries]

    def counts(self) -> dict[str, int]:
        return {g: n for g, _, n in self.entries}

    def total(self) -> int:
        return sum(n for _, _, n in self.entries)

    def __contains__(self, glyph: str) -> bool:
        return any(g == glyph for g, _, _ in self.entries)


def parse_box_file(data: bytes | str) -> BoxPage:
    """Parse box-file text into a BoxPage.

    Empty lines are skipped; a missing page field defaults to 0.  Malformed
    field counts, non-integer coordinates, and geometry violations raise
    ParseError carrying the 1-based line number.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8 at byte {exc.start}") from exc
    else:
        text = data

    records = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) not in (5, 6):
            raise ParseError(
                f"expected 5 or 6 fields, got {len(fields)}", line=lineno
            )
        glyph = fields[0]
        try:
            nums = [int(f) for f in fields[1:]]
        except ValueError as exc:
            raise ParseError(f"non-integer coordinate: {exc}", line=lineno) from exc
        left, bottom, right, top = nums[:4]
        page = nums[4] if len(nums) == 5 else 0
        record = BoxRecord(glyph, left, bottom, right, top, page)
        try:
            record.validate()
        except InvalidRecordError as exc:
            raise ParseError(str(exc), line=lineno) from exc
        records.append(record)
    return BoxPage(records=records)


def write_box_file(page: BoxPage) -> bytes:
    """Serialize a BoxPage to canonical box-file bytes.

    One line per record, single-space separated, page index always emitted,
    ``\\n`` terminators, no trailing spaces.  ``parse_box_file`` inverts this
    exactly.
    """
    lines = []
    for index, rec in enumerate(page.records):
        try:
            rec.validate()
        except InvalidRecordError as exc:
            raise InvalidRecordError(f"record {index}: {exc}") from exc
        lines.append(
            f"{rec.glyph} {rec.left} {rec.bottom} {rec.right} {rec.top} {rec.page}\n"
        )
    return "".join(lines).encode("utf-8")


def extract_unicharset(pages: list[BoxPage]) -> Unicharset:
    """Aggregate the distinct glyphs of one or more box pages.

    Entry order is first occurrence across the input pages; sample counts sum
    to the total number of input records.
    """
    order: list[str] = []
    counts: dict[str, int] = {}
    for page in pages:
        for rec in page.records:
            if rec.glyph not in counts:
                order.append(rec.glyph)
                counts[rec.glyph] = 0
            counts[rec.glyph] += 1
    if not counts:
        raise EmptyTrainingSetError("no records in any input page")
    entries = [(g, g in DIGITS, counts[g]) for g in order]
    return Unicharset(entries=entries)


def dump_unicharset(u: Unicharset) -> bytes:
    """UTF-8 text: entry count, then one ``glyph digit_flag count`` per line."""
    lines = [f"{len(u.entries)}\n"]
    for glyph, is_digit, count in u.entries:
        lines.append(f"{glyph} {1 if is_digit else 0} {count}\n")
    return "".join(lines).encode("utf-8")


def load_unicharset(data: bytes | str) -> Unicharset:
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8 at byte {exc.start}") from exc
    else:
        text = data
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise ParseError("empty unicharset")
    try:
        count = int(lines[0])
    except ValueError as exc:
        raise ParseError(f"bad entry count: {lines[0]!r}", line=1) from exc
    if len(lines) - 1 != count:
        raise ParseError(f"expected {count} entries, found {len(lines) - 1}")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(f"expected 3 fields, got {len(fields)}", line=lineno)
        glyph, flag, n = fields
        if len(glyph) != 1:
            raise ParseError(f"glyph {glyph!r} is not a single scalar", line=lineno)
        if flag not in ("0", "1"):
            raise ParseError(f"digit flag must be 0 or 1, got {flag!r}", line=lineno)
        try:
            n_int = int(n)
        except ValueError as exc:
            raise ParseError(f"bad sample count {n!r}", line=lineno) from exc
        if n_int < 0:
            raise ParseError("sample count must be >= 0", line=lineno)
        entries.append((glyph, flag == "1", n_int))
    return Unicharset(entries=entries)
