"""Prototype training and the eight-component language bundle.

Micro-feature vectors are clustered per class with seeded k-means (k-means++
init, Euclidean metric, 100-iteration cap, empty clusters reseeded to the
farthest point); the per-class prototype budget is
``min(k_max, ceil(n/20), n)`` so capacity grows with data without
producing singleton prototypes for tiny classes.  The cn family keeps one
diagonal Gaussian per class (mean + per-dimension variance).

A trained model is a ``tessdata/`` directory of 8 files sharing a 3-letter
``<lang>.`` prefix: unicharset and user-words are UTF-8 text, DangAmbigs is
the ambiguity-rule text format, both dawgs and the prototype/statistics
tables are little-endian binaries with magic + version headers.
"""

from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .boxfile import Unicharset, dump_unicharset, load_unicharset
from .errors import BundleError, DataError, EmptyTrainingSetError, FormatError
from .features import CELLS, CN_DIM, GRID, MICRO_DIM, N_DIRS, TrainingFile
from .lexicon import (
    AmbigTable,
    Dawg,
    build_dawg,
    load_dawg,
    parse_ambigs,
    parse_wordlist,
    serialize_dawg,
    write_ambigs,
    write_wordlist,
)

INTTEMP_MAGIC = b"GINT"
NORMPROTO_MAGIC = b"GNPR"
PFFM_MAGIC = b"GPFF"
PART_VERSION = 1

VARIANCE_FLOOR = 1e-4
DEFAULT_KMAX = 8
KMEANS_MAX_ITER = 100

BUNDLE_PARTS = (
    "unicharset",
    "inttemp",
    "normproto",
    "pffmtable",
    "freq-dawg",
    "word-dawg",
    "user-words",
    "DangAmbigs",
)


@dataclass
class Prototype:
    centroid: np.ndarray  # float64[128]
    weight: int

    def __eq__(self, other):
        return (
            isinstance(other, Prototype)
            and self.weight == other.weight
            and np.array_equal(self.centroid, other.centroid)
        )


@dataclass
class PrototypeSet:
    """Per-class micro-feature prototypes plus the feature-geometry header
    that makes a bundle self-describing."""

    classes: dict[str, list[Prototype]] = field(default_factory=dict)
    grid: int = GRID
    cells: int = CELLS
    dirs: int = N_DIRS

    def __eq__(self, other):
        return (
            isinstance(other, PrototypeSet)
            and (self.grid, self.cells, self.dirs) == (other.grid, other.cells, other.dirs)
            and self.classes == other.classes
        )


@dataclass
class NormProtos:
    """Per-class mean and per-dimension variance of the cn features."""

    classes: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, NormProtos) or self.classes.keys() != other.classes.keys():
            return False
        return all(
            np.array_equal(self.classes[g][0], other.classes[g][0])
            and np.array_equal(self.classes[g][1], other.classes[g][1])
            for g in self.classes
        )


@dataclass
class ClassFrequencies:
    counts: dict[str, int] = field(default_factory=dict)

    def total(self) -> int:
        return sum(self.counts.values())


def _gather(tr_files: list[TrainingFile], attr: str) -> dict[str, np.ndarray]:
    by_class: dict[str, list[np.ndarray]] = {}
    for tf in tr_files:
        for label, feats in tf.entries:
            by_class.setdefault(label, []).append(getattr(feats, attr))
    if not by_class:
        raise EmptyTrainingSetError("no training entries supplied")
    return {
        g: np.asarray(vecs, dtype=np.float64)
        for g, vecs in sorted(by_class.items(), key=lambda kv: ord(kv[0]))
    }


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    centers[0] = x[int(rng.integers(len(x)))]
    if k == 1:
        return centers
    _, d2 = kernels.assign_nearest(x, centers[:1])
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            pick = int(rng.integers(len(x)))
        else:
            r = float(rng.random()) * total
            pick = min(int(np.searchsorted(np.cumsum(d2), r, side="right")), len(x) - 1)
        centers[j] = x[pick]
        _, d2_new = kernels.assign_nearest(x, centers[j : j + 1])
        d2 = np.minimum(d2, d2_new)
    return centers


def lloyd(
    x: np.ndarray, centers: np.ndarray, max_iter: int = KMEANS_MAX_ITER
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Capped Lloyd iteration; returns (centers, labels, objective history).

    The recorded within-cluster sum of squares is non-increasing and the
    returned labels are a fixed point of the returned centers (unless the
    iteration cap struck first).
    """
    k = len(centers)
    centers = centers.copy()
    labels, d2 = kernels.assign_nearest(x, centers)
    history: list[float] = []
    for _ in range(max_iter):
        counts = np.bincount(labels, minlength=k)
        if (counts == 0).any():
            # an empty cluster grabs the point farthest from its center
            loose = d2.copy()
            for j in np.flatnonzero(counts == 0):
                far = int(np.argmax(loose))
                centers[j] = x[far]
                loose[far] = -1.0
            labels, d2 = kernels.assign_nearest(x, centers)
        history.append(float(d2.sum()))
        sums, counts = kernels.sum_by_label(x, labels, k)
        occupied = counts > 0
        centers[occupied] = sums[occupied] / counts[occupied, None]
        new_labels, d2 = kernels.assign_nearest(x, centers)
        done = bool(np.array_equal(new_labels, labels))
        labels = new_labels
        if done:
            history.append(float(d2.sum()))
            break
    return centers, labels, history


def prototype_budget(n_samples: int, k_max: int = DEFAULT_KMAX) -> int:
    return min(k_max, math.ceil(n_samples / 20), n_samples)


def cluster_micro(
    tr_files: list[TrainingFile], k_max: int = DEFAULT_KMAX, seed: int = 0
) -> PrototypeSet:
    """Cluster micro features into per-class prototypes, deterministically
    for a fixed seed (each class draws from its own seed stream)."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    by_class = _gather(tr_files, "micro")
    proto = PrototypeSet()
    for glyph, x in by_class.items():
        k = prototype_budget(len(x), k_max)
        rng = np.random.default_rng([seed, ord(glyph)])
        centers = _kmeans_pp_init(x, k, rng)
        centers, labels, _ = lloyd(x, centers)
        counts = np.bincount(labels, minlength=k)
        protos = [
            Prototype(centroid=centers[j].copy(), weight=int(counts[j]))
            for j in range(k)
            if counts[j] > 0
        ]
        proto.classes[glyph] = protos
    return proto


def cluster_cn(tr_files: list[TrainingFile]) -> NormProtos:
    """Per-class mean and variance of the cn features.

    Variances are floored at 1e-4 in every dimension, which realizes the
    single-sample floor and keeps the pruning distance finite when a
    multi-sample class happens to be degenerate in some dimension.
    """
    by_class = _gather(tr_files, "cn")
    out = NormProtos()
    for glyph, x in by_class.items():
        mean = x.mean(axis=0)
        var = np.maximum(x.var(axis=0), VARIANCE_FLOOR)
        out.classes[glyph] = (mean, var)
    return out


def count_frequencies(tr_files: list[TrainingFile]) -> ClassFrequencies:
    by_class = _gather(tr_files, "micro")
    return ClassFrequencies(counts={g: len(v) for g, v in by_class.items()})


@dataclass
class LangBundle:
    """The 8-component language set."""

    lang_code: str
    unicharset: Unicharset
    prototypes: PrototypeSet
    normprotos: NormProtos
    frequencies: ClassFrequencies
    freq_dawg: Dawg
    word_dawg: Dawg
    user_words: Dawg
    ambigs: AmbigTable


def dump_prototypes(p: PrototypeSet) -> bytes:
    out = [
        struct.pack(
            "<4sIIIII", INTTEMP_MAGIC, PART_VERSION, p.grid, p.cells, p.dirs, len(p.classes)
        )
    ]
    for glyph, protos in p.classes.items():
        out.append(struct.pack("<II", ord(glyph), len(protos)))
        for pr in protos:
            if pr.centroid.shape != (MICRO_DIM,):
                raise DataError(f"prototype for {glyph!r} has wrong dimension")
            out.append(struct.pack("<I", pr.weight))
            out.append(np.asarray(pr.centroid, dtype="<f8").tobytes())
    return b"".join(out)


def load_prototypes(data: bytes) -> PrototypeSet:
    try:
        magic, version, grid, cells, dirs, n_classes = struct.unpack_from("<4sIIIII", data, 0)
    except struct.error as exc:
        raise FormatError("prototype table truncated") from exc
    if magic != INTTEMP_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != PART_VERSION:
        raise FormatError(f"unsupported prototype table version {version}")
    if (grid, cells, dirs) != (GRID, CELLS, N_DIRS):
        raise FormatError(
            f"bundle built for geometry grid={grid} cells={cells} dirs={dirs}, "
            f"this build uses {GRID}/{CELLS}/{N_DIRS}"
        )
    p = PrototypeSet(grid=grid, cells=cells, dirs=dirs)
    off = 24
    for _ in range(n_classes):
        try:
            code, n_protos = struct.unpack_from("<II", data, off)
            off += 8
            protos = []
            for _ in range(n_protos):
                (weight,) = struct.unpack_from("<I", data, off)
                off += 4
                if off + 8 * MICRO_DIM > len(data):
                    raise FormatError("prototype table truncated")
                centroid = np.frombuffer(data, dtype="<f8", count=MICRO_DIM, offset=off).copy()
                off += 8 * MICRO_DIM
                protos.append(Prototype(centroid=centroid, weight=weight))
        except struct.error as exc:
            raise FormatError("prototype table truncated") from exc
        p.classes[chr(code)] = protos
    if off != len(data):
        raise FormatError("trailing bytes after prototype table")
    return p


def dump_normprotos(n: NormProtos) -> bytes:
    out = [struct.pack("<4sII", NORMPROTO_MAGIC, PART_VERSION, len(n.classes))]
    for glyph, (mean, var) in n.classes.items():
        out.append(struct.pack("<I", ord(glyph)))
        out.append(np.asarray(mean, dtype="<f8").tobytes())
        out.append(np.asarray(var, dtype="<f8").tobytes())
    return b"".join(out)


def load_normprotos(data: bytes) -> NormProtos:
    try:
        magic, version, n_classes = struct.unpack_from("<4sII", data, 0)
    except struct.error as exc:
        raise FormatError("normproto table truncated") from exc
    if magic != NORMPROTO_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != PART_VERSION:
        raise FormatError(f"unsupported normproto version {version}")
    out = NormProtos()
    off = 12
    step = 4 + 2 * 8 * CN_DIM
    if len(data) != 12 + n_classes * step:
        raise FormatError("normproto table truncated")
    for _ in range(n_classes):
        (code,) = struct.unpack_from("<I", data, off)
        off += 4
        mean = np.frombuffer(data, dtype="<f8", count=CN_DIM, offset=off).copy()
        off += 8 * CN_DIM
        var = np.frombuffer(data, dtype="<f8", count=CN_DIM, offset=off).copy()
        off += 8 * CN_DIM
        out.classes[chr(code)] = (mean, var)
    return out


def dump_frequencies(f: ClassFrequencies) -> bytes:
    out = [struct.pack("<4sII", PFFM_MAGIC, PART_VERSION, len(f.counts))]
    for glyph, count in f.counts.items():
        out.append(struct.pack("<II", ord(glyph), count))
    return b"".join(out)


def load_frequencies(data: bytes) -> ClassFrequencies:
    try:
        magic, version, n = struct.unpack_from("<4sII", data, 0)
    except struct.error as exc:
        raise FormatError("frequency table truncated") from exc
    if magic != PFFM_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != PART_VERSION:
        raise FormatError(f"unsupported frequency table version {version}")
    if len(data) != 12 + 8 * n:
        raise FormatError("frequency table truncated")
    counts = {}
    for i in range(n):
        code, count = struct.unpack_from("<II", data, 12 + 8 * i)
        counts[chr(code)] = count
    return ClassFrequencies(counts=counts)


_PART_DUMPERS = {
    "unicharset": lambda b: dump_unicharset(b.unicharset),
    "inttemp": lambda b: dump_prototypes(b.prototypes),
    "normproto": lambda b: dump_normprotos(b.normprotos),
    "pffmtable": lambda b: dump_frequencies(b.frequencies),
    "freq-dawg": lambda b: serialize_dawg(b.freq_dawg),
    "word-dawg": lambda b: serialize_dawg(b.word_dawg),
    "user-words": lambda b: write_wordlist(b.user_words.words()),
    "DangAmbigs": lambda b: write_ambigs(b.ambigs),
}


def assemble_bundle(
    lang: str,
    *,
    unicharset: Unicharset | None = None,
    prototypes: PrototypeSet | None = None,
    normprotos: NormProtos | None = None,
    frequencies: ClassFrequencies | None = None,
    freq_dawg: Dawg | None = None,
    word_dawg: Dawg | None = None,
    user_words: Dawg | None = None,
    ambigs: AmbigTable | None = None,
    out_dir: str | Path | None = None,
) -> LangBundle:
    """Validate the 8 components, build the bundle, and (with ``out_dir``)
    write the ``<lang>.*`` files into a tessdata directory."""
    if not re.fullmatch(r"[a-z]{3}", lang):
        raise BundleError(f"lang code must be 3 lowercase letters, got {lang!r}")
    parts = {
        "unicharset": unicharset,
        "inttemp": prototypes,
        "normproto": normprotos,
        "pffmtable": frequencies,
        "freq-dawg": freq_dawg,
        "word-dawg": word_dawg,
        "user-words": user_words,
        "DangAmbigs": ambigs,
    }
    missing = [name for name in BUNDLE_PARTS if parts[name] is None]
    if missing:
        raise BundleError(f"missing bundle component(s): {', '.join(missing)}")
    bundle = LangBundle(
        lang_code=lang,
        unicharset=unicharset,
        prototypes=prototypes,
        normprotos=normprotos,
        frequencies=frequencies,
        freq_dawg=freq_dawg,
        word_dawg=word_dawg,
        user_words=user_words,
        ambigs=ambigs,
    )
    if out_dir is not None:
        write_bundle(bundle, out_dir)
    return bundle


def write_bundle(bundle: LangBundle, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in BUNDLE_PARTS:
        (out / f"{bundle.lang_code}.{name}").write_bytes(_PART_DUMPERS[name](bundle))
    (out / f"{bundle.lang_code}.README.txt").write_text(
        f"Language set '{bundle.lang_code}': 8 files, one model.\n"
        f"  {bundle.lang_code}.unicharset  character inventory (text)\n"
        f"  {bundle.lang_code}.inttemp     micro-feature prototypes (binary; the header\n"
        f"                   carries the feature geometry {bundle.prototypes.grid}x"
        f"{bundle.prototypes.grid} grid / {bundle.prototypes.cells}x{bundle.prototypes.cells}"
        f" cells / {bundle.prototypes.dirs} directions, so there is no separate\n"
        f"                   feature-metadata file)\n"
        f"  {bundle.lang_code}.normproto   cn-feature class statistics (binary)\n"
        f"  {bundle.lang_code}.pffmtable   class sample counts (binary)\n"
        f"  {bundle.lang_code}.freq-dawg   frequent-word automaton (binary)\n"
        f"  {bundle.lang_code}.word-dawg   word automaton (binary)\n"
        f"  {bundle.lang_code}.user-words  extra words, one per line (text)\n"
        f"  {bundle.lang_code}.DangAmbigs  ambiguity rules (text; may be empty)\n",
        encoding="utf-8",
    )
    return out


def load_bundle(tessdata_dir: str | Path, lang: str) -> LangBundle:
    """Load all 8 components of ``<lang>.*`` from a tessdata directory.

    Missing files raise BundleError naming every absent component.
    """
    base = Path(tessdata_dir)
    missing = [
        name for name in BUNDLE_PARTS if not (base / f"{lang}.{name}").is_file()
    ]
    if missing:
        raise BundleError(
            f"bundle {lang!r} in {base} is missing: {', '.join(missing)}"
        )

    def read(name: str) -> bytes:
        return (base / f"{lang}.{name}").read_bytes()

    return LangBundle(
        lang_code=lang,
        unicharset=load_unicharset(read("unicharset")),
        prototypes=load_prototypes(read("inttemp")),
        normprotos=load_normprotos(read("normproto")),
        frequencies=load_frequencies(read("pffmtable")),
        freq_dawg=load_dawg(read("freq-dawg")),
        word_dawg=load_dawg(read("word-dawg")),
        user_words=build_dawg(parse_wordlist(read("user-words"))),
        ambigs=parse_ambigs(read("DangAmbigs")),
    )


def train_bundle(
    lang: str,
    tr_files: list[TrainingFile],
    unicharset: Unicharset,
    *,
    freq_words: list[str] | None = None,
    words: list[str] | None = None,
    user_words: list[str] | None = None,
    ambigs: AmbigTable | None = None,
    k_max: int = DEFAULT_KMAX,
    seed: int = 0,
    out_dir: str | Path | None = None,
) -> LangBundle:
    """One-call training: cluster both feature families, build the three
    dictionaries (empty by default) and assemble the bundle."""
    alphabet = set(unicharset.glyphs())
    return assemble_bundle(
        lang,
        unicharset=unicharset,
        prototypes=cluster_micro(tr_files, k_max=k_max, seed=seed),
        normprotos=cluster_cn(tr_files),
        frequencies=count_frequencies(tr_files),
        freq_dawg=build_dawg(freq_words or [], alphabet),
        word_dawg=build_dawg(words or [], alphabet),
        user_words=build_dawg(user_words or [], alphabet),
        ambigs=ambigs if ambigs is not None else AmbigTable(),
        out_dir=out_dir,
    )


def train_from_pages(
    lang: str,
    pages: list[tuple[str | Path, str | Path]],
    *,
    dpi: int | None = None,
    invert: bool = False,
    noise_floor: float | None = None,
    k_max: int = DEFAULT_KMAX,
    seed: int = 0,
    out_dir: str | Path | None = None,
    **bundle_kwargs,
) -> LangBundle:
    """Train a bundle straight from (image path, box path) pairs."""
    from .boxfile import extract_unicharset, parse_box_file
    from .features import build_training_file
    from .raster import binarize, load_gray

    tr_files, box_pages = [], []
    for image_path, box_path in pages:
        gray, page_dpi = load_gray(image_path, dpi=dpi)
        bitmap = binarize(gray, dpi=page_dpi, invert=invert)
        boxes = parse_box_file(Path(box_path).read_bytes())
        boxes.image_ref = str(image_path)
        tf, _ = build_training_file(bitmap, boxes, noise_floor=noise_floor)
        tr_files.append(tf)
        box_pages.append(boxes)
    return train_bundle(
        lang,
        tr_files,
        extract_unicharset(box_pages),
        k_max=k_max,
        seed=seed,
        out_dir=out_dir,
        **bundle_kwargs,
    )
