"""Command-line front end mirroring the training/recognition pipeline.

Every subcommand is a thin composition of library operations plus file I/O.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..boxfile import (
    dump_unicharset,
    extract_unicharset,
    load_unicharset,
    parse_box_file,
    write_box_file,
)
from ..errors import BundleError, DataError, GlyphforgeError
from ..evaluate import (
    frequency_report,
    load_manifest,
    render_frequency_report,
    run_evaluation,
)
from ..features import build_training_file, dump_training_file, load_training_file
from ..lexicon import build_dawg, load_dawg, parse_ambigs, parse_wordlist, serialize_dawg
from ..raster import binarize, load_gray
from ..recognize import propose_boxes, recognize_page, to_box_page
from ..training import (
    BUNDLE_PARTS,
    LangBundle,
    assemble_bundle,
    cluster_cn,
    cluster_micro,
    count_frequencies,
    dump_frequencies,
    dump_normprotos,
    dump_prototypes,
    load_bundle,
    load_frequencies,
    load_normprotos,
    load_prototypes,
)
from .config import ProjectConfig, load_config


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="glyphforge", description=__doc__)
    parser.add_argument("--config", help="key = value config file")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        return p

    p = add("makebox", "segment a page and propose a box file")
    p.add_argument("image")
    p.add_argument("out_box")
    p.add_argument("-l", "--lang")
    p.add_argument("--tessdata")
    p.add_argument("--dpi", type=int)
    p.add_argument("--invert", action="store_true")

    p = add("train", "featurize a labelled page into a training file")
    p.add_argument("image")
    p.add_argument("box")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--dpi", type=int)
    p.add_argument("--invert", action="store_true")

    p = add("mftrain", "cluster micro features into prototype/frequency tables")
    p.add_argument("tr", nargs="+")
    p.add_argument("-o", "--outdir", default=".")
    p.add_argument("--kmax", type=int)
    p.add_argument("--seed", type=int)

    p = add("cntrain", "compute cn-feature class statistics")
    p.add_argument("tr", nargs="+")
    p.add_argument("-o", "--outdir", default=".")

    p = add("unicharset-extract", "build the character inventory from box files")
    p.add_argument("box", nargs="+")
    p.add_argument("-o", "--out", default="unicharset")

    p = add("wordlist2dawg", "compile a word list into a dawg file")
    p.add_argument("wordlist")
    p.add_argument("out")

    p = add("bundle", "collect the 8 trained parts into a tessdata directory")
    p.add_argument("-l", "--lang", required=True)
    p.add_argument("parts", nargs="*")
    p.add_argument("-o", "--outdir")

    p = add("recognize", "recognize a page with a language bundle")
    p.add_argument("image")
    p.add_argument("-l", "--lang")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--boxes", action="store_true", help="also write predicted boxes")
    p.add_argument("--tessdata")
    p.add_argument("--dpi", type=int)
    p.add_argument("--invert", action="store_true")

    p = add("eval", "evaluate td1/td2 splits of a dataset manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("-l", "--lang")
    p.add_argument("--tessdata")
    p.add_argument("-o", "--out", help="report file prefix (writes .txt and .json)")
    p.add_argument("--dpi", type=int)
    p.add_argument("--invert", action="store_true")

    p = add("freq", "per-glyph frequency report over a dataset manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("-o", "--out", help="also write the report as JSON")

    p = add("serve-label", "serve the box-correction HTTP API (and UI if built)")
    p.add_argument("--root", required=True)
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("-l", "--lang")
    p.add_argument("--tessdata")
    p.add_argument("--ui", help="directory of built UI assets to serve at /")

    return parser


def _load_page(path: str, cfg: ProjectConfig, dpi: int | None, invert: bool):
    gray, page_dpi = load_gray(path, dpi=dpi if dpi else cfg.dpi)
    return binarize(gray, dpi=page_dpi, invert=invert or cfg.invert)


def _bundle_for(cfg: ProjectConfig, lang: str | None, tessdata: str | None) -> LangBundle:
    lang = lang or cfg.lang_code
    return load_bundle(cfg.tessdata_dir(tessdata), lang)


def _cmd_makebox(args, cfg: ProjectConfig) -> int:
    bitmap = _load_page(args.image, cfg, args.dpi, args.invert)
    try:
        bundle = _bundle_for(cfg, args.lang, args.tessdata)
    except BundleError:
        bundle = None  # no model yet: propose '?' labels for hand correction
    boxes = propose_boxes(
        bitmap,
        bundle,
        noise_floor=cfg.noise_floor,
        gap_factor=cfg.gap_factor,
        reject_threshold=cfg.reject_threshold,
    )
    Path(args.out_box).write_bytes(write_box_file(boxes))
    print(f"{args.out_box}: {len(boxes.records)} proposed boxes", file=sys.stderr)
    return 0


def _cmd_train(args, cfg: ProjectConfig) -> int:
    bitmap = _load_page(args.image, cfg, args.dpi, args.invert)
    boxes = parse_box_file(Path(args.box).read_bytes())
    boxes.image_ref = args.image
    tf, skipped = build_training_file(bitmap, boxes, noise_floor=cfg.noise_floor)
    Path(args.out).write_bytes(dump_training_file(tf))
    if skipped:
        print(f"warning: {skipped} box(es) held no ink and were skipped", file=sys.stderr)
    print(f"{args.out}: {len(tf.entries)} training entries", file=sys.stderr)
    return 0


def _read_tr_files(paths):
    return [load_training_file(Path(p).read_bytes(), source=str(p)) for p in paths]


def _cmd_mftrain(args, cfg: ProjectConfig) -> int:
    tr = _read_tr_files(args.tr)
    k_max = args.kmax if args.kmax else cfg.k_max
    seed = args.seed if args.seed is not None else cfg.seed
    if seed < 0:
        raise DataError("seed must be >= 0")
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "inttemp").write_bytes(dump_prototypes(cluster_micro(tr, k_max=k_max, seed=seed)))
    (out / "pffmtable").write_bytes(dump_frequencies(count_frequencies(tr)))
    print(f"{out}/inttemp, {out}/pffmtable written", file=sys.stderr)
    return 0


def _cmd_cntrain(args, cfg: ProjectConfig) -> int:
    tr = _read_tr_files(args.tr)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "normproto").write_bytes(dump_normprotos(cluster_cn(tr)))
    print(f"{out}/normproto written", file=sys.stderr)
    return 0


def _cmd_unicharset_extract(args, cfg: ProjectConfig) -> int:
    pages = [parse_box_file(Path(p).read_bytes()) for p in args.box]
    Path(args.out).write_bytes(dump_unicharset(extract_unicharset(pages)))
    print(f"{args.out} written", file=sys.stderr)
    return 0


def _cmd_wordlist2dawg(args, cfg: ProjectConfig) -> int:
    words = parse_wordlist(Path(args.wordlist).read_bytes())
    Path(args.out).write_bytes(serialize_dawg(build_dawg(words)))
    print(f"{args.out}: {len(words)} words compiled", file=sys.stderr)
    return 0


_PART_LOADERS = {
    "unicharset": load_unicharset,
    "inttemp": load_prototypes,
    "normproto": load_normprotos,
    "pffmtable": load_frequencies,
    "freq-dawg": load_dawg,
    "word-dawg": load_dawg,
    "user-words": lambda data: build_dawg(parse_wordlist(data)),
    "DangAmbigs": parse_ambigs,
}

_PART_KEYS = {
    "unicharset": "unicharset",
    "inttemp": "prototypes",
    "normproto": "normprotos",
    "pffmtable": "frequencies",
    "freq-dawg": "freq_dawg",
    "word-dawg": "word_dawg",
    "user-words": "user_words",
    "DangAmbigs": "ambigs",
}


def _cmd_bundle(args, cfg: ProjectConfig) -> int:
    found: dict[str, object] = {}
    for path in args.parts:
        name = Path(path).name
        matched = None
        for part in sorted(BUNDLE_PARTS, key=len, reverse=True):
            if name == part or name.endswith(part):
                matched = part
                break
        if matched is None:
            raise DataError(f"cannot tell which bundle component {path!r} is")
        if matched in found:
            raise DataError(f"component {matched} supplied twice")
        found[matched] = _PART_LOADERS[matched](Path(path).read_bytes())
    out_dir = cfg.tessdata_dir(args.outdir)
    bundle = assemble_bundle(
        args.lang,
        **{_PART_KEYS[p]: found.get(p) for p in BUNDLE_PARTS},
        out_dir=out_dir,
    )
    print(f"{out_dir}: bundle {bundle.lang_code!r} written", file=sys.stderr)
    return 0


def _cmd_recognize(args, cfg: ProjectConfig) -> int:
    bundle = _bundle_for(cfg, args.lang, args.tessdata)
    bitmap = _load_page(args.image, cfg, args.dpi, args.invert)
    result = recognize_page(
        bitmap,
        bundle,
        noise_floor=cfg.noise_floor,
        gap_factor=cfg.gap_factor,
        oversized_factor=cfg.oversized_factor,
        reject_threshold=cfg.reject_threshold,
        pruner_keep=cfg.pruner_keep,
    )
    Path(args.out).write_text(result.text + "\n", encoding="utf-8")
    if args.boxes:
        box_path = Path(args.out).with_suffix(".box")
        box_path.write_bytes(write_box_file(to_box_page(result)))
        print(f"{box_path} written", file=sys.stderr)
    print(f"{args.out} written", file=sys.stderr)
    return 0


def _cmd_eval(args, cfg: ProjectConfig) -> int:
    manifest = load_manifest(args.manifest)
    bundle = _bundle_for(cfg, args.lang, args.tessdata)
    report = run_evaluation(
        manifest,
        bundle,
        dpi=args.dpi if args.dpi else cfg.dpi,
        invert=args.invert or cfg.invert,
        iou_threshold=cfg.iou_threshold,
        config_echo=cfg.echo(),
        noise_floor=cfg.noise_floor,
        gap_factor=cfg.gap_factor,
        oversized_factor=cfg.oversized_factor,
        reject_threshold=cfg.reject_threshold,
        pruner_keep=cfg.pruner_keep,
    )
    print(report.to_text(), end="")
    if args.out:
        Path(args.out + ".txt").write_text(report.to_text(), encoding="utf-8")
        Path(args.out + ".json").write_text(
            json.dumps(report.to_dict(), indent=2), encoding="utf-8"
        )
        print(f"{args.out}.txt and {args.out}.json written", file=sys.stderr)
    return 0


def _cmd_freq(args, cfg: ProjectConfig) -> int:
    freqs = frequency_report(load_manifest(args.manifest))
    print(render_frequency_report(freqs), end="")
    if args.out:
        Path(args.out).write_text(json.dumps(freqs, indent=2), encoding="utf-8")
    return 0


def _cmd_serve_label(args, cfg: ProjectConfig) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        args.root,
        config=cfg,
        lang=args.lang,
        tessdata=args.tessdata,
        ui_dir=args.ui,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_HANDLERS = {
    "makebox": _cmd_makebox,
    "train": _cmd_train,
    "mftrain": _cmd_mftrain,
    "cntrain": _cmd_cntrain,
    "unicharset-extract": _cmd_unicharset_extract,
    "wordlist2dawg": _cmd_wordlist2dawg,
    "bundle": _cmd_bundle,
    "recognize": _cmd_recognize,
    "eval": _cmd_eval,
    "freq": _cmd_freq,
    "serve-label": _cmd_serve_label,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_usage(sys.stderr)
            return 1
        cfg = load_config(args.config) if args.config else ProjectConfig()
        return _HANDLERS[args.command](args, cfg)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (GlyphforgeError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
