"""HTTP service behind the box-correction UI.

Single-user, localhost-oriented tooling: no auth, JSON bodies, whole-file
PUT semantics.  Box files are written atomically (temp file + rename) under
a per-page lock, so a failed or concurrent save never corrupts ground
truth.
"""

from __future__ import annotations

import os
import tempfile
import threading
from collections import defaultdict
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from ..boxfile import BoxPage, BoxRecord, parse_box_file, write_box_file
from ..errors import BundleError, DataError, InvalidRecordError
from ..raster import SUPPORTED_SUFFIXES, binarize, load_gray
from ..recognize import propose_boxes
from ..training import load_bundle
from .config import ProjectConfig

_MEDIA_TYPES = {
    ".png": "image/png",
    ".pgm": "image/x-portable-graymap",
    ".pbm": "image/x-portable-bitmap",
    ".ppm": "image/x-portable-pixmap",
    ".tif": "image/tiff",
    ".tiff": "image/tiff",
}


def _page_index(root: Path) -> dict[str, Path]:
    """Map page id -> image path.  Ids are file stems; stems shared by
    several images fall back to the full file name."""
    images = sorted(
        p for p in root.iterdir() if p.suffix.lower() in SUPPORTED_SUFFIXES
    )
    stems = defaultdict(list)
    for p in images:
        stems[p.stem].append(p)
    index: dict[str, Path] = {}
    for stem, paths in stems.items():
        if len(paths) == 1:
            index[stem] = paths[0]
        else:
            for p in paths:
                index[p.name] = p
    return index


def _record_to_dict(rec: BoxRecord) -> dict:
    return {
        "glyph": rec.glyph,
        "left": rec.left,
        "bottom": rec.bottom,
        "right": rec.right,
        "top": rec.top,
        "page": rec.page,
    }


def _records_from_payload(payload) -> BoxPage:
    if not isinstance(payload, dict) or not isinstance(payload.get("records"), list):
        raise DataError("body must be an object with a 'records' array")
    records = []
    for i, raw in enumerate(payload["records"]):
        if not isinstance(raw, dict):
            raise DataError(f"record {i}: must be an object")
        try:
            glyph = raw["glyph"]
            coords = [raw[k] for k in ("left", "bottom", "right", "top")]
            page = raw.get("page", 0)
        except KeyError as exc:
            raise DataError(f"record {i}: missing field {exc}") from exc
        if not isinstance(glyph, str):
            raise DataError(f"record {i}: glyph must be a string")
        for value in (*coords, page):
            if not isinstance(value, int) or isinstance(value, bool):
                raise DataError(f"record {i}: coordinates must be integers")
        rec = BoxRecord(glyph, *coords, page)
        try:
            rec.validate()
        except InvalidRecordError as exc:
            raise DataError(f"record {i}: {exc}") from exc
        records.append(rec)
    return BoxPage(records=records)


def create_app(
    root: str | Path,
    config: ProjectConfig | None = None,
    lang: str | None = None,
    tessdata: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"label root {root} is not a directory")
    cfg = config or ProjectConfig()
    lang = lang or cfg.lang_code
    app = FastAPI(title="glyphforge label service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(DataError)
    def data_error_handler(_request, exc: DataError):
        # bad data on disk (malformed box file, undecodable image, ...)
        return JSONResponse({"error": str(exc)}, status_code=400)
    locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
    locks_guard = threading.Lock()

    def lock_for(pid: str) -> threading.Lock:
        with locks_guard:
            return locks[pid]

    def image_for(pid: str) -> Path | None:
        return _page_index(root).get(pid)

    def box_path_for(image: Path) -> Path:
        return image.with_suffix(".box")

    def not_found() -> JSONResponse:
        return JSONResponse({"error": "unknown page id"}, status_code=404)

    @app.get("/api/pages")
    def list_pages():
        pages = [
            {
                "id": pid,
                "image": path.name,
                "has_boxes": box_path_for(path).is_file(),
            }
            for pid, path in sorted(_page_index(root).items())
        ]
        return {"pages": pages}

    @app.get("/api/pages/{pid}/image")
    def get_image(pid: str):
        image = image_for(pid)
        if image is None:
            return not_found()
        media = _MEDIA_TYPES.get(image.suffix.lower(), "application/octet-stream")
        try:
            return Response(content=image.read_bytes(), media_type=media)
        except OSError:
            return not_found()

    @app.get("/api/pages/{pid}/boxes")
    def get_boxes(pid: str):
        image = image_for(pid)
        if image is None:
            return not_found()
        box_path = box_path_for(image)
        if not box_path.is_file():
            return {"records": [], "exists": False}
        page = parse_box_file(box_path.read_bytes())
        return {
            "records": [_record_to_dict(r) for r in page.records],
            "exists": True,
        }

    @app.put("/api/pages/{pid}/boxes")
    async def put_boxes(pid: str, request: Request):
        image = image_for(pid)
        if image is None:
            return not_found()
        try:
            payload = await request.json()
        except Exception:
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        try:
            page = _records_from_payload(payload)
        except DataError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        data = write_box_file(page)
        box_path = box_path_for(image)
        with lock_for(pid):
            fd, tmp = tempfile.mkstemp(dir=root, prefix=box_path.name, suffix=".tmp")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                os.replace(tmp, box_path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        return {"written": len(page.records)}

    @app.post("/api/pages/{pid}/autobox")
    def autobox(pid: str):
        image = image_for(pid)
        if image is None:
            return not_found()
        try:
            bundle = load_bundle(cfg.tessdata_dir(tessdata), lang)
        except BundleError:
            bundle = None
        gray, dpi = load_gray(image, dpi=cfg.dpi)
        bitmap = binarize(gray, dpi=dpi, invert=cfg.invert)
        proposals = propose_boxes(
            bitmap,
            bundle,
            noise_floor=cfg.noise_floor,
            gap_factor=cfg.gap_factor,
            reject_threshold=cfg.reject_threshold,
        )
        return {
            "records": [_record_to_dict(r) for r in proposals.records],
            "bundle": lang if bundle is not None else None,
        }

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
