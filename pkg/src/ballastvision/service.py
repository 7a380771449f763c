"""HTTP API for interactive parameter tuning.

A session holds one uploaded image and a configuration; parameter
patches invalidate exactly the downstream stages, and intermediate
images recompute lazily, so slider changes only redo the affected work.

Routes (JSON fields snake_case):
  POST   /api/sessions                       multipart image -> 201 {id, width, height}
  GET    /api/sessions/{id}                  config + cached-stage status
  PATCH  /api/sessions/{id}/params           partial config merge -> {invalidated: [...]}
  GET    /api/sessions/{id}/stages/{stage}   ?layer=top|middle|bottom -> image/png
  GET    /api/sessions/{id}/result           full degradation report JSON
  DELETE /api/sessions/{id}
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response, UploadFile

from .analysis import DegradationReport
from .colorcode import color_index, render_label_ids
from .errors import BallastError, ConfigError, PipelineLayerError
from .image import GrayImage, LayerIndex, RgbImage, png_bytes
from .pipeline import (
    LAYERS,
    LabelsResult,
    PipelineComputation,
    config_from_dict,
    config_to_dict,
    default_config,
    merge_config_dicts,
)
from .segmentation import MarkerSet

API_STAGES = (
    "gray",
    "tone",
    "filtered",
    "opened_closed",
    "markers",
    "gradient",
    "labels",
    "overlay",
)
LAYER_NAMES = {layer.value: layer for layer in LAYERS}

ALLOWED_UPLOAD_TYPES = {"image/png", "image/jpeg", "image/jpg"}
ALLOWED_UPLOAD_SUFFIXES = {".png", ".jpg", ".jpeg"}


class TuningSession:
    """One uploaded image plus its lazily computed pipeline stages."""

    def __init__(self, session_id: str, image: RgbImage):
        self.id = session_id
        self.computation = PipelineComputation(image, default_config())
        self.lock = threading.Lock()
        self.last_access = time.monotonic()

    def touch(self) -> None:
        self.last_access = time.monotonic()


def _error_name(exc: BallastError) -> str:
    return type(exc).__name__.removesuffix("Error")


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(
        content=json.dumps(payload).encode(),
        status_code=status_code,
        media_type="application/json",
    )


def report_json_obj(report: DegradationReport) -> dict:
    """Report document including per-segment records and color indices."""
    return {
        "image_area_px": report.image_area_px,
        "mode": report.mode,
        "params_digest": report.params_digest,
        "pds_percent": report.pds_percent,
        "final_pds": report.final_pds,
        "per_layer_pds": list(report.per_layer_pds) if report.per_layer_pds else None,
        "typical_area_px": report.typical_area_px,
        "category_counts": report.category_counts(),
        "category_areas": report.category_areas(),
        "segments": [
            {
                "label": rec.label,
                "area_px": rec.area_px,
                "hull_area_px": rec.hull_area_px,
                "convexity": rec.convexity,
                "r": rec.r,
                "category": rec.category.value,
                "color_index": color_index(rec.category, rec.r),
            }
            for rec in report.segments
        ],
    }


def _stage_png(comp: PipelineComputation, stage: str, layer: LayerIndex | None) -> bytes:
    """Render one pipeline stage to PNG bytes (lazy recompute)."""
    if stage in ("gray", "tone"):
        return png_bytes(comp.stage(stage))
    if stage in ("filtered", "opened_closed", "gradient"):
        if layer is not None:
            return png_bytes(comp.stage(stage, layer))
        parts = [comp.stage(stage, l).pixels for l in LAYERS]
        return png_bytes(GrayImage(np.vstack(parts)))
    if stage == "markers":
        layers = [layer] if layer is not None else list(LAYERS)
        parts = []
        for l in layers:
            markers: MarkerSet = comp.stage("markers", l)
            canvas = np.zeros(markers.foreground.bits.shape)
            canvas[markers.background.bits] = 128.0 / 255.0
            canvas[markers.foreground.bits] = 1.0
            parts.append(canvas)
        return png_bytes(GrayImage(np.vstack(parts)))
    if stage == "labels":
        labels: LabelsResult = comp.stage("labels")
        return png_bytes(render_label_ids(labels.display, comp.key))
    if stage == "overlay":
        return png_bytes(comp.overlay())
    raise ValueError(f"unknown stage {stage!r}")


def create_app(
    max_upload_mb: int = 50,
    session_ttl_sec: int = 3600,
    static_dir: Path | None = None,
    session_dir: Path | None = None,
) -> FastAPI:
    app = FastAPI(title="ballastvision tuner", version="0.1.0")
    sessions: dict[str, TuningSession] = {}
    store_lock = threading.Lock()

    if session_dir is not None:
        Path(session_dir).mkdir(parents=True, exist_ok=True)

    def sweep_expired() -> None:
        now = time.monotonic()
        with store_lock:
            dead = [sid for sid, s in sessions.items() if now - s.last_access > session_ttl_sec]
            for sid in dead:
                sessions.pop(sid, None)

    def get_session(session_id: str) -> TuningSession | None:
        sweep_expired()
        with store_lock:
            session = sessions.get(session_id)
            if session is not None:
                session.touch()
            return session

    @app.post("/api/sessions")
    def create_session(image: UploadFile) -> Response:
        data = image.file.read()
        if len(data) > max_upload_mb * 1024 * 1024:
            return _json_response(
                {"error": "payload too large", "limit_mb": max_upload_mb}, 413
            )
        suffix = Path(image.filename or "").suffix.lower()
        ctype = (image.content_type or "").lower()
        if ctype not in ALLOWED_UPLOAD_TYPES and suffix not in ALLOWED_UPLOAD_SUFFIXES:
            return _json_response({"error": "unsupported media type"}, 415)

        import io

        from PIL import Image, UnidentifiedImageError

        try:
            with Image.open(io.BytesIO(data)) as im:
                if im.format not in ("PNG", "JPEG"):
                    return _json_response(
                        {"error": f"unsupported image format {im.format!r}"}, 415
                    )
                arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
        except UnidentifiedImageError:
            return _json_response({"error": "corrupt image"}, 422)
        except (OSError, SyntaxError) as exc:
            return _json_response({"error": f"corrupt image: {exc}"}, 422)

        rgb = RgbImage(arr)
        session_id = uuid.uuid4().hex
        session = TuningSession(session_id, rgb)
        with store_lock:
            sessions[session_id] = session
        if session_dir is not None:
            ext = suffix if suffix in ALLOWED_UPLOAD_SUFFIXES else ".png"
            (Path(session_dir) / f"{session_id}{ext}").write_bytes(data)
        return _json_response(
            {"id": session_id, "width": rgb.width, "height": rgb.height}, 201
        )

    @app.get("/api/sessions/{session_id}")
    def get_session_info(session_id: str) -> Response:
        session = get_session(session_id)
        if session is None:
            return _json_response({"error": "unknown session"}, 404)
        with session.lock:
            comp = session.computation
            return _json_response(
                {
                    "id": session.id,
                    "width": comp.image.width,
                    "height": comp.image.height,
                    "config": config_to_dict(comp.config),
                    "cached_stages": comp.cached_stages(),
                }
            )

    @app.patch("/api/sessions/{session_id}/params")
    async def update_params(session_id: str, request: Request) -> Response:
        session = get_session(session_id)
        if session is None:
            return _json_response({"error": "unknown session"}, 404)
        try:
            patch = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _json_response(
                {"error": "invalid parameter", "field": "(body)", "reason": str(exc)}, 422
            )
        if not isinstance(patch, dict):
            return _json_response(
                {"error": "invalid parameter", "field": "(body)", "reason": "expected an object"},
                422,
            )
        with session.lock:
            merged = merge_config_dicts(config_to_dict(session.computation.config), patch)
            try:
                new_cfg = config_from_dict(merged)
            except ConfigError as exc:
                return _json_response(
                    {"error": "invalid parameter", "field": exc.field, "reason": exc.reason},
                    422,
                )
            invalidated = session.computation.update_config(new_cfg)
            return _json_response({"invalidated": invalidated})

    @app.get("/api/sessions/{session_id}/stages/{stage}")
    def get_stage(session_id: str, stage: str, layer: str | None = None) -> Response:
        session = get_session(session_id)
        if session is None:
            return _json_response({"error": "unknown session"}, 404)
        if stage not in API_STAGES:
            return _json_response(
                {"error": "invalid parameter", "field": "stage",
                 "reason": f"must be one of {', '.join(API_STAGES)}"},
                422,
            )
        layer_index: LayerIndex | None = None
        if layer is not None:
            layer_index = LAYER_NAMES.get(layer)
            if layer_index is None:
                return _json_response(
                    {"error": "invalid parameter", "field": "layer",
                     "reason": "must be top, middle, or bottom"},
                    422,
                )
        with session.lock:
            try:
                data = _stage_png(session.computation, stage, layer_index)
            except PipelineLayerError as exc:
                return _json_response(
                    {"error": _error_name(exc.cause), "layer": exc.layer}, 409
                )
            except BallastError as exc:
                return _json_response({"error": _error_name(exc)}, 409)
        return Response(content=data, media_type="image/png")

    @app.get("/api/sessions/{session_id}/result")
    def get_result(session_id: str) -> Response:
        session = get_session(session_id)
        if session is None:
            return _json_response({"error": "unknown session"}, 404)
        with session.lock:
            try:
                report = session.computation.report()
            except PipelineLayerError as exc:
                return _json_response(
                    {"error": _error_name(exc.cause), "layer": exc.layer}, 409
                )
            except BallastError as exc:
                return _json_response({"error": _error_name(exc)}, 409)
            return _json_response(report_json_obj(report))

    @app.delete("/api/sessions/{session_id}")
    def delete_session(session_id: str) -> Response:
        with store_lock:
            existed = sessions.pop(session_id, None)
        if existed is None:
            return _json_response({"error": "unknown session"}, 404)
        return Response(status_code=204)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
