"""HTTP API exposing timelines, distance, synchronization, BEV and reports.

The service is stateless apart from an immutable timeline registry
loaded at startup (or extended by upload); weights travel with each
request, so identical sync requests are idempotent and cacheable.

Error responses carry a machine-readable code:
404 unknown_timeline / unknown_frame, 422 invalid_weights,
400 malformed_body, 409 duplicate_timeline, 413 too_large.
"""

from __future__ import annotations

import threading
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from .bev import BevConfig, load_style, project_topdown, render_svg
from .config import AppConfig
from .distance import (
    FACTOR_ORDER,
    PRESETS,
    WeightProfile,
    extract_features,
    factor_delta,
    feature_distance,
)
from .errors import DocumentError, FieldError, GraphError
from .model import Timeline
from .report import ReporterConfig, diff_graphs, render_report
from .sync import alignment_to_dict, cost_matrix, dtw_align
from .timeline_io import graph_to_record, parse_timeline

API_PREFIX = "/api/v1"


class TimelineStore:
    """Immutable-after-registration timeline registry."""

    def __init__(self):
        self._timelines: dict[str, Timeline] = {}
        self._lock = threading.Lock()
        self._sync_cache: dict[tuple, dict] = {}

    def register(self, timeline: Timeline, replace: bool = False) -> None:
        with self._lock:
            if timeline.id in self._timelines and not replace:
                raise KeyError(timeline.id)
            self._timelines[timeline.id] = timeline

    def get(self, timeline_id: str) -> Optional[Timeline]:
        return self._timelines.get(timeline_id)

    def ids(self) -> list[str]:
        return sorted(self._timelines)

    def cached_sync(self, key: tuple, compute) -> dict:
        with self._lock:
            hit = self._sync_cache.get(key)
        if hit is not None:
            return hit
        result = compute()
        with self._lock:
            self._sync_cache[key] = result
        return result


class WeightsSpec(BaseModel):
    """Either a named preset or explicit per-factor values."""

    preset: Optional[str] = None
    values: Optional[dict[str, float]] = None
    l_room: float = 10.0
    t_max: float = 3600.0

    def resolve(self) -> WeightProfile:
        if self.preset is not None:
            maker = PRESETS.get(self.preset)
            if maker is None:
                raise HTTPException(
                    422,
                    detail={"code": "invalid_weights", "detail": f"unknown preset {self.preset!r}"},
                )
            return maker()
        values = self.values if self.values is not None else {k: 1.0 for k in FACTOR_ORDER}
        try:
            return WeightProfile(values, self.l_room, self.t_max)
        except FieldError as exc:
            raise HTTPException(422, detail={"code": "invalid_weights", "detail": str(exc)})

    def cache_key(self) -> tuple:
        profile = self.resolve()
        return (
            tuple(profile.weights[k] for k in FACTOR_ORDER),
            profile.l_room,
            profile.t_max,
        )


class FrameRef(BaseModel):
    timeline: str
    frame: int


class DistanceRequest(BaseModel):
    a: FrameRef
    b: FrameRef
    weights: WeightsSpec = Field(default_factory=WeightsSpec)


class SyncRequest(BaseModel):
    a: str
    b: str
    weights: WeightsSpec = Field(default_factory=WeightsSpec)
    band: Optional[int] = None
    include_matrix: bool = False


class ReportRequest(BaseModel):
    a: FrameRef
    b: FrameRef
    movement: bool = False


class UploadRequest(BaseModel):
    document: str


def create_app(config: AppConfig = AppConfig(), store: Optional[TimelineStore] = None) -> FastAPI:
    app = FastAPI(title="orscene", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = store if store is not None else TimelineStore()
    style = load_style(config.style_path)

    if config.timeline_dir is not None:
        for path in sorted(config.timeline_dir.glob("*.jsonl")):
            with open(path, encoding="utf-8") as fh:
                registry.register(parse_timeline(fh.read()))

    @app.exception_handler(RequestValidationError)
    async def malformed_body(_req: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "malformed_body", "detail": str(exc.errors()[:3])}},
        )

    @app.exception_handler(HTTPException)
    async def structured_http_error(_req: Request, exc: HTTPException):
        detail = exc.detail if isinstance(exc.detail, dict) else {"code": "error", "detail": exc.detail}
        return JSONResponse(status_code=exc.status_code, content={"error": detail})

    def timeline_or_404(timeline_id: str) -> Timeline:
        t = registry.get(timeline_id)
        if t is None:
            raise HTTPException(
                404, detail={"code": "unknown_timeline", "detail": timeline_id}
            )
        return t

    def frame_or_404(ref: FrameRef):
        t = timeline_or_404(ref.timeline)
        if not 0 <= ref.frame < len(t):
            raise HTTPException(
                404,
                detail={"code": "unknown_frame", "detail": f"{ref.timeline}[{ref.frame}]"},
            )
        return t.frames[ref.frame]

    @app.get(API_PREFIX + "/timelines")
    def list_timelines():
        out = []
        for tid in registry.ids():
            t = registry.get(tid)
            out.append({"id": tid, "frame_count": len(t), "metadata": dict(t.metadata)})
        return {"timelines": out}

    @app.post(API_PREFIX + "/timelines", status_code=201)
    def upload_timeline(req: UploadRequest):
        try:
            timeline = parse_timeline(req.document)
        except (DocumentError, GraphError) as exc:
            raise HTTPException(400, detail={"code": "malformed_body", "detail": str(exc)})
        try:
            registry.register(timeline)
        except KeyError:
            raise HTTPException(
                409, detail={"code": "duplicate_timeline", "detail": timeline.id}
            )
        return {"id": timeline.id, "frame_count": len(timeline)}

    @app.get(API_PREFIX + "/timelines/{timeline_id}")
    def timeline_info(timeline_id: str):
        t = timeline_or_404(timeline_id)
        return {"id": t.id, "frame_count": len(t), "metadata": dict(t.metadata)}

    @app.get(API_PREFIX + "/timelines/{timeline_id}/frames/{frame}")
    def frame_graph(timeline_id: str, frame: int):
        g = frame_or_404(FrameRef(timeline=timeline_id, frame=frame))
        return {"timeline": timeline_id, "frame": graph_to_record(g)}

    @app.get(API_PREFIX + "/timelines/{timeline_id}/frames/{frame}/bev")
    def frame_bev(timeline_id: str, frame: int, format: str = "json"):
        t = timeline_or_404(timeline_id)
        g = frame_or_404(FrameRef(timeline=timeline_id, frame=frame))
        layout = project_topdown(
            g,
            BevConfig(
                room_extent=t.room_extent,
                padding=config.bev.padding,
                human_radius=config.bev.human_radius,
            ),
        )
        if format == "svg":
            return Response(render_svg(layout, style), media_type="image/svg+xml")
        return {"timeline": timeline_id, "frame": frame, "layout": layout.to_dict()}

    @app.get(API_PREFIX + "/weights/presets")
    def weight_presets():
        return {name: maker().to_dict() for name, maker in PRESETS.items()}

    @app.post(API_PREFIX + "/distance")
    def distance(req: DistanceRequest):
        profile = req.weights.resolve()
        fa = extract_features(frame_or_404(req.a))
        fb = extract_features(frame_or_404(req.b))
        return {
            "distance": feature_distance(fa, fb, profile),
            "deltas": factor_delta(fa, fb, profile),
        }

    @app.post(API_PREFIX + "/sync")
    def sync(req: SyncRequest):
        ta = timeline_or_404(req.a)
        tb = timeline_or_404(req.b)
        if len(ta) == 0 or len(tb) == 0:
            raise HTTPException(
                422, detail={"code": "empty_timeline", "detail": req.a if len(ta) == 0 else req.b}
            )
        if len(ta) * len(tb) > config.max_sync_cells:
            raise HTTPException(
                413,
                detail={
                    "code": "too_large",
                    "detail": f"{len(ta)}x{len(tb)} exceeds {config.max_sync_cells} cells",
                },
            )
        key = (req.a, req.b, req.weights.cache_key(), req.band)

        def compute() -> dict:
            matrix = cost_matrix(ta, tb, req.weights.resolve())
            path = dtw_align(matrix, band=req.band)
            return {
                "alignment": alignment_to_dict(path),
                "matrix": matrix.values.tolist(),
            }

        result = registry.cached_sync(key, compute)
        response = {
            "a": req.a,
            "b": req.b,
            "alignment": result["alignment"],
        }
        if req.include_matrix:
            response["matrix"] = result["matrix"]
        return response

    @app.post(API_PREFIX + "/report")
    def report(req: ReportRequest):
        ga = frame_or_404(req.a)
        gb = frame_or_404(req.b)
        changes = diff_graphs(ga, gb, ReporterConfig(report_movement=req.movement))
        return {"changes": changes.to_dict(), "sentences": render_report(changes)}

    return app
