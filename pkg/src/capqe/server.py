"""HTTP surface of the review service.

Routes:
    GET  /api/queue?page=&size=
    GET  /api/captions/{id}
    POST /api/captions/{id}/rescore   {"text": str}
    POST /api/captions/{id}/accept    {"text": str, "revision": int}
    POST /api/captions/{id}/reject    {"revision": int}
    GET  /api/stats

Errors are structured {"code": str, "message": str}: not_found 404,
conflict 409, invalid_state 400, validation 422, upstream 502.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import (
    InvalidStateError,
    ProviderError,
    RevisionConflictError,
    UnknownCaptionError,
)
from .model import CaptionRecord
from .review import ReviewService


class RescoreBody(BaseModel):
    text: str


class AcceptBody(BaseModel):
    text: str
    revision: int


class RejectBody(BaseModel):
    revision: int


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _record_dict(record: CaptionRecord) -> dict:
    return json.loads(
        json.dumps(
            {
                "caption_id": record.caption_id,
                "image_id": record.image_id,
                "source_text": record.source_text,
                "translated_text": record.translated_text,
                "back_translated_text": record.back_translated_text,
                "scores": record.scores.to_dict() if record.scores else None,
                "status": record.status.value,
                "revision": record.revision,
            }
        )
    )


def create_app(service: ReviewService, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="capqe review service")

    @app.exception_handler(UnknownCaptionError)
    async def _unknown(_, exc):
        return _error(404, "not_found", str(exc))

    @app.exception_handler(RevisionConflictError)
    async def _conflict(_, exc):
        return _error(409, "conflict", str(exc))

    @app.exception_handler(InvalidStateError)
    async def _invalid_state(_, exc):
        return _error(400, "invalid_state", str(exc))

    @app.exception_handler(ValueError)
    async def _validation(_, exc):
        return _error(422, "validation", str(exc))

    @app.exception_handler(ProviderError)
    async def _upstream(_, exc):
        return _error(502, "upstream", str(exc))

    @app.get("/api/queue")
    def queue(page: int = 1, size: int = 50):
        items, total = service.queue(page=page, page_size=size)
        return {"items": [item.to_dict() for item in items], "page": page, "total": total}

    @app.get("/api/captions/{caption_id}")
    def get_caption(caption_id: int):
        return _record_dict(service.get(caption_id))

    @app.post("/api/captions/{caption_id}/rescore")
    def rescore(caption_id: int, body: RescoreBody):
        return service.rescore(caption_id, body.text).to_dict()

    @app.post("/api/captions/{caption_id}/accept")
    def accept(caption_id: int, body: AcceptBody):
        return _record_dict(service.accept(caption_id, body.text, body.revision))

    @app.post("/api/captions/{caption_id}/reject")
    def reject(caption_id: int, body: RejectBody):
        return _record_dict(service.reject(caption_id, body.revision))

    @app.get("/api/stats")
    def stats():
        return service.stats()

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
