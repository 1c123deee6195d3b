"""HTTP API serving the annotation workbench.

All responses carry a schema_version; mutations take a client-supplied
request_id and are idempotent under retry. Media files are served as
static range-requestable files keyed by video id.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Header, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict, Field

from . import annotate
from .annotate import (
    AnnotationLabel,
    AnnotationStore,
    BatchComposition,
    CriteriaAnnotation,
    IncompleteSessionError,
    InvalidAnnotationError,
)
from .corpus import Corpus, UnknownVideoError
from .model_adapters import Prediction
from .policy import Modality, criteria_schema

API_SCHEMA_VERSION = 1


class CreateBatchRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    size: int
    composition: str
    seed: int
    label: Optional[str] = None


class AnnotationRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    request_id: str
    session_no: int
    annotator_id: str
    video_id: str
    label: str
    agrees_with_ground_truth: bool
    broad: list[str] = Field(default_factory=list)
    narrow: list[str] = Field(default_factory=list)
    modalities: list[str] = Field(default_factory=list)
    note: str = ""


class ReviewVerdictRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    request_id: str
    video_id: str
    verdict: str  # "confirm" | "override"
    note: str = ""
    reviewer_id: str = ""


def _versioned(payload: dict) -> dict:
    return {"schema_version": API_SCHEMA_VERSION, **payload}


def create_app(
    corpus: Corpus,
    store: Optional[AnnotationStore] = None,
    predictions: Optional[dict[str, Prediction]] = None,
    media_dir=None,
    token: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="scamscope annotation API")
    predictions = predictions or {}
    verdicts: dict[str, dict] = {}
    # request_id -> response payload, replayed verbatim on retry
    request_log: dict[str, dict] = {}
    request_lock = threading.Lock()

    def check_auth(x_auth_token: Optional[str] = Header(default=None)):
        if token is not None and x_auth_token != token:
            raise HTTPException(status_code=401, detail="invalid or missing token")

    def get_store() -> AnnotationStore:
        if store is None:
            raise HTTPException(status_code=503, detail="annotation store unavailable")
        return store

    if media_dir is not None and Path(media_dir).is_dir():
        app.mount("/v1/media", StaticFiles(directory=str(media_dir)), name="media")

    def _session_summary(session) -> dict:
        return {
            "session_no": session.session_no,
            "batch": list(session.batch),
            "composition": session.composition.value,
            "size": len(session.batch),
            "completed_annotators": sorted(session.completed_annotators()),
            "annotated_counts": {a: len(v) for a, v in session.records.items()},
        }

    @app.get("/v1/criteria")
    def get_criteria(_=Depends(check_auth)):
        return _versioned({"criteria": criteria_schema()})

    @app.get("/v1/batches")
    def list_batches(_=Depends(check_auth)):
        s = get_store()
        return _versioned({"batches": [_session_summary(x) for x in s.sessions()]})

    @app.post("/v1/batches", status_code=201)
    def create_batch_endpoint(req: CreateBatchRequest, _=Depends(check_auth)):
        s = get_store()
        try:
            session = s.create_session(
                corpus, req.size, BatchComposition(req.composition), req.seed, label=req.label
            )
        except (annotate.AnnotateError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return _versioned({"session": _session_summary(session)})

    @app.get("/v1/videos/{video_id}")
    def get_video(video_id: str, _=Depends(check_auth)):
        try:
            record = corpus.get(video_id)
        except UnknownVideoError:
            raise HTTPException(status_code=404, detail=f"unknown video {video_id}")
        return _versioned(
            {
                "video": {
                    "video_id": record.video_id,
                    "source": record.source.value,
                    "title": record.title,
                    "description": record.description,
                    "ground_truth": record.ground_truth.value,
                    "effective_label": record.effective_label.value,
                    "duration_s": record.duration_s,
                    "available": record.available,
                },
                "media_url": f"/v1/media/{record.media_path}" if record.media_path else None,
                "criteria": criteria_schema(),
            }
        )

    @app.post("/v1/annotations", status_code=201)
    def post_annotation(req: AnnotationRequest, _=Depends(check_auth)):
        s = get_store()
        with request_lock:
            if req.request_id in request_log:
                return request_log[req.request_id]
        try:
            ann = CriteriaAnnotation(
                annotator_id=req.annotator_id,
                video_id=req.video_id,
                label=AnnotationLabel(req.label),
                agrees_with_ground_truth=req.agrees_with_ground_truth,
                broad=frozenset(req.broad),
                narrow=frozenset(req.narrow),
                modalities=frozenset(Modality(m) for m in req.modalities),
                note=req.note,
            )
            session = s.submit(req.session_no, ann)
        except InvalidAnnotationError as exc:
            raise HTTPException(
                status_code=422,
                detail={"field_errors": exc.field_errors},
            )
        except (annotate.AnnotateError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        response = _versioned(
            {
                "annotation": ann.to_dict(),
                "session": _session_summary(session),
                "request_id": req.request_id,
            }
        )
        with request_lock:
            request_log[req.request_id] = response
        return response

    @app.get("/v1/annotations")
    def list_annotations(
        session_no: int, annotator_id: Optional[str] = None, _=Depends(check_auth)
    ):
        s = get_store()
        try:
            session = s.get(session_no)
        except annotate.AnnotateError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        rows = []
        for annotator, recs in sorted(session.records.items()):
            if annotator_id is not None and annotator != annotator_id:
                continue
            for vid in session.batch:
                if vid in recs:
                    rows.append(recs[vid].to_dict())
        return _versioned({"annotations": rows})

    @app.get("/v1/agreement/{session_no}")
    def get_agreement(session_no: int, _=Depends(check_auth)):
        s = get_store()
        try:
            session = s.get(session_no)
        except annotate.AnnotateError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        try:
            report = annotate.agreement_report(session)
        except IncompleteSessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return _versioned({"agreement": report.to_dict()})

    @app.get("/v1/predictions")
    def list_predictions(_=Depends(check_auth)):
        return _versioned(
            {"predictions": {vid: p.to_dict() for vid, p in sorted(predictions.items())}}
        )

    @app.get("/v1/predictions/{video_id}")
    def get_prediction(video_id: str, _=Depends(check_auth)):
        pred = predictions.get(video_id)
        if pred is None:
            raise HTTPException(status_code=404, detail=f"no prediction for {video_id}")
        return _versioned({"video_id": video_id, "prediction": pred.to_dict()})

    @app.post("/v1/review-verdicts", status_code=201)
    def post_review_verdict(req: ReviewVerdictRequest, _=Depends(check_auth)):
        with request_lock:
            if req.request_id in request_log:
                return request_log[req.request_id]
        if req.verdict not in ("confirm", "override"):
            raise HTTPException(
                status_code=422,
                detail={"field_errors": {"verdict": "must be confirm or override"}},
            )
        if req.video_id not in predictions:
            raise HTTPException(status_code=404, detail=f"no prediction for {req.video_id}")
        entry = {
            "video_id": req.video_id,
            "verdict": req.verdict,
            "note": req.note,
            "reviewer_id": req.reviewer_id,
        }
        verdicts[req.video_id] = entry
        response = _versioned({"review_verdict": entry, "request_id": req.request_id})
        with request_lock:
            request_log[req.request_id] = response
        return response

    @app.get("/v1/review-verdicts/{video_id}")
    def get_review_verdict(video_id: str, _=Depends(check_auth)):
        entry = verdicts.get(video_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"no verdict for {video_id}")
        return _versioned({"review_verdict": entry})

    return app
