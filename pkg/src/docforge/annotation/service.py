"""HTTP face of the review stage.

The service owns no state of its own: the session file defines who reviews
what, the dataset provides the entries, and every decision goes through the
append-only store before the client sees a 200.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, field_validator

from ..dataset import DatasetEntry
from .core import (
    REASONS,
    VERDICTS,
    AnnotationError,
    Decision,
    Session,
    fleiss_kappa,
    matrix_from_decisions,
)
from .store import DecisionStore


class DecisionIn(BaseModel):
    entry_id: str
    annotator_id: str
    verdict: str
    reason: str

    @field_validator("verdict")
    @classmethod
    def _verdict_known(cls, v):
        if v not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")
        return v

    @field_validator("reason")
    @classmethod
    def _reason_known(cls, v):
        if v not in REASONS:
            raise ValueError(f"reason must be one of {REASONS}")
        return v


class DecisionOut(BaseModel):
    entry_id: str
    annotator_id: str
    verdict: str
    reason: str
    timestamp: float


class AgreementOut(BaseModel):
    session: str
    kappa: float | None
    items: int
    raters: int
    status: str  # "ok" | "pending"


def entry_view(entry: DatasetEntry, flags: list[str]) -> dict:
    d = entry.as_dict()
    d["flags"] = flags
    return d


def create_app(
    session: Session,
    entries: dict[str, DatasetEntry],
    store: DecisionStore,
    flags: dict[str, list[str]] | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    missing = [i for i in session.items if i not in entries]
    if missing:
        raise AnnotationError(
            f"session references {len(missing)} items absent from the dataset "
            f"(first: {missing[0]})"
        )
    flags = flags or {}

    app = FastAPI(title="docforge review", docs_url=None, redoc_url=None)

    @app.get("/api/queue")
    def queue(annotator: str = Query(...)) -> list[dict]:
        if annotator not in session.annotators:
            raise HTTPException(status_code=404, detail=f"unknown annotator {annotator!r}")
        done = store.decided_by(annotator)
        return [
            entry_view(entries[i], flags.get(i, []))
            for i in session.assigned_to(annotator)
            if i not in done
        ]

    @app.post("/api/decision", response_model=DecisionOut)
    def decide(body: DecisionIn) -> DecisionOut:
        if body.annotator_id not in session.annotators:
            raise HTTPException(status_code=404, detail=f"unknown annotator {body.annotator_id!r}")
        if body.annotator_id not in session.assignment.get(body.entry_id, ()):
            raise HTTPException(
                status_code=422,
                detail=f"entry {body.entry_id!r} is not assigned to {body.annotator_id!r}",
            )
        try:
            decision = Decision(
                entry_id=body.entry_id,
                annotator_id=body.annotator_id,
                verdict=body.verdict,
                reason=body.reason,
            )
        except AnnotationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        stored = store.append(decision)  # durable before the 200 below
        return DecisionOut(**stored.as_dict())

    @app.get("/api/agreement", response_model=AgreementOut)
    def agreement(session_id: str = Query(..., alias="session"),
                  by: str = Query("verdict")) -> AgreementOut:
        if session_id != session.id:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        raters = session.raters_per_item()
        try:
            matrix = matrix_from_decisions(store.decisions(), raters=raters, by=by)
        except AnnotationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        if raters < 2 or not matrix.rows:
            return AgreementOut(session=session_id, kappa=None, items=len(matrix.rows),
                                raters=raters, status="pending")
        try:
            kappa = fleiss_kappa(matrix)
        except AnnotationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return AgreementOut(session=session_id, kappa=kappa, items=len(matrix.rows),
                            raters=raters, status="ok")

    @app.get("/api/progress")
    def progress(session_id: str = Query(..., alias="session")) -> dict:
        if session_id != session.id:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        latest = store.latest()
        per_annotator = {}
        for a in session.annotators:
            assigned = session.assigned_to(a)
            decided = sum(1 for i in assigned if (i, a) in latest)
            per_annotator[a] = {"assigned": len(assigned), "decided": decided}
        total_assignments = sum(len(r) for r in session.assignment.values())
        decided_assignments = sum(
            1 for (e, a) in latest if a in session.assignment.get(e, ())
        )
        return {
            "session": session.id,
            "phase": session.phase,
            "total_items": len(session.items),
            "total_assignments": total_assignments,
            "decided_assignments": decided_assignments,
            "complete": decided_assignments == total_assignments,
            "per_annotator": per_annotator,
        }

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
