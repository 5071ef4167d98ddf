"""HTTP surface of the curation service.

Thin translation layer: JSON in, store calls, JSON out. Reviewer identity
travels in the ``X-Annotator`` header. Rule violations come back as 422 with
the violated rule names; version conflicts and claim races as 409.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Optional

from fastapi import FastAPI, Header, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .store import (
    ConflictError,
    CurationStore,
    EditSubmission,
    NotFoundError,
    RejectionError,
    guideline_rules,
)


class TurnBody(BaseModel):
    speaker: str
    text: str


class SubmissionBody(BaseModel):
    base_version: int
    seconds: float = Field(gt=0)
    turns: list[TurnBody]


class DeleteBody(BaseModel):
    base_version: int
    seconds: float = Field(gt=0)


def _violations_payload(exc: RejectionError) -> dict:
    return {
        "rejected": True,
        "violations": [
            {"rule": v.rule, "turn_index": v.turn_index, "message": v.message}
            for v in exc.violations
        ],
    }


def _shared_fixture(name: str):
    path = resources.files("dialkit.service").joinpath("data").joinpath(name)
    return json.loads(path.read_text(encoding="utf-8"))


def create_app(store: CurationStore) -> FastAPI:
    app = FastAPI(title="dialkit curation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def _annotator(value: Optional[str]) -> str:
        if not value or not value.strip():
            raise HTTPException(401, detail="X-Annotator header required")
        return value.strip()

    @app.get("/tasks")
    def list_tasks(state: Optional[str] = None):
        try:
            return {"tasks": store.list_tasks(state)}
        except ValueError as exc:
            raise HTTPException(400, detail=str(exc)) from exc

    @app.get("/tasks/{dialogue_id}")
    def get_task(dialogue_id: str):
        try:
            return store.get_task(dialogue_id).as_dict()
        except NotFoundError as exc:
            raise HTTPException(404, detail=str(exc)) from exc

    @app.post("/tasks/{dialogue_id}/claim")
    def claim_task(
        dialogue_id: str, x_annotator: Optional[str] = Header(default=None)
    ):
        annotator = _annotator(x_annotator)
        try:
            return store.claim(dialogue_id, annotator).as_dict()
        except NotFoundError as exc:
            raise HTTPException(404, detail=str(exc)) from exc
        except ConflictError as exc:
            raise HTTPException(409, detail=str(exc)) from exc

    @app.put("/tasks/{dialogue_id}")
    def submit_edit(
        dialogue_id: str,
        body: SubmissionBody,
        x_annotator: Optional[str] = Header(default=None),
    ):
        annotator = _annotator(x_annotator)
        submission = EditSubmission(
            dialogue_id=dialogue_id,
            base_version=body.base_version,
            annotator=annotator,
            seconds=body.seconds,
            turns=tuple((t.speaker, t.text) for t in body.turns),
        )
        try:
            store.submit(submission)
        except NotFoundError as exc:
            raise HTTPException(404, detail=str(exc)) from exc
        except ConflictError as exc:
            raise HTTPException(409, detail=str(exc)) from exc
        except RejectionError as exc:
            raise HTTPException(422, detail=_violations_payload(exc)) from exc
        return store.get_task(dialogue_id).as_dict()

    @app.post("/tasks/{dialogue_id}/delete")
    def delete_dialogue(
        dialogue_id: str,
        body: DeleteBody,
        x_annotator: Optional[str] = Header(default=None),
    ):
        annotator = _annotator(x_annotator)
        try:
            store.delete_dialogue(
                dialogue_id, annotator, body.base_version, body.seconds
            )
        except NotFoundError as exc:
            raise HTTPException(404, detail=str(exc)) from exc
        except ConflictError as exc:
            raise HTTPException(409, detail=str(exc)) from exc
        return store.get_task(dialogue_id).as_dict()

    @app.get("/report")
    def report():
        return store.live_report()

    @app.get("/export")
    def export():
        return Response(
            content=store.export_jsonl(), media_type="application/x-ndjson"
        )

    @app.get("/rules")
    def rules():
        return {
            "rules": guideline_rules(),
            "hter_goldens": _shared_fixture("hter_goldens.json"),
            "validation_cases": _shared_fixture("validation_cases.json"),
        }

    return app
