"""HTTP facade over the diagnosis pipeline.

Endpoints: POST /v1/diagnose, GET /v1/rules?fired_for=<id>,
POST /v1/patients/batch (CSV), POST /v1/eval (CSV), GET /v1/kb, GET /healthz.

The knowledge base is loaded once at startup; every diagnosis is a pure
function of it plus the request body. Diagnoses are persisted to an
append-only JSONL store whose entry ids key the rule-trace endpoint.
"""

from __future__ import annotations

import uuid
from typing import Literal

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .cohort import CsvError, evaluate_cohort, parse_batch_csv, parse_eval_csv
from .fuzzy import DEFAULT_RESOLUTION, MIN_RESOLUTION, OutOfUniverse
from .kb import INPUT_ORDER, DiagnosisReport, PatientRecord, recommend_dosage
from .reports import ENV_KB, record_doc, report_doc, resolve_kb
from .rules import infer
from .session import DiagnosisSession
from .store import DiagnosisStore, StoreError

DEFAULT_STORE = "fuzzcare-store.jsonl"

__all__ = ["ENV_KB", "DEFAULT_STORE", "create_app", "PatientIn"]


class PatientIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ecg: float = Field(allow_inf_nan=False)
    chest_pain: float = Field(allow_inf_nan=False)
    blood_sugar: float = Field(allow_inf_nan=False)
    cholesterol: float = Field(allow_inf_nan=False)
    blood_pressure: float = Field(allow_inf_nan=False)
    age: float = Field(gt=0, allow_inf_nan=False)
    heart_rate: float = Field(allow_inf_nan=False)
    gender: Literal["male", "female", "unspecified"] = "unspecified"


def _universe_error(e: OutOfUniverse) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={
            "detail": [
                {
                    "loc": ["body", e.variable],
                    "msg": str(e),
                    "type": "value_error.out_of_universe",
                }
            ]
        },
    )


def _row_errors(e: CsvError) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={
            "detail": {
                "rows": [{"row": r.row, "message": r.message} for r in e.errors]
            }
        },
    )


def create_app(
    kb_path: str | None = None,
    store_path: str | None = None,
    resolution: int = DEFAULT_RESOLUTION,
) -> FastAPI:
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_RESOLUTION}, got {resolution}")
    kb = resolve_kb(kb_path)
    base = kb.rule_base
    store = DiagnosisStore(store_path or DEFAULT_STORE)

    app = FastAPI(title="fuzzcare diagnosis service", version=kb.version)
    app.state.kb = kb
    app.state.store = store

    def run_diagnosis(record: PatientRecord) -> tuple[DiagnosisReport, dict]:
        """Session-driven pipeline; the result flag flips only after the
        recommendation step."""
        session = DiagnosisSession(id=uuid.uuid4().hex)
        for name in INPUT_ORDER:
            session.collect(name, getattr(record, name))
        session.collect("gender", record.gender)
        checked = session.record()
        fuzzified = kb.fuzzify_record(checked)
        trace = infer(base, fuzzified, resolution=resolution)
        session.mark_diagnosed()
        report = DiagnosisReport(
            label=trace.label,
            score=trace.score,
            trace=trace,
            dosage=recommend_dosage(trace.label),
            kb_version=kb.version,
            result=False,
        )
        session.mark_recommended(report)
        doc = report_doc(report)
        doc["result"] = session.result
        session.close()
        return report, doc

    def persist(record: PatientRecord, doc: dict) -> str:
        return store.append(record_doc(record), doc, kb.version)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "kb_version": kb.version}

    @app.get("/v1/kb")
    def kb_document():
        return kb.to_document()

    @app.post("/v1/diagnose")
    def diagnose(patient: PatientIn):
        record = PatientRecord(**patient.model_dump())
        try:
            _, doc = run_diagnosis(record)
        except OutOfUniverse as e:
            return _universe_error(e)
        try:
            entry_id = persist(record, doc)
        except StoreError as e:
            return JSONResponse(status_code=503, content={"detail": str(e)})
        return {"id": entry_id, **doc}

    @app.get("/v1/rules")
    def fired_rules(fired_for: str = Query(...)):
        entry = store.get(fired_for)
        if entry is None:
            return JSONResponse(
                status_code=404,
                content={"detail": f"no stored diagnosis {fired_for!r}"},
            )
        return {
            "fired_for": fired_for,
            "kb_version": entry["kb_version"],
            "trace": entry["report"]["trace"],
        }

    @app.post("/v1/patients/batch")
    async def batch(request: Request):
        text = (await request.body()).decode("utf-8")
        try:
            records = parse_batch_csv(text, kb)
        except CsvError as e:
            return _row_errors(e)
        out = []
        for record in records:
            _, doc = run_diagnosis(record)  # in-universe: parse checked it
            try:
                entry_id = persist(record, doc)
            except StoreError as e:
                return JSONResponse(status_code=503, content={"detail": str(e)})
            out.append({"id": entry_id, **doc})
        return out

    @app.post("/v1/eval")
    async def eval_cohort(request: Request):
        text = (await request.body()).decode("utf-8")
        try:
            rows = parse_eval_csv(text, kb)
        except CsvError as e:
            return _row_errors(e)
        result = evaluate_cohort(kb, base, rows, resolution=resolution)
        return result.to_doc()

    return app
