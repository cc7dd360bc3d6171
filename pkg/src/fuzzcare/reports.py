"""JSON-ready dict views of records, traces, and reports.

Shared by the HTTP service and the CLI json output so both emit exactly the
same shapes; kept free of web-framework imports so the CLI stays light.
"""

from __future__ import annotations

import os

from . import dsl
from .kb import (
    INPUT_ORDER,
    DiagnosisReport,
    KnowledgeBase,
    PatientRecord,
    load_default_kb,
    load_kb,
)
from .rules import PINNED, InferenceTrace

ENV_KB = "FUZZCARE_KB"


def resolve_kb(kb_path: str | None) -> KnowledgeBase:
    """FUZZCARE_KB wins over the explicit path; bundled default otherwise."""
    path = os.environ.get(ENV_KB) or kb_path
    return load_kb(path) if path else load_default_kb()


def record_doc(record: PatientRecord) -> dict:
    doc = {name: getattr(record, name) for name in INPUT_ORDER}
    doc["gender"] = record.gender
    return doc


def trace_doc(trace: InferenceTrace) -> dict:
    return {
        "fired": [
            {
                "id": f.rule.id,
                "text": dsl.render_rule(f.rule, annotate=False),
                "strength": f.strength,
                "consequent": f.rule.consequent[1],
                "pinned": f.rule.provenance == PINNED,
            }
            for f in trace.fired
        ],
        "aggregated": [
            {"term": c.term, "height": c.height} for c in trace.aggregated.clipped
        ],
        "score": trace.score,
        "label": trace.label,
    }


def report_doc(report: DiagnosisReport) -> dict:
    return {
        "result": report.result,
        "label": report.label,
        "score": report.score,
        "kb_version": report.kb_version,
        "dosage": {
            "level": report.dosage.level,
            "guidance": report.dosage.guidance,
            "disclaimer": report.dosage.disclaimer,
        },
        "trace": trace_doc(report.trace),
    }
