"""CSV ingestion and the cohort evaluation harness.

Shared by the HTTP service and the CLI so both speak exactly the same file
formats: a batch CSV carries the seven measurement columns (plus optional
gender), an eval CSV adds expected_label and optionally probability.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

from .fuzzy import DEFAULT_RESOLUTION, OutOfUniverse
from .kb import (
    GENDERS,
    INPUT_ORDER,
    KnowledgeBase,
    PatientRecord,
    evaluate_crisp,
)
from .rules import RuleBase

BATCH_COLUMNS = INPUT_ORDER
EVAL_REQUIRED = "expected_label"
EVAL_OPTIONAL = "probability"


@dataclass(frozen=True)
class RowError:
    row: int  # 1-based data-row number (header not counted)
    message: str


class CsvError(ValueError):
    """Carrier for per-row validation failures; nothing was processed."""

    def __init__(self, errors: Sequence[RowError]):
        super().__init__("; ".join(f"row {e.row}: {e.message}" for e in errors))
        self.errors = list(errors)


@dataclass(frozen=True)
class EvalRow:
    record: PatientRecord
    expected: str
    probability: float | None


@dataclass(frozen=True)
class EvalResultRow:
    row: int
    record: PatientRecord
    expected: str
    produced: str
    match: bool
    probability: float | None


@dataclass(frozen=True)
class EvalResult:
    rows: tuple[EvalResultRow, ...]
    n: int
    matches: int
    agreement: float | None
    mean_probability: float | None
    binary_matches: int
    binary_agreement: float | None

    def to_doc(self) -> dict:
        return {
            "rows": [
                {
                    "row": r.row,
                    "record": {**r.record.values(), "gender": r.record.gender},
                    "expected": r.expected,
                    "produced": r.produced,
                    "match": r.match,
                    "probability": r.probability,
                }
                for r in self.rows
            ],
            "summary": {
                "n": self.n,
                "matches": self.matches,
                "agreement": self.agreement,
                "mean_probability": self.mean_probability,
                "binary_matches": self.binary_matches,
                "binary_agreement": self.binary_agreement,
            },
        }


def _check_header(got: Sequence[str] | None, want_fixed: tuple[str, ...], optional_tail: tuple[str, ...]):
    got = [c.strip() for c in (got or [])]
    fixed = list(want_fixed)
    if got[: len(fixed)] != fixed:
        raise CsvError([RowError(0, f"header must start with {','.join(fixed)}")])
    tail = got[len(fixed):]
    allowed = list(optional_tail)
    # optional columns must appear in order, without strangers
    idx = 0
    for col in tail:
        while idx < len(allowed) and allowed[idx] != col:
            idx += 1
        if idx >= len(allowed):
            raise CsvError([RowError(0, f"unexpected column {col!r}")])
        idx += 1
    return got


def _parse_record(row: dict, row_no: int, errors: list[RowError]) -> PatientRecord | None:
    values = {}
    for name in INPUT_ORDER:
        raw = (row.get(name) or "").strip()
        try:
            values[name] = float(raw)
        except ValueError:
            errors.append(RowError(row_no, f"{name}: not a number: {raw!r}"))
            return None
    gender = (row.get("gender") or "").strip() or "unspecified"
    if gender not in GENDERS:
        errors.append(RowError(row_no, f"gender must be one of {GENDERS}"))
        return None
    try:
        return PatientRecord(**values, gender=gender)
    except ValueError as e:
        errors.append(RowError(row_no, str(e)))
        return None


def parse_batch_csv(text: str, kb: KnowledgeBase) -> list[PatientRecord]:
    """All-or-nothing: any bad row raises CsvError naming every bad row."""
    reader = csv.DictReader(io.StringIO(text))
    _check_header(reader.fieldnames, BATCH_COLUMNS, ("gender",))
    records = []
    errors: list[RowError] = []
    for row_no, row in enumerate(reader, start=1):
        record = _parse_record(row, row_no, errors)
        if record is None:
            continue
        try:
            kb.fuzzify_record(record)
        except OutOfUniverse as e:
            errors.append(RowError(row_no, str(e)))
            continue
        records.append(record)
    if errors:
        raise CsvError(errors)
    return records


def parse_eval_csv(text: str, kb: KnowledgeBase) -> list[EvalRow]:
    reader = csv.DictReader(io.StringIO(text))
    _check_header(
        reader.fieldnames, BATCH_COLUMNS, ("gender", EVAL_REQUIRED, EVAL_OPTIONAL)
    )
    if EVAL_REQUIRED not in (reader.fieldnames or []):
        raise CsvError([RowError(0, f"missing required column {EVAL_REQUIRED!r}")])
    rows = []
    errors: list[RowError] = []
    labels = kb.output.term_labels
    for row_no, row in enumerate(reader, start=1):
        record = _parse_record(row, row_no, errors)
        if record is None:
            continue
        try:
            kb.fuzzify_record(record)
        except OutOfUniverse as e:
            errors.append(RowError(row_no, str(e)))
            continue
        expected = (row.get(EVAL_REQUIRED) or "").strip()
        if expected not in labels:
            errors.append(
                RowError(row_no, f"expected_label must be one of {labels}")
            )
            continue
        raw_prob = (row.get(EVAL_OPTIONAL) or "").strip()
        probability = None
        if raw_prob:
            try:
                probability = float(raw_prob)
            except ValueError:
                errors.append(RowError(row_no, f"probability: not a number: {raw_prob!r}"))
                continue
            if not 0.0 <= probability <= 1.0:
                errors.append(RowError(row_no, "probability must be in [0, 1]"))
                continue
        rows.append(EvalRow(record, expected, probability))
    if errors:
        raise CsvError(errors)
    return rows


def binary_class(label: str, labels: Sequence[str]) -> str:
    """Two-way reading of the three levels: the lowest maps to 'Normal',
    everything above it to 'Heart Disease found'."""
    return "Normal" if label == labels[0] else "Heart Disease found"


def evaluate_cohort(
    kb: KnowledgeBase,
    base: RuleBase,
    rows: Sequence[EvalRow],
    resolution: int = DEFAULT_RESOLUTION,
) -> EvalResult:
    labels = kb.output.term_labels
    out_rows = []
    for i, row in enumerate(rows, start=1):
        report = evaluate_crisp(base, kb, row.record, resolution=resolution)
        out_rows.append(
            EvalResultRow(
                row=i,
                record=row.record,
                expected=row.expected,
                produced=report.label,
                match=report.label == row.expected,
                probability=row.probability,
            )
        )
    n = len(out_rows)
    matches = sum(r.match for r in out_rows)
    probs = [r.probability for r in out_rows if r.probability is not None]
    binary = sum(
        binary_class(r.produced, labels) == binary_class(r.expected, labels)
        for r in out_rows
    )
    return EvalResult(
        rows=tuple(out_rows),
        n=n,
        matches=matches,
        agreement=(matches / n) if n else None,
        mean_probability=(sum(probs) / len(probs)) if probs else None,
        binary_matches=binary,
        binary_agreement=(binary / n) if n else None,
    )
