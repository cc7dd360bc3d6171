"""The cardiology knowledge base: seven clinical input variables, the
disease-level output, pinned expert rules, the severity consequent policy,
dosage-level recommendations, validation, and cohort calibration.

Variables are shouldered Ruspini partitions described by one center per term:
the lowest/highest terms are shouldered trapezoids, interior terms triangles.
At every point of a universe the term degrees sum to 1, so coverage holds by
construction and a crisp value at a term center belongs to that term alone.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from . import dsl
from .fuzzy import (
    DEFAULT_RESOLUTION,
    TRAPEZOIDAL,
    FuzzifiedValue,
    FuzzySet,
    LinguisticVariable,
    MembershipFunction,
    Universe,
)
from .rules import (
    Antecedent,
    InferenceTrace,
    Rule,
    RuleBase,
    UnknownTerm,
    UnknownVariable,
    generate_rule_base,
    infer,
    rule_space_size,
    select_label,
)

KB_VERSION = "1.0.0"
POLICY_ID = "severity-weighted-mean/v1"

INPUT_ORDER = (
    "ecg",
    "chest_pain",
    "blood_sugar",
    "cholesterol",
    "blood_pressure",
    "age",
    "heart_rate",
)
OUTPUT_NAME = "disease_level"

TERMS = {
    "ecg": ("Normal", "Medium", "High"),
    "chest_pain": ("Normal", "AtypicalAngina", "TypicalAngina"),
    "blood_sugar": ("Low", "Normal", "Medium", "High"),
    "cholesterol": ("Normal", "Medium", "High"),
    "blood_pressure": ("Low", "Medium", "High"),
    "age": ("Young", "Adult", "Aged", "Old"),
    "heart_rate": ("Low", "Medium", "High"),
    OUTPUT_NAME: ("Low", "Medium", "High"),
}

# In declared variable order: age carries 4 terms, heart rate 3.
EXPECTED_TERM_COUNTS = (3, 3, 4, 3, 3, 4, 3)

# blood_sugar units: the source cohort labels the column mmol/L although the
# values are on a mg/dL-like scale; stored as received, flagged unverified.
UNIVERSES = {
    "ecg": (0.0, 4.0, "mm/sec"),
    "chest_pain": (0.0, 4.0, "ETT"),
    "blood_sugar": (40.0, 400.0, "mmol/L"),
    "cholesterol": (50.0, 400.0, "mg/dL"),
    "blood_pressure": (50.0, 220.0, "mmHg"),
    "age": (0.0, 120.0, "year"),
    "heart_rate": (30.0, 220.0, "bpm"),
    OUTPUT_NAME: (0.0, 10.0, "risk"),
}

# Centers fixed by clinical reference ranges, never searched by calibrate:
# cholesterol at the midpoints of the normal / high / very-high lab bands,
# blood pressure at the systolic normal-low / normal-high / hypertension marks.
ANCHORED_CENTERS = {
    "cholesterol": (114.5, 144.5, 174.5),
    "blood_pressure": (90.0, 120.0, 140.0),
}
OUTPUT_CENTERS = (2.5, 5.0, 7.5)

FREE_VARIABLES = ("ecg", "chest_pain", "blood_sugar", "age", "heart_rate")

# Candidate center grids for the calibration search, per free variable:
# (first, last, step) inclusive. Coarse on purpose; enumeration order is the
# sorted combination order, which keeps the search seed-free.
SEARCH_GRIDS = {
    "ecg": (0.25, 3.75, 0.25),
    "chest_pain": (0.25, 3.75, 0.25),
    "blood_sugar": (60.0, 380.0, 20.0),
    "age": (10.0, 110.0, 10.0),
    "heart_rate": (40.0, 210.0, 10.0),
}
MAX_SWEEPS = 4

PINNED_RULES_TEXT = """\
IF ecg IS Medium AND chest_pain IS TypicalAngina AND blood_sugar IS Normal AND cholesterol IS Medium AND blood_pressure IS High AND age IS Young AND heart_rate IS Medium THEN disease_level IS High  # pinned
IF ecg IS Normal AND chest_pain IS Normal AND blood_sugar IS Medium AND cholesterol IS Medium AND blood_pressure IS Medium AND age IS Young AND heart_rate IS Medium THEN disease_level IS Medium  # pinned
IF ecg IS Medium AND chest_pain IS Normal AND blood_sugar IS Medium AND cholesterol IS Medium AND blood_pressure IS Medium AND age IS Young AND heart_rate IS Medium THEN disease_level IS Medium  # pinned
IF ecg IS Normal AND chest_pain IS Normal AND blood_sugar IS Normal AND cholesterol IS Normal AND blood_pressure IS High AND age IS Young AND heart_rate IS Medium THEN disease_level IS Low  # pinned
IF ecg IS Medium AND chest_pain IS AtypicalAngina AND blood_sugar IS Normal AND cholesterol IS Medium AND blood_pressure IS High AND age IS Aged AND heart_rate IS Medium THEN disease_level IS High  # pinned
IF ecg IS High AND chest_pain IS AtypicalAngina AND blood_sugar IS Normal AND cholesterol IS Medium AND blood_pressure IS High AND age IS Aged AND heart_rate IS Medium THEN disease_level IS High  # pinned
IF ecg IS Medium AND chest_pain IS Normal AND blood_sugar IS Medium AND cholesterol IS Medium AND blood_pressure IS High AND age IS Aged AND heart_rate IS Medium THEN disease_level IS Medium  # pinned
"""

GENDERS = ("male", "female", "unspecified")

DOSAGE_DISCLAIMER = (
    "Advisory output only: medication selection and dosing remain the "
    "treating physician's decision."
)
DOSAGE_GUIDANCE = {
    "Low": (
        "Routine monitoring; maintain current management and reassess at the "
        "next scheduled visit."
    ),
    "Medium": (
        "Arrange follow-up testing and review current therapy; consider a "
        "dosage review with the treating physician."
    ),
    "High": (
        "Expedite specialist referral; initiate or adjust treatment per the "
        "attending physician."
    ),
}


class KnowledgeBaseError(Exception):
    pass


class CalibrationFailed(KnowledgeBaseError):
    """The grid search could not reach the minimum cohort agreement."""


@dataclass(frozen=True)
class PatientRecord:
    """Seven crisp measurements; gender is stored but never used by rules."""

    ecg: float
    chest_pain: float
    blood_sugar: float
    cholesterol: float
    blood_pressure: float
    age: float
    heart_rate: float
    gender: str = "unspecified"

    def __post_init__(self):
        for name in INPUT_ORDER:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.age <= 0:
            raise ValueError(f"age must be positive, got {self.age}")
        if self.gender not in GENDERS:
            raise ValueError(f"gender must be one of {GENDERS}, got {self.gender!r}")

    def values(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in INPUT_ORDER}


@dataclass(frozen=True)
class DosageRecommendation:
    level: str
    guidance: str
    disclaimer: str


@dataclass(frozen=True)
class DiagnosisReport:
    """Risk label, crisp score, full firing trace, and dosage advice."""

    label: str
    score: float
    trace: InferenceTrace
    dosage: DosageRecommendation
    kb_version: str
    result: bool = True


@dataclass(frozen=True)
class ConsequentPolicy:
    """Severity policy parameters: per-input weights and the two thresholds
    splitting the weighted mean severity into Low / Medium / High."""

    id: str
    weights: tuple[Fraction, ...]
    thresholds: tuple[Fraction, Fraction]

    def __post_init__(self):
        low, high = self.thresholds
        if not low < high:
            raise ValueError(f"thresholds must increase, got {self.thresholds}")


def default_policy() -> ConsequentPolicy:
    return ConsequentPolicy(
        id=POLICY_ID,
        weights=tuple(Fraction(1) for _ in INPUT_ORDER),
        thresholds=(Fraction(1, 3), Fraction(2, 3)),
    )


@dataclass(frozen=True)
class KnowledgeBase:
    """Input variables, output variable, pinned rules, and policy parameters."""

    inputs: tuple[LinguisticVariable, ...]
    output: LinguisticVariable
    pinned_rules: tuple[Rule, ...]
    policy: ConsequentPolicy
    version: str
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "pinned_rules", tuple(self.pinned_rules))

    def variable(self, name: str) -> LinguisticVariable:
        for v in self.inputs:
            if v.name == name:
                return v
        if name == self.output.name:
            return self.output
        raise UnknownVariable(f"knowledge base has no variable {name!r}")

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.inputs)

    def term_counts(self) -> tuple[int, ...]:
        return tuple(len(v.terms) for v in self.inputs)

    def severity_policy(self, antecedent: Antecedent) -> str:
        return severity_policy(self, antecedent)

    @cached_property
    def _policy_table(self) -> "_PolicyTable":
        return _PolicyTable(self)

    @cached_property
    def rule_base(self) -> RuleBase:
        return generate_rule_base(
            self.inputs, self.output, self.severity_policy, self.pinned_rules
        )

    def fuzzify_record(
        self, record: PatientRecord, clamp: bool = False
    ) -> dict[str, FuzzifiedValue]:
        return {
            v.name: v.fuzzify(getattr(record, v.name), clamp=clamp)
            for v in self.inputs
        }

    def to_document(self) -> dict:
        return {
            "version": self.version,
            "provenance": self.provenance,
            "variables": [_variable_doc(v) for v in self.inputs],
            "output": _variable_doc(self.output),
            "pinned_rules": dsl.render_rules(self.pinned_rules),
            "policy": {
                "id": self.policy.id,
                "weights": [str(w) for w in self.policy.weights],
                "thresholds": [str(t) for t in self.policy.thresholds],
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2) + "\n"

    @classmethod
    def from_document(cls, doc: dict) -> "KnowledgeBase":
        inputs = tuple(_variable_from_doc(d) for d in doc["variables"])
        output = _variable_from_doc(doc["output"])
        pinned = tuple(dsl.parse_rules(doc["pinned_rules"]))
        policy = ConsequentPolicy(
            id=doc["policy"]["id"],
            weights=tuple(Fraction(w) for w in doc["policy"]["weights"]),
            thresholds=tuple(Fraction(t) for t in doc["policy"]["thresholds"]),
        )
        kb = cls(
            inputs=inputs,
            output=output,
            pinned_rules=pinned,
            policy=policy,
            version=doc["version"],
            provenance=doc.get("provenance", ""),
        )
        bind_rules(pinned, kb)
        return kb


def _variable_doc(v: LinguisticVariable) -> dict:
    return {
        "name": v.name,
        "units": v.universe.units,
        "universe": [v.universe.lo, v.universe.hi],
        "terms": [
            {"label": t.term, "kind": t.mf.kind, "params": list(t.mf.params)}
            for t in v.terms
        ],
    }


def _variable_from_doc(doc: dict) -> LinguisticVariable:
    universe = Universe(doc["universe"][0], doc["universe"][1], doc["units"])
    terms = tuple(
        FuzzySet(t["label"], MembershipFunction(t["kind"], tuple(t["params"])), universe)
        for t in doc["terms"]
    )
    return LinguisticVariable(doc["name"], universe, terms)


def bind_rules(rules: Iterable[Rule], kb: KnowledgeBase) -> tuple[Rule, ...]:
    """Check that every clause resolves against the knowledge base."""
    rules = tuple(rules)
    for rule in rules:
        for var, term in rule.antecedent.clauses:
            v = kb.variable(var)
            if term not in v.term_labels:
                raise UnknownTerm(
                    f"rule {rule.id}: variable {var!r} has no term {term!r}"
                )
        out_var, out_term = rule.consequent
        if out_var != kb.output.name:
            raise UnknownVariable(
                f"rule {rule.id} targets {out_var!r}, not {kb.output.name!r}"
            )
        if out_term not in kb.output.term_labels:
            raise UnknownTerm(f"rule {rule.id} uses unknown term {out_term!r}")
    return rules


def variable_from_centers(
    name: str,
    universe: Universe,
    labels: Sequence[str],
    centers: Sequence[float],
) -> LinguisticVariable:
    """Build a shouldered partition from one center per term."""
    labels = tuple(labels)
    centers = tuple(float(c) for c in centers)
    if len(centers) != len(labels):
        raise ValueError(f"{name}: {len(labels)} terms need {len(labels)} centers")
    if any(q <= p for p, q in zip(centers, centers[1:])):
        raise ValueError(f"{name}: centers must strictly increase, got {centers}")
    if centers and (centers[0] <= universe.lo or centers[-1] >= universe.hi):
        raise ValueError(f"{name}: centers must lie inside the universe")
    m = len(labels)
    sets = []
    for i, label in enumerate(labels):
        if m == 1:
            mf = MembershipFunction.trapezoidal(
                universe.lo, universe.lo, universe.hi, universe.hi
            )
        elif i == 0:
            mf = MembershipFunction.trapezoidal(
                universe.lo, universe.lo, centers[0], centers[1]
            )
        elif i == m - 1:
            mf = MembershipFunction.trapezoidal(
                centers[m - 2], centers[m - 1], universe.hi, universe.hi
            )
        else:
            mf = MembershipFunction.triangular(
                centers[i - 1], centers[i], centers[i + 1]
            )
        sets.append(FuzzySet(label, mf, universe))
    return LinguisticVariable(name, universe, tuple(sets))


def partition_centers(v: LinguisticVariable) -> tuple[float, ...]:
    """Recover the per-term centers of a shouldered partition."""
    centers = []
    m = len(v.terms)
    for i, t in enumerate(v.terms):
        if i == 0 and m > 1:
            if t.mf.kind != TRAPEZOIDAL:
                raise ValueError(f"{v.name}: first term is not a left shoulder")
            centers.append(t.mf.params[2])
        else:
            centers.append(t.mf.params[1])
    return tuple(centers)


def _make_universe(name: str) -> Universe:
    lo, hi, units = UNIVERSES[name]
    return Universe(lo, hi, units)


def _equal_spacing_ideal(name: str) -> tuple[float, ...]:
    lo, hi, _ = UNIVERSES[name]
    m = len(TERMS[name])
    return tuple(lo + (i + 1) * (hi - lo) / (m + 1) for i in range(m))


def _grid_values(name: str) -> tuple[float, ...]:
    first, last, step = SEARCH_GRIDS[name]
    n = int(round((last - first) / step)) + 1
    return tuple(first + i * step for i in range(n))


def _snap_to_grid(name: str) -> tuple[float, ...]:
    """Grid candidate closest to equal spacing (the pre-calibration default)."""
    values = _grid_values(name)
    out = []
    for ideal in _equal_spacing_ideal(name):
        best = min(values, key=lambda v: (abs(v - ideal), v))
        # keep strict ordering by bumping forward if needed
        while out and best <= out[-1]:
            nxt = [v for v in values if v > out[-1]]
            if not nxt:
                raise ValueError(f"{name}: grid too small for distinct centers")
            best = nxt[0]
        out.append(best)
    return tuple(out)


def build_anchored_kb() -> KnowledgeBase:
    """The pre-calibration knowledge base: clinically anchored cholesterol and
    blood-pressure centers, equal-spacing defaults everywhere else."""
    inputs = []
    for name in INPUT_ORDER:
        universe = _make_universe(name)
        if name in ANCHORED_CENTERS:
            centers = ANCHORED_CENTERS[name]
        else:
            centers = _snap_to_grid(name)
        inputs.append(variable_from_centers(name, universe, TERMS[name], centers))
    output = variable_from_centers(
        OUTPUT_NAME, _make_universe(OUTPUT_NAME), TERMS[OUTPUT_NAME], OUTPUT_CENTERS
    )
    kb = KnowledgeBase(
        inputs=tuple(inputs),
        output=output,
        pinned_rules=tuple(dsl.parse_rules(PINNED_RULES_TEXT)),
        policy=default_policy(),
        version=KB_VERSION,
        provenance="anchored defaults; not yet calibrated",
    )
    bind_rules(kb.pinned_rules, kb)
    return kb


class _PolicyTable:
    """Integer form of the severity policy for one knowledge base.

    The weighted mean of normalized severities is a rational; scaling every
    per-term contribution and both threshold bounds by one common denominator
    turns each policy call into integer sums and compares, which keeps exact
    boundary behavior while being fast enough to label all 3888 antecedents.
    """

    def __init__(self, kb: "KnowledgeBase"):
        weights = dict(zip(kb.input_names, kb.policy.weights))
        contributions: dict[str, dict[str, Fraction]] = {}
        weight_sum = Fraction(0)
        for v in kb.inputs:
            w = weights.get(v.name, Fraction(1))
            weight_sum += w
            m = len(v.terms)
            contributions[v.name] = {
                t.term: w * (Fraction(i, m - 1) if m > 1 else Fraction(0))
                for i, t in enumerate(v.terms)
            }
        low, high = kb.policy.thresholds
        bound_low = low * weight_sum
        bound_high = high * weight_sum
        denom = math.lcm(
            bound_low.denominator,
            bound_high.denominator,
            *(
                c.denominator
                for per_var in contributions.values()
                for c in per_var.values()
            ),
        )
        self.scaled = {
            var: {term: int(c * denom) for term, c in per_var.items()}
            for var, per_var in contributions.items()
        }
        self.bound_low = int(bound_low * denom)
        self.bound_high = int(bound_high * denom)
        self.labels = kb.output.term_labels

    def label(self, antecedent: Antecedent) -> str:
        total = 0
        for var, term in antecedent.clauses:
            try:
                total += self.scaled[var][term]
            except KeyError:
                raise UnknownTerm(f"no severity for {var!r} IS {term!r}") from None
        if total <= self.bound_low:
            return self.labels[0]
        if total <= self.bound_high:
            return self.labels[1]
        return self.labels[2]


def severity_policy(kb: KnowledgeBase, antecedent: Antecedent) -> str:
    """Weighted mean of normalized term severities, cut at the thresholds.

    Each clause contributes its term's 0-based severity position normalized to
    [0, 1]; the mean falls in [0, 1] and the thresholds are inclusive upper
    bounds of the Low and Medium bins. Exact rational arithmetic keeps
    boundary antecedents deterministic.
    """
    return kb._policy_table.label(antecedent)


def recommend_dosage(label: str) -> DosageRecommendation:
    """Fixed mapping from a disease-level label to advisory dosage guidance."""
    if label not in DOSAGE_GUIDANCE:
        raise ValueError(f"unknown disease level {label!r}")
    return DosageRecommendation(
        level=label, guidance=DOSAGE_GUIDANCE[label], disclaimer=DOSAGE_DISCLAIMER
    )


def evaluate_crisp(
    base: RuleBase,
    kb: KnowledgeBase,
    record: PatientRecord,
    resolution: int = DEFAULT_RESOLUTION,
    clamp: bool = False,
) -> DiagnosisReport:
    """Fuzzify a patient record, infer, and attach the dosage recommendation."""
    fuzzified = kb.fuzzify_record(record, clamp=clamp)
    trace = infer(base, fuzzified, resolution=resolution)
    return DiagnosisReport(
        label=trace.label,
        score=trace.score,
        trace=trace,
        dosage=recommend_dosage(trace.label),
        kb_version=kb.version,
    )


# --- bundled data -----------------------------------------------------------


def _data_text(filename: str) -> str:
    return resources.files("fuzzcare.data").joinpath(filename).read_text("utf-8")


def default_kb_json() -> str:
    return _data_text("default_kb.json")


def load_default_kb() -> KnowledgeBase:
    """The shipped calibrated knowledge base."""
    return KnowledgeBase.from_document(json.loads(default_kb_json()))


def load_kb(path) -> KnowledgeBase:
    with open(path, "r", encoding="utf-8") as f:
        return KnowledgeBase.from_document(json.load(f))


@dataclass(frozen=True)
class CohortRow:
    record: PatientRecord
    expected: str
    probability: float | None = None


def bundled_cohort_csv() -> str:
    return _data_text("table2.csv")


def bundled_cohort() -> list[CohortRow]:
    rows = []
    reader = csv.DictReader(io.StringIO(bundled_cohort_csv()))
    for row in reader:
        record = PatientRecord(**{k: float(row[k]) for k in INPUT_ORDER})
        prob = row.get("probability", "")
        rows.append(
            CohortRow(
                record=record,
                expected=row["expected_label"],
                probability=float(prob) if prob else None,
            )
        )
    return rows


# --- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    check: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    findings: tuple[Finding, ...]


def validate_kb(kb: KnowledgeBase, coverage_samples: int = 2001) -> ValidationReport:
    """Structural checks; failures are findings, never exceptions."""
    findings: list[Finding] = []

    def check(name: str, ok: bool, detail: str):
        findings.append(Finding(name, ok, detail))

    names = kb.input_names
    check(
        "input-variables",
        names == INPUT_ORDER,
        f"expected {INPUT_ORDER}, got {names}",
    )
    counts = kb.term_counts()
    check(
        "term-counts",
        counts == EXPECTED_TERM_COUNTS,
        f"expected {EXPECTED_TERM_COUNTS}, got {counts}",
    )
    check(
        "rule-space",
        rule_space_size(counts) == rule_space_size(EXPECTED_TERM_COUNTS),
        f"rule space {rule_space_size(counts)}",
    )
    out_labels = kb.output.term_labels
    check(
        "output-terms",
        out_labels == TERMS[OUTPUT_NAME]
        and (kb.output.universe.lo, kb.output.universe.hi) == (0.0, 10.0),
        f"output terms {out_labels} on "
        f"[{kb.output.universe.lo}, {kb.output.universe.hi}]",
    )

    for v in list(kb.inputs) + [kb.output]:
        xs = v.universe.grid(coverage_samples)
        total = np.maximum.reduce([t.sample(xs) for t in v.terms])
        gaps = int((total <= 0.0).sum())
        check(
            f"coverage:{v.name}",
            gaps == 0,
            "every universe point has a nonzero term"
            if gaps == 0
            else f"{gaps} of {coverage_samples} sample points uncovered",
        )

    try:
        cohort = bundled_cohort()
    except Exception as e:  # bundled data missing only in broken installs
        cohort = []
        check("cohort-data", False, f"bundled cohort unreadable: {e}")
    if cohort and names == INPUT_ORDER:
        in_universe = True
        detail = "all cohort values inside their universes"
        for i, row in enumerate(cohort, start=1):
            for name, value in row.record.values().items():
                if not kb.variable(name).universe.contains(value):
                    in_universe = False
                    detail = f"cohort row {i}: {name}={value} outside universe"
        check("cohort-in-universe", in_universe, detail)

    try:
        bind_rules(kb.pinned_rules, kb)
        check("pinned-rules-bind", True, f"{len(kb.pinned_rules)} pinned rules bind")
    except (UnknownVariable, UnknownTerm) as e:
        check("pinned-rules-bind", False, str(e))

    disagreements = 0
    try:
        for rule in kb.pinned_rules:
            if kb.severity_policy(rule.antecedent) != rule.consequent[1]:
                disagreements += 1
        check(
            "policy-vs-pinned",
            True,
            f"{disagreements} of {len(kb.pinned_rules)} pinned consequents differ "
            "from the severity policy (pins win; informational)",
        )
    except (UnknownVariable, UnknownTerm):
        pass  # reported by pinned-rules-bind

    return ValidationReport(all(f.ok for f in findings), tuple(findings))


# --- calibration ------------------------------------------------------------


class _FastScorer:
    """Cohort labeler reusing one compiled rule base across center candidates.

    Consequents depend only on term order, never on breakpoints, so the rule
    base is fixed for the whole search; candidates change only the per-variable
    degree vectors. Scanning one variable holds the other six fixed, so their
    clause-wise minimum is precomputed per cohort row.
    """

    def __init__(self, kb: KnowledgeBase, cohort: Sequence[CohortRow], resolution: int):
        self.kb = kb
        self.base = kb.rule_base
        self.cohort = list(cohort)
        self.resolution = resolution
        self.idx = self.base._term_index
        self.xs = kb.output.universe.grid(resolution)
        self.out_samples = [t.sample(self.xs) for t in kb.output.terms]
        self.masks = [
            self.base._consequent_masks[lab] for lab in kb.output.term_labels
        ]

    def gathered(self, v: LinguisticVariable, position: int, x: float) -> np.ndarray:
        """Per-rule clause degree for one variable at one crisp value."""
        vec = np.array([t(x) for t in v.terms])
        return vec[self.idx[:, position]]

    def label_from_strengths(self, strengths: np.ndarray) -> str:
        env = None
        for samples, mask in zip(self.out_samples, self.masks):
            sub = strengths[mask]
            h = float(sub.max()) if sub.size else 0.0
            if h <= 0.0:
                continue
            layer = np.minimum(h, samples)
            env = layer if env is None else np.maximum(env, layer)
        if env is None:
            raise CalibrationFailed("no rule fired while scoring a cohort row")
        mass = float(env.sum())
        score = float(np.dot(self.xs, env) / mass)
        return select_label(self.kb.output, score)

    def matches(self, variables: dict[str, LinguisticVariable]) -> int:
        n = 0
        for row in self.cohort:
            cols = [
                self.gathered(variables[name], c, getattr(row.record, name))
                for c, name in enumerate(self.kb.input_names)
            ]
            strengths = np.minimum.reduce(cols)
            if self.label_from_strengths(strengths) == row.expected:
                n += 1
        return n

    def fixed_minima(
        self, variables: dict[str, LinguisticVariable], scanned: str
    ) -> list[np.ndarray]:
        """Per cohort row, min clause degree over every variable but `scanned`."""
        out = []
        for row in self.cohort:
            cols = [
                self.gathered(variables[name], c, getattr(row.record, name))
                for c, name in enumerate(self.kb.input_names)
                if name != scanned
            ]
            out.append(np.minimum.reduce(cols))
        return out

    def matches_with_candidate(
        self,
        fixed: list[np.ndarray],
        scanned: str,
        position: int,
        candidate: LinguisticVariable,
    ) -> int:
        n = 0
        for row, base_min in zip(self.cohort, fixed):
            col = self.gathered(candidate, position, getattr(row.record, scanned))
            strengths = np.minimum(base_min, col)
            if self.label_from_strengths(strengths) == row.expected:
                n += 1
        return n


def _candidate_tuples(name: str) -> list[tuple[float, ...]]:
    import itertools as it

    values = _grid_values(name)
    m = len(TERMS[name])
    return list(it.combinations(values, m))


def _spacing_distance(name: str, centers: Sequence[float]) -> float:
    ideal = _equal_spacing_ideal(name)
    return float(sum((c - e) ** 2 for c, e in zip(centers, ideal)))


def calibrate(
    kb: KnowledgeBase,
    cohort: Sequence[CohortRow],
    resolution: int = DEFAULT_RESOLUTION,
    min_agreement: int | None = None,
) -> KnowledgeBase:
    """Deterministic coordinate grid search over the non-anchored centers.

    Sweeps the free variables in declared order, scanning each variable's full
    candidate grid with the others held fixed, and keeps the candidate that
    matches the most cohort labels; ties prefer centers closest to equal
    spacing, then the lexicographically smallest tuple. Sweeps repeat until a
    full pass changes nothing. Anchored variables are never touched.
    """
    cohort = list(cohort)
    if not cohort:
        return kb
    if min_agreement is None:
        min_agreement = math.ceil(0.8 * len(cohort))

    scorer = _FastScorer(kb, cohort, resolution)
    variables = {v.name: v for v in kb.inputs}
    positions = {name: i for i, name in enumerate(kb.input_names)}
    centers = {name: partition_centers(variables[name]) for name in FREE_VARIABLES}

    best_total = scorer.matches(variables)
    for _ in range(MAX_SWEEPS):
        changed = False
        for name in FREE_VARIABLES:
            fixed = scorer.fixed_minima(variables, name)
            best = (
                -best_total,
                _spacing_distance(name, centers[name]),
                centers[name],
            )
            for candidate in _candidate_tuples(name):
                trial = variable_from_centers(
                    name, variables[name].universe, TERMS[name], candidate
                )
                matches = scorer.matches_with_candidate(
                    fixed, name, positions[name], trial
                )
                key = (-matches, _spacing_distance(name, candidate), candidate)
                if key < best:
                    best = key
            chosen = best[2]
            if chosen != centers[name]:
                centers[name] = chosen
                variables[name] = variable_from_centers(
                    name, variables[name].universe, TERMS[name], chosen
                )
                changed = True
            best_total = -best[0]
        if not changed:
            break

    if best_total < min_agreement:
        raise CalibrationFailed(
            f"best grid point matches {best_total}/{len(cohort)} cohort labels, "
            f"below the floor of {min_agreement}"
        )

    inputs = tuple(variables[name] for name in kb.input_names)
    provenance = (
        "calibrated by a deterministic coordinate grid search over the "
        "non-anchored term centers against the bundled reference cohort "
        f"(agreement {best_total}/{len(cohort)}); anchors: cholesterol "
        "114.5/144.5/174.5 mg/dL, blood pressure 90/120/140 mmHg"
    )
    return replace(kb, inputs=inputs, provenance=provenance)
