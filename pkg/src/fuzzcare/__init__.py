"""fuzzcare: fuzzy rule-based heart-disease risk assessment.

Library surface: fuzzy primitives, the rule engine and DSL, the cardiology
knowledge base, and the diagnosis pipeline. The CLI lives in fuzzcare.cli and
the HTTP service in fuzzcare.service.
"""

from .fuzzy import (
    DEFAULT_RESOLUTION,
    AggregatedOutput,
    ClippedSet,
    EmptyAggregate,
    FuzzifiedValue,
    FuzzySet,
    LinguisticVariable,
    MembershipFunction,
    OutOfUniverse,
    Universe,
    ZeroMass,
    aggregate,
    clip_implication,
    defuzzify_centroid,
    fuzzify,
    membership_degree,
    s_norm_max,
    t_norm_min,
)
from .dsl import ParseError, parse_rules, render_rule, render_rules
from .rules import (
    Antecedent,
    DuplicateOverride,
    FiredRule,
    InferenceTrace,
    MissingVariable,
    NoRuleFired,
    Rule,
    RuleBase,
    UnknownTerm,
    UnknownVariable,
    firing_strength,
    generate_rule_base,
    infer,
    make_rule,
    rule_space_size,
)
from .kb import (
    CalibrationFailed,
    CohortRow,
    ConsequentPolicy,
    DiagnosisReport,
    DosageRecommendation,
    KnowledgeBase,
    PatientRecord,
    ValidationReport,
    build_anchored_kb,
    bundled_cohort,
    calibrate,
    evaluate_crisp,
    load_default_kb,
    load_kb,
    recommend_dosage,
    severity_policy,
    validate_kb,
)

__version__ = "0.1.0"
