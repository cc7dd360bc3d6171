"""Rule representation, cartesian rule-base generation, and the inference
pipeline from fuzzified inputs to a crisp risk score and label.

Inference is Mamdani-style: min conjunction of antecedent degrees, clip
implication on consequents, max aggregation, centroid defuzzification.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np

from .fuzzy import (
    DEFAULT_RESOLUTION,
    AggregatedOutput,
    FuzzifiedValue,
    LinguisticVariable,
    aggregate,
    clip_implication,
    defuzzify_centroid,
)

GENERATED = "generated"
PINNED = "pinned"


class RuleError(Exception):
    """Base class for rule-engine errors."""


class UnknownVariable(RuleError):
    pass


class UnknownTerm(RuleError):
    pass


class DuplicateOverride(RuleError):
    pass


class MissingVariable(RuleError):
    pass


class NoRuleFired(RuleError):
    """All firing strengths were zero. Impossible for a complete rule base
    over covering variables; left unhandled on purpose."""


@dataclass(frozen=True)
class Antecedent:
    """Conjunction of (variable, term) clauses, at most one per variable."""

    clauses: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "clauses", tuple((str(v), str(t)) for v, t in self.clauses)
        )
        names = [v for v, _ in self.clauses]
        if len(set(names)) != len(names):
            raise ValueError(f"antecedent repeats a variable: {names}")

    def as_mapping(self) -> dict[str, str]:
        return dict(self.clauses)

    def degree(self, inputs: Mapping[str, FuzzifiedValue]) -> float:
        """Min over clause degrees (the rule's firing strength)."""
        strength = 1.0
        for var, term in self.clauses:
            fv = inputs.get(var)
            if fv is None:
                raise MissingVariable(f"no fuzzified value for variable {var!r}")
            try:
                d = fv.degrees[term]
            except KeyError:
                raise UnknownTerm(f"variable {var!r} has no term {term!r}") from None
            if d < strength:
                strength = d
        return strength


@dataclass(frozen=True)
class Rule:
    """IF <conjunction> THEN <output term>, pinned or generated."""

    id: str
    antecedent: Antecedent
    consequent: tuple[str, str]
    provenance: str = GENERATED


def rule_id(antecedent: Antecedent, consequent: tuple[str, str]) -> str:
    """Stable content-derived identifier, identical across runs and processes."""
    text = ";".join(f"{v}={t}" for v, t in antecedent.clauses)
    text += f">{consequent[0]}={consequent[1]}"
    return "r" + hashlib.sha256(text.encode("utf-8")).hexdigest()[:10]


def make_rule(
    clauses: Sequence[tuple[str, str]],
    consequent: tuple[str, str],
    provenance: str = GENERATED,
) -> Rule:
    ant = Antecedent(tuple(clauses))
    cons = (str(consequent[0]), str(consequent[1]))
    return Rule(rule_id(ant, cons), ant, cons, provenance)


def rule_space_size(term_counts: Sequence[int]) -> int:
    """Product of per-variable term counts: the full rule-space cardinality."""
    n = 1
    for c in term_counts:
        if c < 1:
            raise ValueError(f"term counts must be >= 1, got {list(term_counts)}")
        n *= c
    return n


def firing_strength(rule: Rule, inputs: Mapping[str, FuzzifiedValue]) -> float:
    return rule.antecedent.degree(inputs)


@dataclass(frozen=True)
class FiredRule:
    rule: Rule
    strength: float


@dataclass(frozen=True)
class InferenceTrace:
    """What fired, the aggregated envelope, and the resulting score/label."""

    fired: tuple[FiredRule, ...]
    aggregated: AggregatedOutput
    score: float
    label: str


def select_label(output: LinguisticVariable, score: float) -> str:
    """Output term with maximal membership at the score; ties go to the
    higher-severity term (the clinically conservative choice)."""
    best_label = output.terms[0].term
    best_degree = -1.0
    for t in output.terms:
        d = t(score)
        if d >= best_degree:
            best_degree = d
            best_label = t.term
    return best_label


@dataclass(frozen=True)
class RuleBase:
    """Immutable rule collection bound to input variables and one output."""

    inputs: tuple[LinguisticVariable, ...]
    output: LinguisticVariable
    rules: tuple[Rule, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "rules", tuple(self.rules))
        order = [v.name for v in self.inputs]
        seen: set[tuple[str, ...]] = set()
        for rule in self.rules:
            key = antecedent_key(rule.antecedent, order)
            if key in seen:
                raise ValueError(f"two rules share antecedent {key}")
            seen.add(key)
            out_var, out_term = rule.consequent
            if out_var != self.output.name:
                raise UnknownVariable(
                    f"rule {rule.id} targets {out_var!r}, not {self.output.name!r}"
                )
            if out_term not in self.output.term_labels:
                raise UnknownTerm(
                    f"rule {rule.id} uses unknown output term {out_term!r}"
                )

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.inputs)

    @cached_property
    def by_id(self) -> dict[str, Rule]:
        return {r.id: r for r in self.rules}

    @cached_property
    def term_counts(self) -> tuple[int, ...]:
        return tuple(len(v.terms) for v in self.inputs)

    # --- compiled views for the vectorized hot path ---

    @cached_property
    def _term_index(self) -> np.ndarray:
        """(n_rules, n_inputs) matrix of term positions per rule clause."""
        pos = [{lab: i for i, lab in enumerate(v.term_labels)} for v in self.inputs]
        idx = np.empty((len(self.rules), len(self.inputs)), dtype=np.int64)
        for r, rule in enumerate(self.rules):
            amap = rule.antecedent.as_mapping()
            for c, v in enumerate(self.inputs):
                try:
                    term = amap[v.name]
                except KeyError:
                    raise MissingVariable(
                        f"rule {rule.id} has no clause for variable {v.name!r}"
                    ) from None
                try:
                    idx[r, c] = pos[c][term]
                except KeyError:
                    raise UnknownTerm(
                        f"rule {rule.id}: variable {v.name!r} has no term {term!r}"
                    ) from None
        return idx

    @cached_property
    def _consequent_masks(self) -> dict[str, np.ndarray]:
        masks = {
            lab: np.zeros(len(self.rules), dtype=bool)
            for lab in self.output.term_labels
        }
        for r, rule in enumerate(self.rules):
            masks[rule.consequent[1]][r] = True
        return masks

    def degree_vector(self, fv: FuzzifiedValue, position: int) -> np.ndarray:
        v = self.inputs[position]
        return np.array([fv.degrees[lab] for lab in v.term_labels], dtype=float)

    def strengths_from_vectors(self, vectors: Sequence[np.ndarray]) -> np.ndarray:
        """Firing strengths for all rules given per-input degree vectors."""
        idx = self._term_index
        gathered = [vectors[c][idx[:, c]] for c in range(len(self.inputs))]
        return np.minimum.reduce(gathered)

    def strengths(self, inputs: Mapping[str, FuzzifiedValue]) -> np.ndarray:
        vectors = []
        for c, v in enumerate(self.inputs):
            fv = inputs.get(v.name)
            if fv is None:
                raise MissingVariable(f"no fuzzified value for variable {v.name!r}")
            vectors.append(self.degree_vector(fv, c))
        return self.strengths_from_vectors(vectors)

    def clip_heights(self, strengths: np.ndarray) -> dict[str, float]:
        """Max firing strength per output term (only fired terms returned)."""
        heights = {}
        for lab, mask in self._consequent_masks.items():
            if mask.any():
                h = float(strengths[mask].max()) if strengths[mask].size else 0.0
                if h > 0.0:
                    heights[lab] = h
        return heights


def generate_rule_base(
    inputs: Sequence[LinguisticVariable],
    output: LinguisticVariable,
    policy: Callable[[Antecedent], str],
    overrides: Sequence[Rule] = (),
) -> RuleBase:
    """Enumerate the full cartesian term product in lexicographic order.

    Consequents come from the matching override where one exists (kept
    verbatim, marked pinned), otherwise from the policy.
    """
    inputs = tuple(inputs)
    order = [v.name for v in inputs]
    labels = {v.name: v.term_labels for v in inputs}

    pinned: dict[tuple[str, ...], Rule] = {}
    for rule in overrides:
        amap = rule.antecedent.as_mapping()
        if set(amap) != set(order):
            raise UnknownVariable(
                f"override {rule.id} does not cover exactly the input variables"
            )
        for var, term in amap.items():
            if term not in labels[var]:
                raise UnknownTerm(
                    f"override {rule.id}: variable {var!r} has no term {term!r}"
                )
        out_var, out_term = rule.consequent
        if out_var != output.name:
            raise UnknownVariable(f"override {rule.id} targets {out_var!r}")
        if out_term not in output.term_labels:
            raise UnknownTerm(f"override {rule.id} uses unknown term {out_term!r}")
        key = tuple(amap[v] for v in order)
        if key in pinned:
            raise DuplicateOverride(f"two overrides share antecedent {key}")
        if rule.provenance != PINNED:
            rule = Rule(rule.id, rule.antecedent, rule.consequent, PINNED)
        pinned[key] = rule

    rules = []
    for combo in itertools.product(*(labels[v] for v in order)):
        if combo in pinned:
            rules.append(pinned[combo])
            continue
        ant = Antecedent(tuple(zip(order, combo)))
        label = policy(ant)
        if label not in output.term_labels:
            raise UnknownTerm(f"policy produced unknown output term {label!r}")
        cons = (output.name, label)
        rules.append(Rule(rule_id(ant, cons), ant, cons, GENERATED))
    return RuleBase(inputs, output, tuple(rules))


def antecedent_key(antecedent: Antecedent, order: Sequence[str]) -> tuple[str, ...]:
    amap = antecedent.as_mapping()
    try:
        return tuple(amap[v] for v in order)
    except KeyError as e:
        raise MissingVariable(f"antecedent lacks a clause for {e.args[0]!r}") from None


def infer(
    base: RuleBase,
    inputs: Mapping[str, FuzzifiedValue],
    resolution: int = DEFAULT_RESOLUTION,
) -> InferenceTrace:
    """Run the full pipeline: fire, clip, aggregate, defuzzify, label."""
    strengths = base.strengths(inputs)
    fired_idx = np.flatnonzero(strengths > 0.0)
    if fired_idx.size == 0:
        raise NoRuleFired("no rule fired for the given inputs")

    heights = base.clip_heights(strengths)
    clipped = [
        clip_implication(base.output.term(lab), h) for lab, h in heights.items()
    ]
    agg = aggregate(clipped)
    score = defuzzify_centroid(agg, resolution)
    label = select_label(base.output, score)

    fired = [FiredRule(base.rules[i], float(strengths[i])) for i in fired_idx]
    fired.sort(key=lambda f: (-f.strength, f.rule.id))
    return InferenceTrace(tuple(fired), agg, score, label)
