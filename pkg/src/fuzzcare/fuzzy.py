"""Fuzzy set primitives: piecewise-linear membership functions, linguistic
variables, the min/max operator pair, clip implication, max aggregation, and
centroid defuzzification.

Everything here is immutable after construction and every operation is a pure
function, so values can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

DEFAULT_RESOLUTION = 1001
MIN_RESOLUTION = 100

TRIANGULAR = "triangular"
TRAPEZOIDAL = "trapezoidal"

_PARAM_COUNT = {TRIANGULAR: 3, TRAPEZOIDAL: 4}


class FuzzyError(Exception):
    """Base class for fuzzy-math errors."""


class OutOfUniverse(FuzzyError):
    """A crisp value fell outside a variable's universe of discourse.

    Raised instead of silently clamping: an implausible measurement usually
    means a data-entry mistake, and the caller must opt into clamping.
    """

    def __init__(self, variable: str, value: float, lo: float, hi: float):
        super().__init__(f"{variable}={value} outside universe [{lo}, {hi}]")
        self.variable = variable
        self.value = value
        self.lo = lo
        self.hi = hi


class EmptyAggregate(FuzzyError):
    """Aggregation was requested with no clipped sets (no rule fired)."""


class ZeroMass(FuzzyError):
    """The aggregated envelope is identically zero; no centroid exists."""


@dataclass(frozen=True)
class Universe:
    """Closed numeric interval a variable lives on, with a units label."""

    lo: float
    hi: float
    units: str

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"universe needs lo < hi, got [{self.lo}, {self.hi}]")
        if not self.units:
            raise ValueError("universe units label must be non-empty")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def clamp(self, x: float) -> float:
        return min(max(x, self.lo), self.hi)

    def grid(self, resolution: int) -> np.ndarray:
        return np.linspace(self.lo, self.hi, resolution)


@dataclass(frozen=True)
class MembershipFunction:
    """Triangular or trapezoidal membership shape.

    Params are breakpoints in universe coordinates, non-decreasing; equal
    neighbors are legal and produce vertical edges (shouldered sets use them).
    Degree is 0 outside the support, 1 exactly on the plateau, and linear in
    between.
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _PARAM_COUNT:
            raise ValueError(f"unknown membership kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        want = _PARAM_COUNT[self.kind]
        if len(params) != want:
            raise ValueError(f"{self.kind} takes {want} params, got {len(params)}")
        if any(q < p for p, q in zip(params, params[1:])):
            raise ValueError(f"params must be non-decreasing, got {params}")

    @classmethod
    def triangular(cls, a: float, b: float, c: float) -> "MembershipFunction":
        return cls(TRIANGULAR, (a, b, c))

    @classmethod
    def trapezoidal(cls, a: float, b: float, c: float, d: float) -> "MembershipFunction":
        return cls(TRAPEZOIDAL, (a, b, c, d))

    @property
    def support(self) -> tuple[float, float]:
        return self.params[0], self.params[-1]

    @property
    def plateau(self) -> tuple[float, float]:
        if self.kind == TRIANGULAR:
            return self.params[1], self.params[1]
        return self.params[1], self.params[2]

    @property
    def apex(self) -> float:
        """Canonical point of full membership (plateau midpoint)."""
        p, q = self.plateau
        return (p + q) / 2.0

    def __call__(self, x: float) -> float:
        p, q = self.plateau
        if p <= x <= q:
            return 1.0
        a, d = self.support
        if x <= a or x >= d:
            return 0.0
        if x < p:
            return (x - a) / (p - a)
        return (d - x) / (d - q)

    def sample(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; agrees with scalar __call__ pointwise."""
        xs = np.asarray(xs, dtype=float)
        p, q = self.plateau
        a, d = self.support
        out = np.zeros(xs.shape)
        out[(xs >= p) & (xs <= q)] = 1.0
        if p > a:
            m = (xs > a) & (xs < p)
            out[m] = (xs[m] - a) / (p - a)
        if d > q:
            m = (xs > q) & (xs < d)
            out[m] = (d - xs[m]) / (d - q)
        return out


@dataclass(frozen=True)
class FuzzySet:
    """One linguistic term: a label plus its membership shape on a universe."""

    term: str
    mf: MembershipFunction
    universe: Universe

    def __post_init__(self):
        lo, hi = self.mf.support
        if lo < self.universe.lo or hi > self.universe.hi:
            raise ValueError(
                f"term {self.term!r}: support [{lo}, {hi}] outside universe "
                f"[{self.universe.lo}, {self.universe.hi}]"
            )

    def __call__(self, x: float) -> float:
        return self.mf(x)

    def sample(self, xs: np.ndarray) -> np.ndarray:
        return self.mf.sample(xs)


@dataclass(frozen=True)
class FuzzifiedValue:
    """Membership degrees of one crisp value across a variable's terms."""

    variable: str
    degrees: Mapping[str, float]


@dataclass(frozen=True)
class LinguisticVariable:
    """Named quantity with an ordered set of terms (ascending severity)."""

    name: str
    universe: Universe
    terms: tuple[FuzzySet, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError(f"variable {self.name!r} needs at least one term")
        labels = [t.term for t in self.terms]
        if len(set(labels)) != len(labels):
            raise ValueError(f"variable {self.name!r} has duplicate term labels")
        for t in self.terms:
            if t.universe != self.universe:
                raise ValueError(
                    f"term {t.term!r} of {self.name!r} is on a different universe"
                )

    @property
    def term_labels(self) -> tuple[str, ...]:
        return tuple(t.term for t in self.terms)

    def term(self, label: str) -> FuzzySet:
        for t in self.terms:
            if t.term == label:
                return t
        raise KeyError(f"variable {self.name!r} has no term {label!r}")

    def severity_index(self, label: str) -> int:
        for i, t in enumerate(self.terms):
            if t.term == label:
                return i
        raise KeyError(f"variable {self.name!r} has no term {label!r}")

    def fuzzify(self, x: float, clamp: bool = False) -> FuzzifiedValue:
        """Map a crisp value to membership degrees over every term.

        Values outside the universe raise OutOfUniverse unless clamp is set.
        """
        if not self.universe.contains(x):
            if not clamp:
                raise OutOfUniverse(self.name, x, self.universe.lo, self.universe.hi)
            x = self.universe.clamp(x)
        return FuzzifiedValue(self.name, {t.term: t(x) for t in self.terms})


def membership_degree(mf: MembershipFunction, x: float) -> float:
    """Degree of x under a membership shape; 1 on the plateau, 0 outside the
    support, linear interpolation between."""
    return mf(x)


def fuzzify(variable: LinguisticVariable, x: float, clamp: bool = False) -> FuzzifiedValue:
    return variable.fuzzify(x, clamp=clamp)


def t_norm_min(a: float, b: float) -> float:
    """Conjunction of two degrees (Mamdani AND)."""
    return a if a <= b else b


def s_norm_max(a: float, b: float) -> float:
    """Aggregation of two degrees (Mamdani OR)."""
    return a if a >= b else b


@dataclass(frozen=True)
class ClippedSet:
    """A consequent set cut off at a rule's firing strength."""

    term: str
    height: float
    set: FuzzySet

    def __call__(self, x: float) -> float:
        return t_norm_min(self.height, self.set(x))

    def sample(self, xs: np.ndarray) -> np.ndarray:
        return np.minimum(self.height, self.set.sample(xs))


def clip_implication(fuzzy_set: FuzzySet, strength: float) -> ClippedSet:
    """Mamdani implication: min(strength, membership) pointwise."""
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"strength must be in [0, 1], got {strength}")
    return ClippedSet(fuzzy_set.term, float(strength), fuzzy_set)


@dataclass(frozen=True)
class AggregatedOutput:
    """Max-envelope over the clipped consequent sets of the fired rules."""

    universe: Universe
    clipped: tuple[ClippedSet, ...]

    def degree(self, x: float) -> float:
        return max(c(x) for c in self.clipped)

    def sample(self, xs: np.ndarray) -> np.ndarray:
        return np.maximum.reduce([c.sample(xs) for c in self.clipped])


def aggregate(clipped: Iterable[ClippedSet]) -> AggregatedOutput:
    """Combine clipped sets by pointwise max. Raises EmptyAggregate on []."""
    clipped = tuple(clipped)
    if not clipped:
        raise EmptyAggregate("nothing to aggregate: no rule fired")
    universes = {c.set.universe for c in clipped}
    if len(universes) != 1:
        raise ValueError("clipped sets span different universes")
    return AggregatedOutput(universes.pop(), clipped)


def defuzzify_centroid(agg: AggregatedOutput, resolution: int = DEFAULT_RESOLUTION) -> float:
    """Crisp value of an envelope: sum(x*mu) / sum(mu) over a uniform grid."""
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_RESOLUTION}, got {resolution}")
    xs = agg.universe.grid(resolution)
    mu = agg.sample(xs)
    mass = float(mu.sum())
    if mass <= 0.0:
        raise ZeroMass("aggregated envelope is identically zero")
    centroid = float(np.dot(xs, mu) / mass)
    # Weighted mean of grid points; cannot leave the universe except by rounding.
    if not math.isfinite(centroid):
        raise ZeroMass("aggregated envelope has no finite centroid")
    return centroid
