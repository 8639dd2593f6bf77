"""Mamdani fuzzy inference with S-curve shoulders and pi (bell) sets.

Inference is MIN over antecedents, MIN implication (clipping), MAX
aggregation over a sampled output universe, and centroid defuzzification.
Everything here is immutable once built and safe to share across threads.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 1001

SHOULDER_LEFT = "shoulder_left"
SHOULDER_RIGHT = "shoulder_right"
PI = "pi"

_PARAM_COUNT = {SHOULDER_LEFT: 2, SHOULDER_RIGHT: 2, PI: 4}


class FuzzyConfigError(ValueError):
    """Invalid membership function, variable, or rule definition."""


class NoRuleFired(ArithmeticError):
    """Aggregated output carries no mass, so it has no centroid."""


def _s_rise(x, a: float, c: float):
    """Quadratic-spline S-curve: 0 at or below ``a``, 1 at or above ``c``."""
    x = np.asarray(x, dtype=float)
    if c <= a:
        return np.where(x >= a, 1.0, 0.0)
    with np.errstate(over="ignore"):  # subnormal widths overflow, then clip
        t = np.clip((x - a) / (c - a), 0.0, 1.0)
    out = np.where(t <= 0.5, 2.0 * t**2, 1.0 - 2.0 * (1.0 - t) ** 2)
    out = np.where(x <= a, 0.0, out)
    return np.where(x >= c, 1.0, out)


@dataclass(frozen=True)
class MembershipFunction:
    """A shoulder or pi membership curve.

    ``params`` are breakpoints in universe units:

    * ``shoulder_left``: (start, foot) -- 1 up to ``start``, 0 from ``foot``
    * ``shoulder_right``: (foot, start) -- 0 up to ``foot``, 1 from ``start``
    * ``pi``: (left foot, left shoulder, right shoulder, right foot) -- 1 on
      the plateau between the shoulders
    """

    shape: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.shape not in _PARAM_COUNT:
            raise FuzzyConfigError(f"unknown membership shape {self.shape!r}")
        params = tuple(float(p) for p in self.params)
        if len(params) != _PARAM_COUNT[self.shape]:
            raise FuzzyConfigError(
                f"{self.shape} needs {_PARAM_COUNT[self.shape]} breakpoints, got {len(params)}"
            )
        if any(b < a for a, b in zip(params, params[1:])):
            raise FuzzyConfigError(f"{self.shape} breakpoints must be non-decreasing: {params}")
        object.__setattr__(self, "params", params)

    def __call__(self, x):
        p = self.params
        if self.shape == SHOULDER_RIGHT:
            out = _s_rise(x, p[0], p[1])
        elif self.shape == SHOULDER_LEFT:
            out = 1.0 - _s_rise(x, p[0], p[1])
        else:
            rise = _s_rise(x, p[0], p[1])
            fall = 1.0 - _s_rise(x, p[2], p[3])
            out = np.where(np.asarray(x) <= p[1], rise, np.where(np.asarray(x) >= p[2], fall, 1.0))
        if np.ndim(out) == 0:
            return float(out)
        return out

    @property
    def center(self) -> float:
        """Representative location used to check set ordering.

        Shoulders report their 0.5 crossing, pi sets the plateau midpoint.
        """
        p = self.params
        if self.shape == PI:
            return (p[1] + p[2]) / 2.0
        return (p[0] + p[1]) / 2.0


def eval_membership(mf: MembershipFunction, x: float) -> float:
    return float(mf(x))


@dataclass(frozen=True)
class Universe:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise FuzzyConfigError(f"universe needs hi > lo, got [{self.lo}, {self.hi}]")

    def clamp(self, x: float) -> float:
        return min(max(float(x), self.lo), self.hi)

    def grid(self, n: int) -> np.ndarray:
        if n < 2:
            raise FuzzyConfigError("sample grid needs at least 2 points")
        return np.linspace(self.lo, self.hi, n)

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2.0


@dataclass(frozen=True)
class FuzzySet:
    label: str
    mf: MembershipFunction


@dataclass(frozen=True)
class LinguisticVariable:
    name: str
    universe: Universe
    sets: tuple[FuzzySet, ...]

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        if not self.sets:
            raise FuzzyConfigError(f"variable {self.name!r} has no fuzzy sets")
        labels = [s.label for s in self.sets]
        if len(set(labels)) != len(labels):
            raise FuzzyConfigError(f"variable {self.name!r} has duplicate labels {labels}")
        centers = [s.mf.center for s in self.sets]
        for (la, ca), (lb, cb) in zip(zip(labels, centers), zip(labels[1:], centers[1:])):
            if not cb > ca:
                raise FuzzyConfigError(
                    f"variable {self.name!r}: set {lb!r} (center {cb}) must lie above {la!r} (center {ca})"
                )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.sets)

    def get(self, label: str) -> FuzzySet:
        for s in self.sets:
            if s.label == label:
                return s
        raise KeyError(f"variable {self.name!r} has no set {label!r}")


def fuzzify(var: LinguisticVariable, x: float) -> dict[str, float]:
    """Membership degree of the (clamped) crisp value in every set of ``var``."""
    x = var.universe.clamp(x)
    return {s.label: float(s.mf(x)) for s in var.sets}


@dataclass(frozen=True)
class Rule:
    """Conjunctive rule: IF a is A AND b is B ... THEN out is C."""

    antecedents: tuple[tuple[str, str], ...]
    consequent: tuple[str, str]

    def __post_init__(self):
        object.__setattr__(self, "antecedents", tuple(tuple(a) for a in self.antecedents))
        object.__setattr__(self, "consequent", tuple(self.consequent))


@dataclass(frozen=True)
class AggregatedOutput:
    variable: str
    xs: np.ndarray
    degrees: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        mu = np.asarray(self.degrees, dtype=float)
        if xs.shape != mu.shape or xs.ndim != 1 or xs.size < 2:
            raise FuzzyConfigError("aggregated output needs matching 1-D grids of >= 2 points")
        if np.any(mu < 0) or np.any(mu > 1):
            raise FuzzyConfigError("aggregated degrees must lie in [0, 1]")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "degrees", mu)


def defuzz_centroid(agg: AggregatedOutput) -> float:
    """Discrete centroid sum(x * mu) / sum(mu) over the sample grid."""
    mass = float(agg.degrees.sum())
    if mass <= 0.0:
        raise NoRuleFired(f"no membership mass for {agg.variable!r}")
    c = float(np.dot(agg.xs, agg.degrees) / mass)
    # float rounding can leave c a hair outside the grid
    return min(max(c, float(agg.xs[0])), float(agg.xs[-1]))


@dataclass(frozen=True)
class InferenceResult:
    value: float
    strengths: tuple[float, ...]
    fallback: bool = False


@dataclass(frozen=True)
class MamdaniEngine:
    variables: Mapping[str, LinguisticVariable]
    rules: tuple[Rule, ...]
    resolution: int = DEFAULT_RESOLUTION
    _curves: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        variables = dict(self.variables)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.resolution < 2:
            raise FuzzyConfigError("resolution must be at least 2")
        for i, rule in enumerate(self.rules):
            for name, label in (*rule.antecedents, rule.consequent):
                if name not in variables:
                    raise FuzzyConfigError(f"rule {i} references unknown variable {name!r}")
                if label not in variables[name].labels:
                    raise FuzzyConfigError(f"rule {i} references unknown set {name}.{label}")
        # precomputed consequent curves on each output grid
        curves = {}
        for rule in self.rules:
            name, label = rule.consequent
            if (name, label) not in curves:
                var = variables[name]
                curves[(name, label)] = var.get(label).mf(var.universe.grid(self.resolution))
        object.__setattr__(self, "_curves", curves)

    def rules_for(self, output: str) -> list[Rule]:
        return [r for r in self.rules if r.consequent[0] == output]

    def aggregate(self, inputs: Mapping[str, float], output: str) -> tuple[AggregatedOutput, tuple[float, ...]]:
        """Fire every rule concluding on ``output`` and MAX-combine the clipped sets."""
        degrees: dict[str, dict[str, float]] = {}
        for rule in self.rules_for(output):
            for name, _ in rule.antecedents:
                if name not in degrees:
                    if name not in inputs:
                        raise KeyError(f"missing crisp input for {name!r}")
                    degrees[name] = fuzzify(self.variables[name], inputs[name])
        var = self.variables[output]
        xs = var.universe.grid(self.resolution)
        agg = np.zeros_like(xs)
        strengths = []
        for rule in self.rules_for(output):
            w = min(degrees[name][label] for name, label in rule.antecedents)
            strengths.append(w)
            if w > 0.0:
                np.maximum(agg, np.minimum(self._curves[rule.consequent], w), out=agg)
        return AggregatedOutput(output, xs, agg), tuple(strengths)

    def infer_detailed(self, inputs: Mapping[str, float], output: str) -> InferenceResult:
        agg, strengths = self.aggregate(inputs, output)
        try:
            return InferenceResult(defuzz_centroid(agg), strengths)
        except NoRuleFired:
            log.warning("no rule fired for %s with inputs %s; using universe midpoint", output, dict(inputs))
            return InferenceResult(self.variables[output].universe.midpoint, strengths, fallback=True)

    def infer(self, inputs: Mapping[str, float], output: str) -> float:
        return self.infer_detailed(inputs, output).value


def infer(engine: MamdaniEngine, inputs: Mapping[str, float], output: str) -> float:
    return engine.infer(inputs, output)


# -- config (de)serialisation -------------------------------------------------


def variable_from_dict(name: str, data: Mapping) -> LinguisticVariable:
    try:
        lo, hi = data["universe"]
        sets = []
        for entry in data["sets"]:
            label = entry["label"]
            try:
                mf = MembershipFunction(entry["shape"], tuple(entry["params"]))
            except FuzzyConfigError as exc:
                raise FuzzyConfigError(f"{name}.{label}: {exc}") from None
            sets.append(FuzzySet(label, mf))
        return LinguisticVariable(name, Universe(float(lo), float(hi)), tuple(sets))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FuzzyConfigError):
            raise
        raise FuzzyConfigError(f"variable {name!r}: malformed definition ({exc})") from None


def variable_to_dict(var: LinguisticVariable) -> dict:
    return {
        "universe": [var.universe.lo, var.universe.hi],
        "sets": [{"label": s.label, "shape": s.mf.shape, "params": list(s.mf.params)} for s in var.sets],
    }


def sample_variable(var: LinguisticVariable, n: int = DEFAULT_RESOLUTION) -> dict[str, np.ndarray]:
    """Membership curves of every set on an ``n``-point grid (for plotting/checks)."""
    xs = var.universe.grid(n)
    return {"x": xs, **{s.label: np.asarray(s.mf(xs), dtype=float) for s in var.sets}}


def reflect(agg: AggregatedOutput, universe: Universe) -> AggregatedOutput:
    """Mirror an aggregated curve about the universe midpoint."""
    return AggregatedOutput(agg.variable, (universe.lo + universe.hi) - agg.xs[::-1], agg.degrees[::-1])


__all__ = [
    "AggregatedOutput",
    "FuzzyConfigError",
    "FuzzySet",
    "InferenceResult",
    "LinguisticVariable",
    "MamdaniEngine",
    "MembershipFunction",
    "NoRuleFired",
    "Rule",
    "Universe",
    "defuzz_centroid",
    "eval_membership",
    "fuzzify",
    "infer",
    "reflect",
    "sample_variable",
    "variable_from_dict",
    "variable_to_dict",
]
