"""Fuzzy controller mapping (population size, generation) to GA operator rates.

Two inputs, two outputs, eighteen rules. Membership breakpoints come from a
JSON config (see ``data/controller_default.json``); the rule grids are fixed
here because they are the controller's definition, not a tuning knob.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

from .fuzzy import (
    DEFAULT_RESOLUTION,
    FuzzyConfigError,
    LinguisticVariable,
    MamdaniEngine,
    Rule,
    variable_from_dict,
    variable_to_dict,
)

POPULATION = "population_size"
GENERATION = "generation"
CROSSOVER = "crossover_probability"
MUTATION = "mutation_probability"

# name -> (universe, labels in ascending order)
VARIABLE_LAYOUT = {
    POPULATION: ((0.0, 150.0), ("small", "medium", "big")),
    GENERATION: ((0.0, 1500.0), ("short", "medium", "long")),
    CROSSOVER: ((0.0, 1.0), ("small", "medium", "big", "very_big")),
    MUTATION: ((0.0, 1.0), ("very_small", "small", "medium", "big")),
}

# rows: generation short/medium/long; columns: population small/medium/big
CROSSOVER_GRID = (
    ("medium", "small", "small"),
    ("big", "big", "medium"),
    ("very_big", "very_big", "big"),
)
# Where the prose rule list disagrees with this table, the table is used.
MUTATION_GRID = (
    ("big", "medium", "small"),
    ("medium", "small", "very_small"),
    ("small", "very_small", "very_small"),
)

CONFIG_VERSION = 1


@dataclass(frozen=True)
class ParamDecision:
    pc: float
    pm: float


def _grid_rules(output: str, grid) -> list[Rule]:
    rules = []
    gen_labels = VARIABLE_LAYOUT[GENERATION][1]
    pop_labels = VARIABLE_LAYOUT[POPULATION][1]
    for gen_label, row in zip(gen_labels, grid):
        for pop_label, out_label in zip(pop_labels, row):
            rules.append(Rule(((GENERATION, gen_label), (POPULATION, pop_label)), (output, out_label)))
    return rules


def default_rules() -> list[Rule]:
    return _grid_rules(CROSSOVER, CROSSOVER_GRID) + _grid_rules(MUTATION, MUTATION_GRID)


def _check_layout(name: str, var: LinguisticVariable) -> None:
    (lo, hi), labels = VARIABLE_LAYOUT[name]
    if (var.universe.lo, var.universe.hi) != (lo, hi):
        raise FuzzyConfigError(
            f"variable {name!r}: universe must be [{lo:g}, {hi:g}], got [{var.universe.lo:g}, {var.universe.hi:g}]"
        )
    if var.labels != labels:
        raise FuzzyConfigError(f"variable {name!r}: sets must be {list(labels)} in order, got {list(var.labels)}")


class FuzzyParamController:
    """Decides crossover/mutation probabilities from population size and generation."""

    def __init__(self, variables: Mapping[str, LinguisticVariable], resolution: int = DEFAULT_RESOLUTION):
        for name in VARIABLE_LAYOUT:
            if name not in variables:
                raise FuzzyConfigError(f"controller config is missing variable {name!r}")
            _check_layout(name, variables[name])
        self.engine = MamdaniEngine(dict(variables), tuple(default_rules()), resolution)

    @property
    def variables(self) -> Mapping[str, LinguisticVariable]:
        return self.engine.variables

    @property
    def rules(self) -> tuple[Rule, ...]:
        return self.engine.rules

    def lookup(self, output: str, generation: str, population: str) -> str:
        """Consequent label of the rule with the given antecedent labels."""
        for rule in self.engine.rules_for(output):
            if dict(rule.antecedents) == {GENERATION: generation, POPULATION: population}:
                return rule.consequent[1]
        raise KeyError(f"no {output} rule for generation={generation}, population={population}")

    def decide(self, population_size: float, generation: float) -> ParamDecision:
        if population_size < 0 or generation < 0:
            raise ValueError("population size and generation must be non-negative")
        inputs = {POPULATION: float(population_size), GENERATION: float(generation)}
        return ParamDecision(self.engine.infer(inputs, CROSSOVER), self.engine.infer(inputs, MUTATION))

    def to_dict(self) -> dict:
        return {
            "version": CONFIG_VERSION,
            "resolution": self.engine.resolution,
            "variables": {name: variable_to_dict(self.variables[name]) for name in VARIABLE_LAYOUT},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FuzzyParamController":
        if not isinstance(data, Mapping) or "variables" not in data:
            raise FuzzyConfigError("controller config needs a 'variables' mapping")
        version = data.get("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise FuzzyConfigError(f"unsupported controller config version {version!r}")
        raw = data["variables"]
        variables = {}
        for name in VARIABLE_LAYOUT:
            if name not in raw:
                raise FuzzyConfigError(f"controller config is missing variable {name!r}")
            variables[name] = variable_from_dict(name, raw[name])
        return cls(variables, int(data.get("resolution", DEFAULT_RESOLUTION)))


def load_controller(path: str | Path) -> FuzzyParamController:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FuzzyConfigError(f"{path}: not valid JSON ({exc})") from None
    return FuzzyParamController.from_dict(data)


@lru_cache(maxsize=1)
def build_default_controller() -> FuzzyParamController:
    text = resources.files("fuzzydiet.data").joinpath("controller_default.json").read_text(encoding="utf-8")
    return FuzzyParamController.from_dict(json.loads(text))


def decide(controller: FuzzyParamController, population_size: float, generation: float) -> ParamDecision:
    return controller.decide(population_size, generation)
