"""Energy requirement and per-disease daily nutrient targets.

Basal metabolism follows Harris-Benedict; total energy multiplies it by an
activity and a stress factor. Disease rules (per-kg protein, fat as a share
of energy, fixed mineral allowances) live in ``data/nutrition.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Mapping


class NutritionError(ValueError):
    pass


class Sex(str, Enum):
    MALE = "male"
    FEMALE = "female"


class DiseaseType(str, Enum):
    NEPHROTIC_SYNDROME = "nephrotic_syndrome"
    ACUTE_RENAL_FAILURE = "acute_renal_failure"
    CHRONIC_KIDNEY = "chronic_kidney"
    # transplantation allowances
    FINAL_STAGE = "final_stage"
    # dialysis allowances
    KIDNEY_STONE = "kidney_stone"


class EnergyMode(str, Enum):
    HARRIS_BENEDICT = "harris-benedict"
    PER_KG = "per-kg"


@dataclass(frozen=True)
class PatientProfile:
    sex: Sex
    body_weight: float  # kg
    height: float  # cm
    age: float  # years

    def __post_init__(self):
        object.__setattr__(self, "sex", Sex(self.sex))
        if not self.body_weight > 0:
            raise NutritionError(f"body weight must be positive, got {self.body_weight}")
        if not self.height > 0:
            raise NutritionError(f"height must be positive, got {self.height}")
        if not self.age >= 0:
            raise NutritionError(f"age must be non-negative, got {self.age}")


# Target symbol -> food composition column it is compared against.
TARGET_NUTRIENT = {
    "p": "energy_kcal",
    "q": "protein_g",
    "r": "fat_g",
    "s": "sodium_mg",
    "t": "potassium_mg",
    "u": "phosphorus_mg",
    "v": "calcium_mg",
    "w": "carb_g",
}

TARGET_UNITS = {"p": "kcal", "q": "g", "r": "g", "s": "mg", "t": "mg", "u": "mg", "v": "mg", "w": "g"}


@dataclass(frozen=True)
class NutrientTargets:
    """Daily targets. Fields a disease does not track stay ``None``."""

    p: float  # energy, kcal
    q: float  # protein, g
    r: float  # fat, g
    s: float | None = None  # sodium, mg
    t: float | None = None  # potassium, mg
    u: float | None = None  # phosphorus, mg
    v: float | None = None  # calcium, mg
    w: float | None = None  # carbohydrate, g

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None and not value > 0:
                raise NutritionError(f"target {f.name} must be positive, got {value}")

    def present(self) -> frozenset[str]:
        return frozenset(f.name for f in fields(self) if getattr(self, f.name) is not None)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}

    @classmethod
    def from_mapping(cls, values: Mapping[str, float]) -> "NutrientTargets":
        unknown = set(values) - set(TARGET_NUTRIENT)
        if unknown:
            raise NutritionError(f"unknown target symbols: {sorted(unknown)}")
        missing = {"p", "q", "r"} - set(values)
        if missing:
            raise NutritionError(f"targets need energy/protein/fat, missing {sorted(missing)}")
        return cls(**{k: float(v) for k, v in values.items()})


@lru_cache(maxsize=1)
def default_tables() -> dict:
    text = resources.files("fuzzydiet.data").joinpath("nutrition.json").read_text(encoding="utf-8")
    return json.loads(text)


def bmr(profile: PatientProfile) -> float:
    """Harris-Benedict basal metabolic rate in kcal/day."""
    if profile.sex is Sex.MALE:
        value = 66 + 13.7 * profile.body_weight + 5 * profile.height - 6.8 * profile.age
    else:
        value = 655 + 9.6 * profile.body_weight + 1.8 * profile.height - 4.7 * profile.age
    if value <= 0:
        raise NutritionError(f"basal metabolism is non-positive ({value:.2f} kcal) for {profile}")
    return value


def activity_factor(label: str, tables: Mapping | None = None) -> float:
    table = (tables or default_tables())["activity_factors"]
    try:
        return float(table[label])
    except KeyError:
        raise NutritionError(f"unknown activity {label!r}; choose from {sorted(table)}") from None


def stress_factor(label: str, tables: Mapping | None = None) -> float:
    table = (tables or default_tables())["stress_factors"]
    try:
        return float(table[label])
    except KeyError:
        raise NutritionError(f"unknown stress level {label!r}; choose from {sorted(table)}") from None


def total_energy(amb: float, activity: float, stress: float) -> float:
    if not amb > 0:
        raise NutritionError(f"basal metabolism must be positive, got {amb}")
    return amb * activity * stress


def _rules(disease: DiseaseType, tables: Mapping | None) -> Mapping:
    return (tables or default_tables())["diseases"][DiseaseType(disease).value]


def per_kg_energy(disease: DiseaseType, profile: PatientProfile, tables: Mapping | None = None) -> float:
    return _rules(disease, tables)["energy_kcal_per_kg"] * profile.body_weight


def daily_energy(
    profile: PatientProfile,
    disease: DiseaseType,
    activity: str = "bed_rest",
    stress: str = "minor",
    mode: EnergyMode = EnergyMode.HARRIS_BENEDICT,
    tables: Mapping | None = None,
) -> float:
    if EnergyMode(mode) is EnergyMode.PER_KG:
        return per_kg_energy(disease, profile, tables)
    return total_energy(bmr(profile), activity_factor(activity, tables), stress_factor(stress, tables))


def targets_for(
    disease: DiseaseType, profile: PatientProfile, energy: float, tables: Mapping | None = None
) -> NutrientTargets:
    if not energy > 0:
        raise NutritionError(f"energy must be positive, got {energy}")
    tables = tables or default_tables()
    conv = tables["conversions"]
    rules = _rules(disease, tables)
    bw = profile.body_weight

    values = {
        "p": energy,
        "q": rules["protein_g_per_kg"] * bw,
        "r": rules["fat_energy_fraction"] * energy / conv["kcal_per_g_fat"],
    }
    if "sodium_mg" in rules:
        values["s"] = rules["sodium_mg"]
    if "potassium_meq" in rules:
        values["t"] = rules["potassium_meq"] * conv["mg_per_meq_potassium"]
    if "phosphorus_mg" in rules:
        values["u"] = rules["phosphorus_mg"]
    elif "phosphorus_mg_per_kg" in rules:
        values["u"] = rules["phosphorus_mg_per_kg"] * bw
    if "calcium_mg" in rules:
        values["v"] = rules["calcium_mg"]
    if "carbohydrate_energy_fraction" in rules:
        values["w"] = rules["carbohydrate_energy_fraction"] * energy / conv["kcal_per_g_carbohydrate"]
    return NutrientTargets(**values)
