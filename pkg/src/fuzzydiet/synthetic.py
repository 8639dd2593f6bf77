"""Synthetic food tables with the same schema as the survey data.

The original 400-food survey table is not public. These generators build
stand-ins: plausible per-100 g compositions, the four published sample rows
at their published indices, and optionally a planted set of foods whose
totals hit a target vector exactly.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .foods import FoodDatabase, FoodRecord
from .ga import DISEASE_TERMS
from .nutrition import TARGET_NUTRIENT, DiseaseType, NutrientTargets

PUBLISHED_ROWS = (
    FoodRecord(229, "IDH001", "Eggs of local chicken", 174, 11, 14, 1.2, 68, 268, 190, 141, 60),
    FoodRecord(353, "IDJ010", "Condensed milk- unsweetened", 138, 7, 7.9, 9.9, 243, 195, 140, 303, 100),
    FoodRecord(114, "IDA005", "Soy milk", 41, 3.5, 2.5, 5, 50, 45, 0, 0, 200),
    FoodRecord(231, "IDA057", "Fried chicken -Breast", 298, 34, 17, 0.1, 90, 284, 0, 0, 100),
)

SERVINGS = (13, 15, 20, 25, 30, 40, 45, 50, 60, 75, 90, 100, 100, 100, 135, 150, 200)


def _random_food(index: int, rng: np.random.Generator) -> FoodRecord:
    energy = float(np.clip(rng.lognormal(np.log(180), 0.7), 5, 900))
    share = rng.dirichlet([1.2, 1.0, 1.6])  # protein, fat, carbohydrate energy share
    protein = energy * share[0] / 4
    fat = energy * share[1] / 9
    carb = energy * share[2] / 4
    sodium = 0.0 if rng.random() < 0.25 else rng.lognormal(np.log(80), 1.2)
    potassium = 0.0 if rng.random() < 0.1 else rng.lognormal(np.log(250), 0.8)
    phosphorus = rng.lognormal(np.log(140), 0.7)
    calcium = rng.lognormal(np.log(50), 1.0)
    return FoodRecord(
        index,
        f"SYN{index:03d}",
        f"Synthetic food {index:03d}",
        *(round(float(v), 1) for v in (energy, protein, fat, carb, calcium, phosphorus, sodium, potassium)),
        float(rng.choice(SERVINGS)),
    )


def synthetic_database(size: int = 400, seed: int = 2012, published: bool = True) -> FoodDatabase:
    """``size`` foods indexed 1..size; published sample rows keep their indices."""
    rng = np.random.default_rng(seed)
    fixed = {r.index: r for r in PUBLISHED_ROWS if published and r.index <= size}
    records = [fixed.get(i) or _random_food(i, rng) for i in range(1, size + 1)]
    return FoodDatabase(records)


def plant_solution(
    db: FoodDatabase,
    disease: DiseaseType,
    targets: NutrientTargets,
    count: int = 10,
    seed: int = 0,
) -> tuple[FoodDatabase, tuple[int, ...]]:
    """Overwrite ``count`` random synthetic rows so that their per-100 g sums
    hit every target the disease tracks. Returns the new table and the planted
    indices (in ascending order)."""
    rng = np.random.default_rng(seed)
    published = {r.index for r in PUBLISHED_ROWS}
    candidates = np.array([r.index for r in db if r.index not in published])
    planted = np.sort(rng.choice(candidates, size=count, replace=False))

    columns = {TARGET_NUTRIENT[s]: getattr(targets, s) for s in DISEASE_TERMS[DiseaseType(disease)]}
    parts = {}
    for column, total in columns.items():
        share = rng.dirichlet(np.full(count, 4.0)) * total
        values = [round(float(v), 2) for v in share[:-1]]
        values.append(total - sum(values))
        if values[-1] < 0:
            raise ValueError(f"could not split {column} target {total} into non-negative parts")
        parts[column] = values

    by_index = {r.index: r for r in db}
    for k, index in enumerate(planted):
        rec = by_index[int(index)]
        by_index[int(index)] = replace(
            rec,
            code=f"PLT{k + 1:03d}",
            name=f"Planted food {k + 1:02d}",
            **{column: values[k] for column, values in parts.items()},
        )
    return FoodDatabase(by_index[r.index] for r in db), tuple(int(i) for i in planted)


def small_database(size: int = 12, seed: int = 7) -> FoodDatabase:
    """Small random table for exhaustive-search cross-checks."""
    rng = np.random.default_rng(seed)
    return FoodDatabase(_random_food(i, rng) for i in range(1, size + 1))
