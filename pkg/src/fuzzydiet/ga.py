"""Index-encoded genetic algorithm for picking a day's foods.

A chromosome is a fixed-length vector of food indices (repeats allowed).
Fitness is the reciprocal of the summed absolute deviation between the
chromosome's nutrient totals and the patient's targets, over the nutrients
tracked for the disease. Parents are drawn by roulette wheel, recombined with
single-point crossover at rate ``pc`` and mutated per gene at rate ``pm``.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .controller import FuzzyParamController, ParamDecision
from .foods import FoodDatabase
from .nutrition import TARGET_NUTRIENT, DiseaseType, NutrientTargets

log = logging.getLogger(__name__)

# Column order of nutrient_totals(): a..h in the fitness notation.
TOTAL_COLUMNS = (
    "energy_kcal",  # a
    "protein_g",  # b
    "fat_g",  # c
    "sodium_mg",  # d
    "potassium_mg",  # e
    "phosphorus_mg",  # f
    "calcium_mg",  # g
    "carb_g",  # h
)

# Target symbols scored for each disease, in the order the terms are written.
DISEASE_TERMS: dict[DiseaseType, tuple[str, ...]] = {
    DiseaseType.NEPHROTIC_SYNDROME: ("p", "q", "r", "s"),
    DiseaseType.ACUTE_RENAL_FAILURE: ("p", "q", "r"),
    DiseaseType.CHRONIC_KIDNEY: ("p", "q", "r", "t"),
    DiseaseType.FINAL_STAGE: ("p", "q", "r", "v", "u"),
    DiseaseType.KIDNEY_STONE: ("p", "q", "w", "r", "v", "u"),
}

BRUTE_FORCE_LIMIT = 10**7
# mutation candidates drawn per gene and round of rejection sampling
_CANDIDATES = 4


class GAConfigError(ValueError):
    pass


class BruteForceGuardError(ValueError):
    pass


class Scaling(str, Enum):
    PER_100G = "per_100g"
    PER_SERVING = "per_serving"


class ParamMode(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"
    FIXED = "fixed"


class MutationPool(str, Enum):
    # indices missing from the chromosome being mutated
    ABSENT = "absent"
    # indices that never occurred in the initial population
    UNINITIALIZED = "uninitialized"


@dataclass(frozen=True)
class FitnessConfig:
    disease: DiseaseType
    targets: NutrientTargets
    epsilon: float = 0.01
    scaling: Scaling = Scaling.PER_100G

    def __post_init__(self):
        object.__setattr__(self, "disease", DiseaseType(self.disease))
        object.__setattr__(self, "scaling", Scaling(self.scaling))
        if not self.epsilon > 0:
            raise GAConfigError(f"epsilon must be positive, got {self.epsilon}")
        expected = frozenset(DISEASE_TERMS[self.disease])
        present = self.targets.present()
        if present != expected:
            raise GAConfigError(
                f"{self.disease.value} scores targets {sorted(expected)}, but targets provide {sorted(present)}"
            )

    @property
    def terms(self) -> tuple[str, ...]:
        return DISEASE_TERMS[self.disease]

    def target_vector(self) -> np.ndarray:
        return np.array([getattr(self.targets, s) for s in self.terms], dtype=float)

    def term_columns(self) -> list[int]:
        return [TOTAL_COLUMNS.index(TARGET_NUTRIENT[s]) for s in self.terms]


@dataclass(frozen=True)
class GaConfig:
    population_size: int
    max_generations: int
    chromosome_length: int = 10
    mode: ParamMode = ParamMode.STATIC
    pc: float | None = None
    pm: float | None = None
    elitism: bool = True
    seed: int = 0
    mutation_pool: MutationPool = MutationPool.ABSENT

    def __post_init__(self):
        object.__setattr__(self, "mode", ParamMode(self.mode))
        object.__setattr__(self, "mutation_pool", MutationPool(self.mutation_pool))
        if self.population_size < 2:
            raise GAConfigError("population size must be at least 2")
        if self.max_generations < 1:
            raise GAConfigError("need at least one generation")
        if self.chromosome_length < 1:
            raise GAConfigError("chromosome length must be at least 1")
        if self.mode is ParamMode.FIXED:
            for name in ("pc", "pm"):
                value = getattr(self, name)
                if value is None or not 0.0 <= value <= 1.0:
                    raise GAConfigError(f"fixed mode needs {name} in [0, 1], got {value}")
        if not 0 <= self.seed < 2**64:
            raise GAConfigError("seed must fit in an unsigned 64-bit integer")


@dataclass
class Trace:
    generation: np.ndarray
    best_fitness: np.ndarray
    mean_fitness: np.ndarray
    pc: np.ndarray
    pm: np.ndarray

    COLUMNS = ("generation", "best_fitness", "mean_fitness", "pc", "pm")

    def __len__(self) -> int:
        return len(self.generation)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.COLUMNS)
        for row in zip(self.generation, self.best_fitness, self.mean_fitness, self.pc, self.pm):
            writer.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]])
        return buf.getvalue()


@dataclass
class RunResult:
    best_genes: tuple[int, ...]
    best_fitness: float
    best_generation: int
    trace: Trace
    seed: int
    initial_population: np.ndarray = field(repr=False)
    final_population: np.ndarray = field(repr=False)


# -- evaluation ----------------------------------------------------------------


class Evaluator:
    """Vectorised fitness for whole populations against one database and config."""

    def __init__(self, db: FoodDatabase, config: FitnessConfig):
        self.db = db
        self.config = config
        self.lookup = db.row_lookup()
        self.matrix = db.nutrient_matrix(TOTAL_COLUMNS, per_serving=config.scaling is Scaling.PER_SERVING)
        self.columns = config.term_columns()
        self.target = config.target_vector()
        self.scored = np.ascontiguousarray(self.matrix[:, self.columns])

    def rows(self, genes: np.ndarray) -> np.ndarray:
        genes = np.asarray(genes, dtype=np.int64)
        bad = (genes < 0) | (genes >= len(self.lookup))
        rows = np.where(bad, -1, self.lookup[np.where(bad, 0, genes)])
        if np.any(rows < 0):
            missing = sorted(set(genes[rows < 0].tolist()))
            raise KeyError(f"chromosome references unknown food index {missing[:5]}")
        return rows

    def totals(self, population: np.ndarray, checked: bool = True) -> np.ndarray:
        # sorting makes the float sum independent of gene order
        pop = np.sort(np.atleast_2d(population), axis=1)
        rows = self.rows(pop) if checked else self.lookup[pop]
        return self.matrix[rows].sum(axis=1)

    def deviation(self, population: np.ndarray, checked: bool = True) -> np.ndarray:
        pop = np.sort(np.atleast_2d(population), axis=1)
        rows = self.rows(pop) if checked else self.lookup[pop]
        return np.abs(self.target - self.scored[rows].sum(axis=1)).sum(axis=1)

    def __call__(self, population: np.ndarray, checked: bool = True) -> np.ndarray:
        """Fitness per row. ``checked=False`` skips index validation for
        populations known to hold only table indices (the GA loop)."""
        return 1.0 / (self.deviation(population, checked) + self.config.epsilon)


def nutrient_totals(chrom: Sequence[int], db: FoodDatabase, scaling: Scaling = Scaling.PER_100G) -> np.ndarray:
    """Sums (a, b, c, d, e, f, g, h) = energy, protein, fat, sodium, potassium,
    phosphorus, calcium, carbohydrate over the chromosome's foods."""
    lookup = db.row_lookup()
    matrix = db.nutrient_matrix(TOTAL_COLUMNS, per_serving=Scaling(scaling) is Scaling.PER_SERVING)
    genes = np.sort(np.asarray(chrom, dtype=np.int64))
    rows = []
    for g in genes:
        if not 0 <= g < len(lookup) or lookup[g] < 0:
            raise KeyError(f"chromosome references unknown food index {int(g)}")
        rows.append(lookup[g])
    return matrix[rows].sum(axis=0)


def fitness(chrom: Sequence[int], db: FoodDatabase, config: FitnessConfig) -> float:
    return float(Evaluator(db, config)(np.asarray([chrom]))[0])


# -- operators -------------------------------------------------------------------


def init_population(size: int, length: int, db: FoodDatabase, rng: np.random.Generator) -> np.ndarray:
    if len(db) == 0:
        raise GAConfigError("food database is empty")
    return db.indices[rng.integers(0, len(db), size=(size, length))]


def _uniform_ints(rng: np.random.Generator, n: int, size) -> np.ndarray:
    """Uniform integers in [0, n); much cheaper than ``rng.integers`` on small arrays."""
    return (rng.random(size) * n).astype(np.int64)


def roulette_select(fitnesses: Sequence[float], rng: np.random.Generator, size: int | None = None):
    """Indices drawn with probability proportional to fitness."""
    f = np.asarray(fitnesses, dtype=float)
    cum = np.cumsum(f)
    r = rng.random(size) * cum[-1]
    idx = np.minimum(np.searchsorted(cum, r, side="right"), len(f) - 1)
    return int(idx) if size is None else idx


def crossover_population(parents: np.ndarray, pc: float, rng: np.random.Generator) -> np.ndarray:
    """Pair rows (0,1), (2,3), ... and apply gated single-point crossover.

    An odd last parent passes through unchanged.
    """
    children = parents.copy()
    n_pairs = len(parents) // 2
    length = parents.shape[1]
    if n_pairs == 0 or length < 2:
        return children
    gate = rng.random(n_pairs) < pc
    cuts = 1 + _uniform_ints(rng, length - 1, n_pairs)
    a = parents[0 : 2 * n_pairs : 2]
    b = parents[1 : 2 * n_pairs : 2]
    head = np.arange(length)[None, :] < cuts[:, None]
    swap = gate[:, None] & ~head
    children[0 : 2 * n_pairs : 2] = np.where(swap, b, a)
    children[1 : 2 * n_pairs : 2] = np.where(swap, a, b)
    return children


def crossover_single_point(p1, p2, pc: float, rng: np.random.Generator, cut: int | None = None):
    """Children of one pair. ``cut`` forces the crossover point (gate still applies)."""
    p1 = np.asarray(p1)
    p2 = np.asarray(p2)
    if p1.shape != p2.shape:
        raise ValueError("parents must have equal length")
    if cut is None:
        c = crossover_population(np.stack([p1, p2]), pc, rng)
        return c[0], c[1]
    if not 1 <= cut < len(p1):
        raise ValueError(f"cut point must be in 1..{len(p1) - 1}")
    if rng.random() >= pc:
        return p1.copy(), p2.copy()
    return np.concatenate([p1[:cut], p2[cut:]]), np.concatenate([p2[:cut], p1[cut:]])


def mutate_population(
    population: np.ndarray,
    pm: float,
    indices: np.ndarray,
    rng: np.random.Generator,
    pool: np.ndarray | None = None,
) -> np.ndarray:
    """Per-gene mutation at rate ``pm``.

    With ``pool=None`` a mutated gene is drawn uniformly from the indices not
    present in its chromosome (before mutation); when the chromosome already
    holds every index, it falls back to the full range. An explicit ``pool``
    (non-empty) is sampled uniformly instead.
    """
    out = population.copy()
    mask = rng.random(population.shape) < pm
    if not mask.any():
        return out
    rows, cols = np.nonzero(mask)
    if pool is not None:
        out[rows, cols] = pool[_uniform_ints(rng, len(pool), len(rows))]
        return out

    # Rejection sampling, a few candidates per gene at a time: the first
    # candidate not already in the chromosome is uniform over the absent indices.
    n = len(indices)
    current = population[rows]
    rowid = np.arange(len(rows))[:, None]
    present = np.zeros((len(rows), int(max(indices.max(), current.max())) + 1), dtype=bool)
    present[rowid, current] = True
    new = np.empty(len(rows), dtype=population.dtype)
    pending = np.arange(len(rows))
    if n <= population.shape[1]:
        # a chromosome holding every index has nothing absent: use the full range
        full = present[:, indices].all(axis=1)
        new[full] = indices[_uniform_ints(rng, n, int(full.sum()))]
        pending = pending[~full]
    while len(pending):
        cand = indices[_uniform_ints(rng, n, (len(pending), _CANDIDATES))]
        clash = present[pending[:, None], cand]
        first = clash.argmin(axis=1)
        ok = ~clash[np.arange(len(pending)), first]
        new[pending[ok]] = cand[ok, first[ok]]
        pending = pending[~ok]
    out[rows, cols] = new
    return out


def mutate(chrom, pm: float, db: FoodDatabase, rng: np.random.Generator, pool=None) -> np.ndarray:
    pool = None if pool is None else np.asarray(pool, dtype=np.int64)
    return mutate_population(np.asarray([chrom], dtype=np.int64), pm, db.indices, rng, pool)[0]


# -- driver --------------------------------------------------------------------


def param_schedule(
    config: GaConfig, controller: FuzzyParamController | None
) -> Callable[[int], ParamDecision]:
    if config.mode is ParamMode.FIXED:
        fixed = ParamDecision(float(config.pc), float(config.pm))
        return lambda t: fixed
    if controller is None:
        raise GAConfigError(f"{config.mode.value} mode needs a fuzzy controller")
    if config.mode is ParamMode.STATIC:
        once = controller.decide(config.population_size, config.max_generations)
        return lambda t: once
    cache: dict[int, ParamDecision] = {}

    def dynamic(t: int) -> ParamDecision:
        if t not in cache:
            cache[t] = controller.decide(config.population_size, t)
        return cache[t]

    return dynamic


def _best_row(pop: np.ndarray, fit: np.ndarray) -> int:
    """Fittest row; ties go to the lexicographically smallest genes."""
    top = np.flatnonzero(fit == fit.max())
    if len(top) == 1:
        return int(top[0])
    return int(min(top, key=lambda i: tuple(pop[i].tolist())))


def evolve(
    db: FoodDatabase,
    fit_config: FitnessConfig,
    ga_config: GaConfig,
    controller: FuzzyParamController | None = None,
) -> RunResult:
    if len(db) == 0:
        raise GAConfigError("food database is empty")
    evaluate = Evaluator(db, fit_config)
    schedule = param_schedule(ga_config, controller)
    rng = np.random.default_rng(ga_config.seed)
    size, gens = ga_config.population_size, ga_config.max_generations

    pop = init_population(size, ga_config.chromosome_length, db, rng)
    initial = pop.copy()
    fit = evaluate(pop)

    pool = None
    if ga_config.mutation_pool is MutationPool.UNINITIALIZED:
        pool = np.setdiff1d(db.indices, initial)
        if len(pool) == 0:
            pool = None

    i = _best_row(pop, fit)
    best_genes, best_fit, best_gen = tuple(pop[i].tolist()), float(fit[i]), 0

    trace = Trace(
        generation=np.arange(1, gens + 1),
        best_fitness=np.empty(gens),
        mean_fitness=np.empty(gens),
        pc=np.empty(gens),
        pm=np.empty(gens),
    )
    for t in range(gens):
        params = schedule(t)
        elite, elite_fit = pop[i].copy(), fit[i]

        parents = pop[roulette_select(fit, rng, size)]
        children = crossover_population(parents, params.pc, rng)
        children = mutate_population(children, params.pm, db.indices, rng, pool)
        child_fit = evaluate(children, checked=False)
        if ga_config.elitism:
            worst = int(np.argmin(child_fit))
            children[worst] = elite
            child_fit[worst] = elite_fit
        pop, fit = children, child_fit
        i = _best_row(pop, fit)

        trace.best_fitness[t] = fit[i]
        trace.mean_fitness[t] = fit.sum() / size
        trace.pc[t] = params.pc
        trace.pm[t] = params.pm
        if fit[i] > best_fit:
            best_genes, best_fit, best_gen = tuple(pop[i].tolist()), float(fit[i]), t + 1

    log.debug("seed %d: best fitness %.6g at generation %d", ga_config.seed, best_fit, best_gen)
    return RunResult(best_genes, best_fit, best_gen, trace, ga_config.seed, initial, pop)


def brute_force_best(
    db: FoodDatabase, fit_config: FitnessConfig, length: int, limit: int = BRUTE_FORCE_LIMIT
) -> tuple[tuple[int, ...], float]:
    """Exhaustive maximiser over all ordered chromosomes of ``length`` genes.

    Enumerates in lexicographic order of sorted food indices and keeps the
    first maximum, so ties resolve to the lexicographically smallest genes.
    """
    n = len(db)
    if n == 0:
        raise GAConfigError("food database is empty")
    if n**length > limit:
        raise BruteForceGuardError(
            f"{n}^{length} = {n**length:.3g} chromosomes exceeds the enumeration limit of {limit:.3g}; "
            "use a shorter chromosome or a smaller food table"
        )
    evaluate = Evaluator(db, fit_config)
    foods = np.sort(db.indices)
    total = n**length
    weights = n ** np.arange(length - 1, -1, -1)
    best_k, best_f = -1, -np.inf
    chunk = 1 << 16
    for start in range(0, total, chunk):
        k = np.arange(start, min(start + chunk, total))
        digits = (k[:, None] // weights[None, :]) % n
        f = evaluate(foods[digits])
        j = int(np.argmax(f))
        if f[j] > best_f:
            best_k, best_f = int(k[j]), float(f[j])
    genes = tuple(int(foods[(best_k // w) % n]) for w in weights)
    return genes, best_f
