"""Command-line harness: ``fuzzydiet run | compare | oracle``.

Every number the CLI prints comes straight from the library; the CLI only
parses flags, wires the pieces together and formats files.

Exit codes
----------
0  success
2  usage or input error (bad flag, unknown label, inconsistent targets)
3  data error (unreadable or malformed food table / controller config)
4  brute-force guard exceeded (oracle instance too large)

Output files
------------
``trace.csv``       one row per generation: generation,best_fitness,mean_fitness,pc,pm
``report.txt``      human-readable run report, first line ``fuzzydiet-report v1``
``comparison.csv``  one row per (configuration, disease), see COMPARISON_HEADER

Batch runs derive the seed of run ``i`` (0-based) as ``--seed + i``.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import __version__
from .controller import FuzzyParamController, build_default_controller, load_controller
from .foods import FoodDatabase, FoodDataError, load_csv
from .fuzzy import FuzzyConfigError
from .ga import (
    TOTAL_COLUMNS,
    BruteForceGuardError,
    FitnessConfig,
    GaConfig,
    GAConfigError,
    ParamMode,
    RunResult,
    Scaling,
    brute_force_best,
    evolve,
    nutrient_totals,
)
from .nutrition import (
    TARGET_NUTRIENT,
    TARGET_UNITS,
    DiseaseType,
    EnergyMode,
    NutrientTargets,
    NutritionError,
    PatientProfile,
    daily_energy,
    default_tables,
    targets_for,
)

log = logging.getLogger("fuzzydiet")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_GUARD = 0, 2, 3, 4
REPORT_VERSION = "fuzzydiet-report v1"
COMPARISON_HEADER = (
    "config",
    "disease",
    "mode",
    "pop",
    "gens",
    "pc",
    "pm",
    "seeds",
    "best_fitness",
    "mean_best_fitness",
    "median_best_fitness",
    "failed",
)
# population, generations pairs compared by default
DEFAULT_CONFIGS = ((100, 100), (150, 800), (150, 1500))
# fixed-parameter baseline used by ``compare --fixed-baseline``
BASELINE_PC, BASELINE_PM = 0.6, 0.13


class UsageError(Exception):
    pass


def _shipped_foods() -> Path:
    return Path(str(resources.files("fuzzydiet.data").joinpath("foods_synthetic.csv")))


# -- argument parsing ----------------------------------------------------------


def _add_problem_args(p: argparse.ArgumentParser) -> None:
    tables = default_tables()
    p.add_argument("--foods", type=Path, default=None, help="food CSV (default: bundled synthetic table)")
    p.add_argument("--sex", choices=("male", "female"), default="male")
    p.add_argument("--weight-kg", type=float, default=50.0)
    p.add_argument("--height-cm", type=float, default=165.0)
    p.add_argument("--age", type=float, default=40.0)
    p.add_argument("--activity", choices=sorted(tables["activity_factors"]), default="bed_rest")
    p.add_argument("--stress", choices=sorted(tables["stress_factors"]), default="minor")
    p.add_argument("--energy-mode", choices=[m.value for m in EnergyMode], default=EnergyMode.HARRIS_BENEDICT.value)
    p.add_argument(
        "--target",
        action="append",
        default=[],
        metavar="SYM=VALUE",
        help="override one target (symbols p q r s t u v w); repeatable",
    )
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--scaling", choices=("per-100g", "per-serving"), default="per-100g")
    p.add_argument("--length", type=int, default=10, help="foods per diet (chromosome length)")


def _add_ga_args(p: argparse.ArgumentParser, seeds: bool) -> None:
    p.add_argument("--mode", choices=[m.value for m in ParamMode], default=ParamMode.STATIC.value)
    p.add_argument("--pc", type=float, default=None, help="crossover probability (fixed mode)")
    p.add_argument("--pm", type=float, default=None, help="mutation probability (fixed mode)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--controller", type=Path, default=None, help="membership config JSON (default: bundled)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    if seeds:
        p.add_argument("--seeds", type=int, default=5, help="runs per cell; run i uses seed+i")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzydiet", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="optimise one diet")
    run.add_argument("--disease", choices=[d.value for d in DiseaseType], required=True)
    run.add_argument("--pop", type=int, default=150)
    run.add_argument("--gens", type=int, default=1500)
    _add_problem_args(run)
    _add_ga_args(run, seeds=False)

    cmp_ = sub.add_parser("compare", help="fuzzy-adaptive vs fixed parameters over seeds")
    cmp_.add_argument(
        "--disease",
        choices=[d.value for d in DiseaseType],
        action="append",
        default=None,
        help="repeatable; default all five",
    )
    cmp_.add_argument("--pop", type=int, action="append", default=None, help="pair with --gens; repeatable")
    cmp_.add_argument("--gens", type=int, action="append", default=None)
    cmp_.add_argument("--fixed-baseline", action="store_true", help="add fixed-parameter rows (--pc/--pm)")
    cmp_.add_argument("--jobs", type=int, default=1, help="worker processes")
    _add_problem_args(cmp_)
    _add_ga_args(cmp_, seeds=True)

    ora = sub.add_parser("oracle", help="exhaustive optimum for small instances")
    ora.add_argument("--disease", choices=[d.value for d in DiseaseType], required=True)
    _add_problem_args(ora)
    ora.set_defaults(length=3)
    return parser


# -- shared wiring -------------------------------------------------------------


def _profile(args) -> PatientProfile:
    return PatientProfile(args.sex, args.weight_kg, args.height_cm, args.age)


def _parse_overrides(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for item in items:
        sym, sep, value = item.partition("=")
        sym = sym.strip()
        if not sep or sym not in TARGET_NUTRIENT:
            raise UsageError(f"--target: expected SYM=VALUE with SYM in {sorted(TARGET_NUTRIENT)}, got {item!r}")
        try:
            out[sym] = float(value)
        except ValueError:
            raise UsageError(f"--target {sym}: {value!r} is not a number") from None
    return out


def problem(args, disease: str) -> tuple[float, FitnessConfig]:
    """Energy requirement and fitness configuration for one disease."""
    disease = DiseaseType(disease)
    profile = _profile(args)
    energy = daily_energy(profile, disease, args.activity, args.stress, EnergyMode(args.energy_mode))
    targets = targets_for(disease, profile, energy)
    overrides = _parse_overrides(args.target)
    if overrides:
        targets = NutrientTargets.from_mapping({**targets.as_dict(), **overrides})
    scaling = Scaling.PER_SERVING if args.scaling == "per-serving" else Scaling.PER_100G
    return energy, FitnessConfig(disease, targets, args.epsilon, scaling)


def _foods(args) -> FoodDatabase:
    return load_csv(args.foods or _shipped_foods())


def _controller(path: Path | None) -> FuzzyParamController:
    return load_controller(path) if path else build_default_controller()


def _ga_config(args, pop: int, gens: int, seed: int, mode: str | None = None) -> GaConfig:
    mode = ParamMode(mode or args.mode)
    fixed = mode is ParamMode.FIXED
    return GaConfig(
        population_size=pop,
        max_generations=gens,
        chromosome_length=args.length,
        mode=mode,
        pc=args.pc if fixed else None,
        pm=args.pm if fixed else None,
        seed=seed,
    )


# -- run -----------------------------------------------------------------------


def format_report(
    db: FoodDatabase, energy: float, fit_config: FitnessConfig, ga_config: GaConfig, result: RunResult
) -> str:
    """Versioned plain-text report: header, chosen foods, totals vs targets."""
    buf = io.StringIO()
    w = buf.write
    w(f"{REPORT_VERSION}\n")
    w(f"Energy requirement: {energy:.2f} kcal\n")
    w(f"Disease: {fit_config.disease.value}\n")
    w(f"Population: {ga_config.population_size}  Generations: {ga_config.max_generations}  Mode: {ga_config.mode.value}\n")
    w(f"Crossover probability: {result.trace.pc[0]:.6f}  Mutation probability: {result.trace.pm[0]:.6f}\n")
    w(f"Seed: {result.seed}\n")
    w(f"Best fitness: {result.best_fitness:.9g} (generation {result.best_generation})\n\n")

    per_serving = fit_config.scaling is Scaling.PER_SERVING
    w(f"Foods ({'per serving' if per_serving else 'per 100 g'}):\n")
    w(f"{'index':>6}  {'code':<8} {'serving_g':>9} {'energy_kcal':>11}  name\n")
    for index in sorted(result.best_genes):
        rec = db.get(index)
        kcal = rec.energy_kcal * (rec.serving_g / 100 if per_serving else 1)
        w(f"{rec.index:>6}  {rec.code:<8} {rec.serving_g:>9g} {kcal:>11.2f}  {rec.name}\n")

    totals = nutrient_totals(result.best_genes, db, fit_config.scaling)
    w("\nTotals vs targets:\n")
    w(f"{'nutrient':<14} {'total':>12} {'target':>12} {'deviation':>12}\n")
    for sym in fit_config.terms:
        column = TARGET_NUTRIENT[sym]
        total = totals[TOTAL_COLUMNS.index(column)]
        target = getattr(fit_config.targets, sym)
        w(f"{column:<14} {total:>12.2f} {target:>12.2f} {total - target:>12.2f}  {TARGET_UNITS[sym]}\n")
    return buf.getvalue()


def cmd_run(args) -> int:
    energy, fit_config = problem(args, args.disease)
    db = _foods(args)
    ga_config = _ga_config(args, args.pop, args.gens, args.seed)
    controller = None if ga_config.mode is ParamMode.FIXED else _controller(args.controller)
    result = evolve(db, fit_config, ga_config, controller)

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "trace.csv").write_text(result.trace.to_csv())
    report = format_report(db, energy, fit_config, ga_config, result)
    (args.out / "report.txt").write_text(report)
    print(report, end="")
    return EXIT_OK


# -- compare -------------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    config: int
    fit_config: FitnessConfig
    ga_config: GaConfig
    controller_path: Path | None


def _run_cell(db: FoodDatabase, cell: Cell) -> float:
    controller = None if cell.ga_config.mode is ParamMode.FIXED else _controller(cell.controller_path)
    return evolve(db, cell.fit_config, cell.ga_config, controller).best_fitness


def _cells(args) -> list[tuple[int, str, int, int, str]]:
    """(config index, disease, pop, gens, mode) in output order."""
    pops = args.pop or [p for p, _ in DEFAULT_CONFIGS]
    gens = args.gens or [g for _, g in DEFAULT_CONFIGS]
    if len(pops) != len(gens):
        raise UsageError("--pop and --gens must be given the same number of times")
    diseases = args.disease or [d.value for d in DiseaseType]
    modes = [args.mode]
    if args.fixed_baseline and args.mode != ParamMode.FIXED.value:
        modes.append(ParamMode.FIXED.value)
    out = []
    for mode in modes:
        for pop, gen in zip(pops, gens):
            for disease in diseases:
                out.append((len(out), disease, pop, gen, mode))
    return out


def cmd_compare(args) -> int:
    if args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    if args.fixed_baseline or args.mode == ParamMode.FIXED.value:
        args.pc = BASELINE_PC if args.pc is None else args.pc
        args.pm = BASELINE_PM if args.pm is None else args.pm
    db = _foods(args)
    rows = _cells(args)

    cells, failed = [], {}
    for index, disease, pop, gen, mode in rows:
        try:
            _, fit_config = problem(args, disease)
            for i in range(args.seeds):
                ga_config = _ga_config(args, pop, gen, args.seed + i, mode)
                cells.append(Cell(index, fit_config, ga_config, args.controller))
        except (GAConfigError, NutritionError) as exc:
            log.error("configuration %d (%s): %s", index, disease, exc)
            failed[index] = args.seeds

    results: dict[int, list[float]] = {index: [] for index, *_ in rows}
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            futures = [pool.submit(_run_cell, db, c) for c in cells]
            outcomes = []
            for f in futures:
                try:
                    outcomes.append(f.result())
                except Exception as exc:  # recorded, the sweep carries on
                    outcomes.append(exc)
    else:
        outcomes = []
        for c in cells:
            try:
                outcomes.append(_run_cell(db, c))
            except Exception as exc:
                outcomes.append(exc)
    for cell, outcome in zip(cells, outcomes):
        if isinstance(outcome, Exception):
            log.error("configuration %d seed %d failed: %s", cell.config, cell.ga_config.seed, outcome)
            failed[cell.config] = failed.get(cell.config, 0) + 1
        else:
            results[cell.config].append(outcome)

    controller = _controller(args.controller)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMPARISON_HEADER)
    for index, disease, pop, gen, mode in rows:
        if mode == ParamMode.FIXED.value:
            pc, pm = args.pc, args.pm
        elif mode == ParamMode.STATIC.value:
            d = controller.decide(pop, gen)
            pc, pm = d.pc, d.pm
        else:  # dynamic: parameters change every generation
            pc = pm = ""
        best = results[index]
        writer.writerow(
            [
                index,
                disease,
                mode,
                pop,
                gen,
                repr(pc) if pc != "" else "",
                repr(pm) if pm != "" else "",
                args.seeds,
                ";".join(repr(b) for b in best),
                repr(statistics.fmean(best)) if best else "",
                repr(float(statistics.median(best))) if best else "",
                failed.get(index, 0),
            ]
        )
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "comparison.csv").write_text(buf.getvalue())
    print(buf.getvalue(), end="")
    return EXIT_OK


# -- oracle --------------------------------------------------------------------


def cmd_oracle(args) -> int:
    _, fit_config = problem(args, args.disease)
    db = _foods(args)
    genes, best = brute_force_best(db, fit_config, args.length)
    print(f"optimum: {' '.join(str(g) for g in genes)}")
    print(f"fitness: {best!r}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "oracle": cmd_oracle}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, NutritionError, GAConfigError) as exc:
        print(f"fuzzydiet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FoodDataError, FuzzyConfigError, OSError) as exc:
        print(f"fuzzydiet: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BruteForceGuardError as exc:
        print(f"fuzzydiet: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
