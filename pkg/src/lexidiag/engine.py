"""The generational loop: initialize, evaluate, select, mutate, replace.

Budget model: one generation costs population_size * total_cases evaluations,
and a run executes floor(budget / cost) generations. Records charge
cumulative evaluations as generation * cost — the initial population's
evaluation is charged to the first selection round, which keeps the budget
table arithmetic exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from lexidiag._engine import get_kernels
from lexidiag.core import Population, RandomSource, random_genotype
from lexidiag.diagnostics import (
    DiagnosticKind,
    TestCaseMap,
    build_case_map,
    evaluate_population,
)
from lexidiag.errors import InvalidConfigError
from lexidiag.metrics import (
    GenerationRecord,
    activation_gene_coverage,
    best_performance,
    population_has_satisfactory,
    satisfactory_trait_coverage,
)

RecordSink = Callable[[GenerationRecord], None]


@dataclass(frozen=True)
class MutationConfig:
    """Asexual point mutation: per-gene Gaussian bumps, abs/reflect at bounds."""

    per_gene_rate: float = 0.0007
    gaussian_mean: float = 0.0
    gaussian_sd: float = 1.0
    upper_threshold: float = 100.0

    def validate(self) -> None:
        if not 0.0 <= self.per_gene_rate <= 1.0:
            raise InvalidConfigError(f"per_gene_rate must be in [0, 1]: {self.per_gene_rate}")
        if self.gaussian_sd <= 0.0:
            raise InvalidConfigError(f"gaussian_sd must be > 0: {self.gaussian_sd}")
        if self.upper_threshold <= 0.0:
            raise InvalidConfigError(f"upper_threshold must be > 0: {self.upper_threshold}")


@dataclass(frozen=True)
class RunConfig:
    diagnostic: DiagnosticKind
    population_size: int
    evaluation_budget: int
    dim: int = 100
    redundant_cases: int = 0
    mutation: MutationConfig = field(default_factory=MutationConfig)
    seed: int = 0
    snapshot_stride_evals: int = 10**8

    @property
    def total_cases(self) -> int:
        return self.dim + self.redundant_cases

    def validate(self) -> None:
        if self.population_size < 1:
            raise InvalidConfigError(f"population_size must be >= 1: {self.population_size}")
        if self.dim < 1:
            raise InvalidConfigError(f"dim must be >= 1: {self.dim}")
        if self.redundant_cases < 0:
            raise InvalidConfigError(f"redundant_cases must be >= 0: {self.redundant_cases}")
        if self.redundant_cases > 0 and self.diagnostic is not DiagnosticKind.CONTRADICTORY_OBJECTIVES:
            raise InvalidConfigError("redundant cases apply only to the contradictory diagnostic")
        if self.snapshot_stride_evals < 1:
            raise InvalidConfigError("snapshot_stride_evals must be >= 1")
        per_generation = self.population_size * self.total_cases
        if self.evaluation_budget < per_generation:
            raise InvalidConfigError(
                f"budget {self.evaluation_budget} is below one generation's cost {per_generation}"
            )
        self.mutation.validate()


@dataclass
class RunResult:
    config: RunConfig
    case_map: TestCaseMap
    generations: int
    total_evaluations: int
    final_best_performance: float
    best_performance: float
    final_activation_coverage: Optional[int]
    best_activation_coverage: Optional[int]
    final_satisfactory_coverage: int
    best_satisfactory_coverage: int
    first_satisfaction_evals: Optional[int]


def generations_for_budget(budget: int, population_size: int, total_cases: int) -> int:
    """Whole generations a budget affords at population_size * total_cases each."""
    if budget < 1 or population_size < 1 or total_cases < 1:
        raise InvalidConfigError(
            f"budget/population/cases must all be >= 1: "
            f"({budget}, {population_size}, {total_cases})"
        )
    return budget // (population_size * total_cases)


def reflect_into_bounds(value: float, upper: float = 100.0) -> float:
    """Fold a post-mutation gene back into [0, upper]: abs below 0, reflect above."""
    v = value
    while v < 0.0 or v > upper:
        if v < 0.0:
            v = -v
        else:
            v = upper - (v - upper)
    return v


def mutate(genotype: np.ndarray, cfg: MutationConfig, rng: RandomSource) -> np.ndarray:
    """Point-mutate one genotype; untouched genes are copied bit-exactly.

    Consumes draws exactly like one row of the batch kernels: per gene one
    uniform, plus one Gaussian when it triggers.
    """
    out = np.array(genotype, dtype=np.float64, copy=True)
    for j in range(out.shape[0]):
        if rng.random() < cfg.per_gene_rate:
            z = rng.gauss()
            v = out[j] + (cfg.gaussian_mean + cfg.gaussian_sd * z)
            out[j] = reflect_into_bounds(v, cfg.upper_threshold)
    return out


def _snapshot(pop: Population, generation: int, per_generation: int,
              best_so_far: float, first_sat: Optional[int]):
    perf = best_performance(pop)
    best_so_far = max(best_so_far, perf)
    if first_sat is None and population_has_satisfactory(pop):
        # Generation 0's evaluation is charged to the first selection round.
        first_sat = max(generation, 1) * per_generation
    rec = GenerationRecord(
        generation=generation,
        cumulative_evaluations=generation * per_generation,
        best_performance=perf,
        best_so_far=best_so_far,
        activation_gene_coverage=(
            activation_gene_coverage(pop) if pop.activations is not None else None
        ),
        satisfactory_trait_coverage=satisfactory_trait_coverage(pop),
        first_satisfaction_evals=first_sat,
    )
    return rec, best_so_far, first_sat


def run(cfg: RunConfig, sink: Optional[RecordSink] = None,
        engine: str | None = None) -> RunResult:
    """Execute one evolutionary run to budget exhaustion.

    Emits a (stride-downsampled) GenerationRecord stream to sink: generation 0,
    every stride crossing, and the final post-budget population.
    """
    cfg.validate()
    kern = get_kernels(engine)
    rng = RandomSource(cfg.seed)
    case_map = build_case_map(cfg.dim, cfg.redundant_cases, rng)
    n = cfg.population_size
    genes = np.stack([random_genotype(cfg.dim, rng) for _ in range(n)])

    total_generations = generations_for_budget(
        cfg.evaluation_budget, n, case_map.total_cases
    )
    per_generation = n * case_map.total_cases
    mut = cfg.mutation

    best_so_far = float("-inf")
    best_act: Optional[int] = None
    best_sat = 0
    first_sat: Optional[int] = None
    next_mark = cfg.snapshot_stride_evals
    rec = None

    for gen in range(total_generations + 1):
        traits, activations = evaluate_population(genes, cfg.diagnostic)
        pop = Population(genes, traits, activations)
        rec, best_so_far, first_sat = _snapshot(
            pop, gen, per_generation, best_so_far, first_sat
        )
        if rec.activation_gene_coverage is not None:
            best_act = max(best_act or 0, rec.activation_gene_coverage)
        best_sat = max(best_sat, rec.satisfactory_trait_coverage)
        if sink is not None:
            emit = gen == 0 or gen == total_generations
            if rec.cumulative_evaluations >= next_mark:
                emit = True
                next_mark = (rec.cumulative_evaluations // cfg.snapshot_stride_evals + 1) \
                    * cfg.snapshot_stride_evals
            if emit:
                sink(rec)
        if gen == total_generations:
            break
        parents = kern.select_parents(traits, case_map.case_to_trait, n, rng)
        genes = kern.mutate_batch(
            genes[parents], mut.per_gene_rate, mut.gaussian_mean,
            mut.gaussian_sd, mut.upper_threshold, rng,
        )

    return RunResult(
        config=cfg,
        case_map=case_map,
        generations=total_generations,
        total_evaluations=total_generations * per_generation,
        final_best_performance=rec.best_performance,
        best_performance=best_so_far,
        final_activation_coverage=rec.activation_gene_coverage,
        best_activation_coverage=best_act,
        final_satisfactory_coverage=rec.satisfactory_trait_coverage,
        best_satisfactory_coverage=best_sat,
        first_satisfaction_evals=first_sat,
    )
