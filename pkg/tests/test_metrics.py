"""Population metrics: performance, satisfaction, coverage."""

import numpy as np
import pytest

from lexidiag.core import Population, RandomSource
from lexidiag.diagnostics import DiagnosticKind, evaluate_population
from lexidiag.errors import ContractViolationError
from lexidiag.metrics import (
    GenerationRecord,
    activation_gene_coverage,
    average_trait_score,
    best_performance,
    first_satisfaction,
    is_satisfactory,
    population_has_satisfactory,
    satisfactory_trait_coverage,
)

from conftest import population_from_traits


def contradictory_population(genes):
    genes = np.asarray(genes, dtype=np.float64)
    traits, acts = evaluate_population(genes, DiagnosticKind.CONTRADICTORY_OBJECTIVES)
    return Population(genes, traits, acts)


def test_average_trait_score():
    assert average_trait_score(np.full(100, 100.0)) == 100.0
    assert average_trait_score(np.zeros(100)) == 0.0
    assert average_trait_score(np.array([99.0, 1.0])) == 50.0


def test_is_satisfactory_boundary():
    assert is_satisfactory(np.full(5, 99.0))  # inclusive threshold
    traits = np.full(5, 100.0)
    traits[2] = np.nextafter(99.0, 0.0)
    assert not is_satisfactory(traits)
    assert is_satisfactory(np.full(5, 100.0))


def test_is_satisfactory_implies_high_average():
    p = np.array([99.0, 99.5, 100.0])
    assert is_satisfactory(p)
    assert average_trait_score(p) >= 99.0


def test_activation_gene_coverage_counts_unique():
    pop = contradictory_population([[0, 0, 0, 9], [0, 0, 0, 8], [7, 0, 0, 0]])
    assert activation_gene_coverage(pop) == 2
    full = contradictory_population(np.eye(4) * 5)
    assert activation_gene_coverage(full) == 4
    same = contradictory_population([[0, 9, 0], [0, 8, 0]])
    assert activation_gene_coverage(same) == 1


def test_activation_coverage_requires_contradictory():
    pop = population_from_traits([[1.0, 2.0]])
    with pytest.raises(ContractViolationError):
        activation_gene_coverage(pop)


def test_satisfactory_trait_coverage_set_semantics():
    pop = population_from_traits([[99.5, 0.0], [0.0, 100.0]])
    assert satisfactory_trait_coverage(pop) == 2
    low = population_from_traits([[98.0, 98.9], [50.0, 0.0]])
    assert satisfactory_trait_coverage(low) == 0
    dup = population_from_traits([[99.5, 0.0], [99.9, 0.0]])
    assert satisfactory_trait_coverage(dup) == 1


def test_coverage_monotone_under_union():
    a = contradictory_population([[9, 0, 0], [0, 8, 0]])
    b = contradictory_population([[0, 0, 7]])
    union = contradictory_population(np.vstack([a.genes, b.genes]))
    assert activation_gene_coverage(union) >= max(
        activation_gene_coverage(a), activation_gene_coverage(b)
    )
    assert satisfactory_trait_coverage(union) >= max(
        satisfactory_trait_coverage(a), satisfactory_trait_coverage(b)
    )


def test_contradictory_satisfied_traits_subset_of_activations():
    # A satisfied trait can only be a member's activation trait, so per
    # generation satisfactory coverage never exceeds activation coverage.
    rng = np.random.default_rng(2)
    genes = rng.uniform(0, 100, size=(40, 6))
    pop = contradictory_population(genes)
    sat_idx = set(np.nonzero(np.any(pop.traits >= 99.0, axis=0))[0])
    act_idx = set(int(a) for a in pop.activations)
    assert sat_idx <= act_idx
    assert satisfactory_trait_coverage(pop) <= activation_gene_coverage(pop)


def test_best_performance_is_max_mean():
    pop = population_from_traits([[10.0, 0.0], [4.0, 4.0]])
    assert best_performance(pop) == 5.0


def test_population_has_satisfactory():
    assert population_has_satisfactory(population_from_traits([[99.0, 99.0], [0.0, 0.0]]))
    assert not population_has_satisfactory(
        population_from_traits([[99.0, 0.0], [0.0, 99.0]])
    )


def test_first_satisfaction_scan():
    def rec(gen, first):
        return GenerationRecord(
            generation=gen,
            cumulative_evaluations=gen * 100,
            best_performance=0.0,
            best_so_far=0.0,
            activation_gene_coverage=None,
            satisfactory_trait_coverage=0,
            first_satisfaction_evals=first,
        )

    assert first_satisfaction([rec(0, None), rec(1, None)]) is None
    assert first_satisfaction([rec(0, None), rec(5, 500), rec(6, 500)]) == 500
