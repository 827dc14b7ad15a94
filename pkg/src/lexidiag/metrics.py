"""Per-generation measurements: performance, satisfaction, coverage.

All functions are pure over a population snapshot. A trait is satisfactory at
>= 99.0 (inclusive); a solution is satisfactory when every trait is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from lexidiag.core import Population
from lexidiag.errors import ContractViolationError

SATISFACTORY_TRAIT = 99.0


@dataclass
class GenerationRecord:
    generation: int
    cumulative_evaluations: int
    best_performance: float
    best_so_far: float
    activation_gene_coverage: Optional[int]
    satisfactory_trait_coverage: int
    first_satisfaction_evals: Optional[int] = None


def average_trait_score(phenotype: np.ndarray) -> float:
    """Mean trait value; the per-solution performance measure."""
    p = np.asarray(phenotype, dtype=np.float64)
    return float(p.mean())


def is_satisfactory(phenotype: np.ndarray) -> bool:
    """True iff every trait is at least the satisfactory threshold."""
    return bool(np.all(np.asarray(phenotype) >= SATISFACTORY_TRAIT))


def best_performance(pop: Population) -> float:
    """Largest average trait score in the population."""
    if pop.traits is None:
        raise ContractViolationError("population has not been evaluated")
    return float(pop.traits.mean(axis=1).max())


def activation_gene_coverage(pop: Population) -> int:
    """Number of distinct activation genes present in the population."""
    if pop.activations is None:
        raise ContractViolationError(
            "activation gene coverage is defined only under the contradictory diagnostic"
        )
    return int(np.unique(pop.activations).size)


def satisfactory_trait_coverage(pop: Population) -> int:
    """Number of trait positions satisfied by at least one member."""
    if pop.traits is None:
        raise ContractViolationError("population has not been evaluated")
    return int(np.any(pop.traits >= SATISFACTORY_TRAIT, axis=0).sum())


def population_has_satisfactory(pop: Population) -> bool:
    """True iff some member's phenotype is satisfactory on every trait."""
    if pop.traits is None:
        raise ContractViolationError("population has not been evaluated")
    return bool(np.all(pop.traits >= SATISFACTORY_TRAIT, axis=1).any())


def first_satisfaction(records: Iterable[GenerationRecord]) -> Optional[int]:
    """Evaluations charged when satisfaction first occurred, or None if never."""
    for rec in records:
        if rec.first_satisfaction_evals is not None:
            return rec.first_satisfaction_evals
    return None
