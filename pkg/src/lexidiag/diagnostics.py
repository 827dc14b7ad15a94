"""Genotype-to-phenotype transforms and the redundant test-case map.

Two landscapes are provided. The exploitation-rate transform copies every gene
into the matching trait, giving a single smooth gradient. The contradictory-
objectives transform expresses only the activation gene (the first gene
attaining the maximum); all other traits are zero, so the landscape holds one
gradient per trait position and an individual can climb only one of them.

Redundancy is not a third landscape: it is a TestCaseMap whose tail re-points
extra test cases at already-covered traits, skewing lexicase's shuffle odds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from lexidiag.core import Individual, RandomSource
from lexidiag.errors import ContractViolationError, InvalidConfigError


class DiagnosticKind(enum.Enum):
    EXPLOITATION_RATE = "exploitation"
    CONTRADICTORY_OBJECTIVES = "contradictory"

    @classmethod
    def parse(cls, token: str) -> "DiagnosticKind":
        t = token.strip().lower().replace("-", "_")
        aliases = {
            "exploitation": cls.EXPLOITATION_RATE,
            "exploitation_rate": cls.EXPLOITATION_RATE,
            "contradictory": cls.CONTRADICTORY_OBJECTIVES,
            "contradictory_objectives": cls.CONTRADICTORY_OBJECTIVES,
        }
        if t not in aliases:
            raise InvalidConfigError(f"unknown diagnostic {token!r}")
        return aliases[t]


@dataclass(frozen=True)
class TestCaseMap:
    """Mapping from test-case index to trait index, fixed for a whole run.

    The first base_count entries are the identity; the redundant tail holds
    trait indices sampled uniformly with replacement at run setup.
    """

    case_to_trait: np.ndarray
    base_count: int
    redundant_count: int

    __test__ = False  # keep pytest from collecting this as a test class

    def __post_init__(self):
        arr = np.ascontiguousarray(self.case_to_trait, dtype=np.intp)
        object.__setattr__(self, "case_to_trait", arr)
        if self.base_count < 1 or self.redundant_count < 0:
            raise InvalidConfigError("case map needs base_count >= 1, redundant_count >= 0")
        if arr.shape != (self.base_count + self.redundant_count,):
            raise InvalidConfigError("case map length must equal base + redundant count")
        if not np.array_equal(arr[: self.base_count], np.arange(self.base_count)):
            raise InvalidConfigError("base cases must be the identity mapping")
        tail = arr[self.base_count :]
        if tail.size and (tail.min() < 0 or tail.max() >= self.base_count):
            raise InvalidConfigError("redundant cases must point at base traits")

    @property
    def total_cases(self) -> int:
        return self.base_count + self.redundant_count

    def to_json_dict(self) -> dict:
        return {
            "dim": self.base_count,
            "redundant_count": self.redundant_count,
            "case_to_trait": [int(x) for x in self.case_to_trait],
        }


def build_case_map(dim: int, redundant_count: int, rng: RandomSource) -> TestCaseMap:
    """Identity map over dim traits plus a uniformly resampled redundant tail."""
    if dim < 1 or redundant_count < 0:
        raise InvalidConfigError(f"bad case map sizes: dim={dim}, redundant={redundant_count}")
    tail = [rng.randbelow(dim) for _ in range(redundant_count)]
    case_to_trait = np.concatenate([np.arange(dim, dtype=np.intp),
                                    np.array(tail, dtype=np.intp)])
    return TestCaseMap(case_to_trait, dim, redundant_count)


def identity_case_map(dim: int) -> TestCaseMap:
    return TestCaseMap(np.arange(dim, dtype=np.intp), dim, 0)


def transform_exploitation(genotype: np.ndarray) -> np.ndarray:
    """Phenotype = genotype, trait for trait."""
    return np.array(genotype, dtype=np.float64, copy=True)


def transform_contradictory(genotype: np.ndarray) -> tuple[np.ndarray, int]:
    """Express only the first maximal gene; everything else becomes 0.

    Returns (phenotype, activation index). Ties go to the lowest index, which
    also covers the all-equal (e.g. all-zero) genotype.
    """
    g = np.asarray(genotype, dtype=np.float64)
    activation = int(np.argmax(g))
    traits = np.zeros_like(g)
    traits[activation] = g[activation]
    return traits, activation


def evaluate_population(genes: np.ndarray, kind: DiagnosticKind):
    """Batch transform: returns (traits matrix, activations or None)."""
    genes = np.ascontiguousarray(genes, dtype=np.float64)
    if kind is DiagnosticKind.EXPLOITATION_RATE:
        return genes.copy(), None
    activations = np.argmax(genes, axis=1)  # first occurrence on ties
    traits = np.zeros_like(genes)
    rows = np.arange(genes.shape[0])
    traits[rows, activations] = genes[rows, activations]
    return traits, activations.astype(np.intp)


def case_score(individual: Individual, case_index: int, case_map: TestCaseMap) -> float:
    """Score of one individual on one test case (higher is better)."""
    if case_index < 0 or case_index >= case_map.total_cases:
        raise ContractViolationError(
            f"case index {case_index} outside [0, {case_map.total_cases})"
        )
    if individual.phenotype is None:
        raise ContractViolationError("individual has not been evaluated")
    return float(individual.phenotype[case_map.case_to_trait[case_index]])
