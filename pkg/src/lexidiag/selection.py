"""Lexicase parent selection and its exact-probability oracle.

select_one is the reference implementation (pure Python, optionally traced).
select_parents dispatches to the active kernel engine for bulk selection; with
equal seeds it returns exactly the sequence select_one would produce.

selection_probabilities_oracle enumerates every shuffle of the case indices
and accumulates exact per-individual selection mass with rational arithmetic,
splitting residual-pool ties uniformly. It is deliberately independent of the
sampling path so the two can check each other.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from lexidiag import _kernels_py
from lexidiag._engine import get_kernels
from lexidiag.core import Population, RandomSource
from lexidiag.diagnostics import TestCaseMap
from lexidiag.errors import ContractViolationError, SizeLimitError

ORACLE_MAX_CASES = 8
ORACLE_MAX_POP = 32


@dataclass
class SelectionEvent:
    """Audit record of one selection: the shuffle, the filter cascade, the pick."""

    shuffle: list[int]
    survivor_trace: list[tuple[int, int]] | None
    selected: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "shuffle": self.shuffle,
                "survivor_trace": self.survivor_trace,
                "selected": self.selected,
            }
        )


@dataclass
class SelectionProbabilities:
    """Exact selection probability per population member; sums to 1."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.size and abs(float(self.probs.sum()) - 1.0) > 1e-12:
            raise ContractViolationError("selection probabilities must sum to 1")


def _traits_of(pop) -> np.ndarray:
    if isinstance(pop, Population):
        if pop.traits is None:
            raise ContractViolationError("population has not been evaluated")
        return pop.traits
    return np.ascontiguousarray(pop, dtype=np.float64)


def filter_pool(pool: list[int], traits: np.ndarray, trait_index: int) -> list[int]:
    """Keep the pool members attaining the pool maximum on one trait."""
    best = max(traits[i, trait_index] for i in pool)
    return [i for i in pool if traits[i, trait_index] == best]


def select_one(pop, case_map: TestCaseMap, rng: RandomSource) -> int:
    """Select one parent: shuffle cases, filter to per-case bests, tie-break."""
    traits = _traits_of(pop)
    if traits.shape[0] < 1:
        raise ContractViolationError("cannot select from an empty population")
    selected, _, _ = _kernels_py.select_event(traits, case_map.case_to_trait, rng)
    return int(selected)


def select_one_event(pop, case_map: TestCaseMap, rng: RandomSource) -> SelectionEvent:
    """select_one with the shuffle and survivor trace attached (same draws)."""
    traits = _traits_of(pop)
    if traits.shape[0] < 1:
        raise ContractViolationError("cannot select from an empty population")
    selected, order, trace = _kernels_py.select_event(
        traits, case_map.case_to_trait, rng, want_trace=True
    )
    return SelectionEvent(
        shuffle=[int(c) for c in order],
        survivor_trace=[(int(c), int(s)) for c, s in trace],
        selected=int(selected),
    )


def select_parents(pop, case_map: TestCaseMap, count: int, rng: RandomSource,
                   engine: str | None = None) -> np.ndarray:
    """count independent selection events with replacement (fresh shuffle each)."""
    if count < 1:
        raise ContractViolationError(f"parent count must be >= 1, got {count}")
    traits = _traits_of(pop)
    if traits.shape[0] < 1:
        raise ContractViolationError("cannot select from an empty population")
    kern = get_kernels(engine)
    return kern.select_parents(traits, case_map.case_to_trait, count, rng)


def selection_probabilities_oracle(pop, case_map: TestCaseMap) -> SelectionProbabilities:
    """Exact selection probabilities by enumerating all case-index shuffles."""
    traits = _traits_of(pop)
    n = traits.shape[0]
    n_cases = case_map.total_cases
    if n_cases > ORACLE_MAX_CASES:
        raise SizeLimitError(
            f"oracle enumerates at most {ORACLE_MAX_CASES} cases, got {n_cases}"
        )
    if n > ORACLE_MAX_POP:
        raise SizeLimitError(f"oracle handles at most {ORACLE_MAX_POP} individuals, got {n}")
    if n < 1:
        raise ContractViolationError("cannot select from an empty population")
    mass = [Fraction(0)] * n
    per_perm = Fraction(1, math.factorial(n_cases))
    c2t = case_map.case_to_trait
    for perm in itertools.permutations(range(n_cases)):
        pool = list(range(n))
        for case in perm:
            if len(pool) == 1:
                break
            pool = filter_pool(pool, traits, int(c2t[case]))
        share = per_perm / len(pool)
        for i in pool:
            mass[i] += share
    assert sum(mass) == 1
    return SelectionProbabilities(np.array([float(m) for m in mass]))
