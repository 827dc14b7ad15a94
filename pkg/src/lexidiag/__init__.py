"""lexidiag: diagnostic landscapes and an experiment harness for lexicase selection."""

from lexidiag._engine import available_engines, default_engine_name
from lexidiag.core import Individual, Population, RandomSource, derive_seed, random_genotype
from lexidiag.diagnostics import (
    DiagnosticKind,
    TestCaseMap,
    build_case_map,
    case_score,
    transform_contradictory,
    transform_exploitation,
)
from lexidiag.engine import (
    MutationConfig,
    RunConfig,
    RunResult,
    generations_for_budget,
    mutate,
    run,
)
from lexidiag.metrics import (
    GenerationRecord,
    activation_gene_coverage,
    average_trait_score,
    first_satisfaction,
    is_satisfactory,
    satisfactory_trait_coverage,
)
from lexidiag.selection import (
    SelectionEvent,
    SelectionProbabilities,
    select_one,
    select_parents,
    selection_probabilities_oracle,
)
from lexidiag.stats import StatReport, bonferroni, kruskal_wallis, wilcoxon_rank_sum

__version__ = "0.1.0"
