"""Experiment harness: treatment grids, replicate execution, CSV outputs.

An experiment is a cross product of population sizes and redundancy levels,
each cell run for a fixed number of replicates. Replicate (t, r) of an
experiment is seeded with derive_seed(master_seed, t, r), so any single run
can be reproduced in isolation and the output bytes are independent of
worker count and execution order.

Spec files come in two interchangeable formats: an INI-style key/value file
with one [experiment <name>] section per experiment, and a JSON file with an
"experiments" array. See the README for the full key list.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from lexidiag.core import derive_seed
from lexidiag.diagnostics import DiagnosticKind
from lexidiag.engine import MutationConfig, RunConfig, generations_for_budget, run
from lexidiag.errors import ChecksumMismatchError, InvalidConfigError
from lexidiag.metrics import GenerationRecord
from lexidiag.stats import StatReport, compare_groups

TRAJECTORY_COLUMNS = [
    "treatment",
    "replicate",
    "generation",
    "cumulative_evals",
    "best_performance",
    "best_so_far",
    "activation_coverage",
    "satisfactory_coverage",
]

SUMMARY_COLUMNS = [
    "treatment",
    "replicate",
    "diagnostic",
    "population_size",
    "redundancy",
    "dim",
    "generations",
    "total_cases",
    "total_evals",
    "final_best_performance",
    "best_performance",
    "final_activation_coverage",
    "best_activation_coverage",
    "final_satisfactory_coverage",
    "best_satisfactory_coverage",
    "first_satisfaction_evals",
]

DEFAULT_METRIC_BY_DIAGNOSTIC = {
    "exploitation": "best_performance",
    "contradictory": "best_satisfactory_coverage",
}


class SpecParseError(InvalidConfigError):
    """Spec file could not be parsed or validated; message names line/field."""


@dataclass(frozen=True)
class Treatment:
    index: int
    population_size: int
    redundancy: int

    @property
    def label(self) -> str:
        return f"pop{self.population_size}_red{self.redundancy}"


@dataclass
class ExperimentSpec:
    name: str
    diagnostic: DiagnosticKind
    population_sizes: list[int]
    evaluation_budget: int
    replicates: int
    master_seed: int
    dim: int = 100
    redundancy_levels: list[int] = field(default_factory=lambda: [0])
    mutation: MutationConfig = field(default_factory=MutationConfig)
    snapshot_stride_evals: int = 10**8
    output_dir: str | None = None

    def treatments(self) -> list[Treatment]:
        out = []
        for p in self.population_sizes:
            for r in self.redundancy_levels:
                out.append(Treatment(len(out), p, r))
        return out

    def run_config(self, treatment: Treatment, replicate: int) -> RunConfig:
        return RunConfig(
            diagnostic=self.diagnostic,
            population_size=treatment.population_size,
            evaluation_budget=self.evaluation_budget,
            dim=self.dim,
            redundant_cases=treatment.redundancy,
            mutation=self.mutation,
            seed=derive_seed(self.master_seed, treatment.index, replicate),
            snapshot_stride_evals=self.snapshot_stride_evals,
        )

    def validate(self) -> None:
        if not self.name or any(ch in self.name for ch in "/\\"):
            raise SpecParseError(f"bad experiment name {self.name!r}")
        if self.replicates < 1:
            raise SpecParseError(f"[{self.name}] replicates must be >= 1")
        if not self.population_sizes:
            raise SpecParseError(f"[{self.name}] population_sizes is empty")
        if not self.redundancy_levels:
            raise SpecParseError(f"[{self.name}] redundancy_levels is empty")
        for t in self.treatments():
            try:
                self.run_config(t, 0).validate()
            except InvalidConfigError as e:
                raise SpecParseError(f"[{self.name}] treatment {t.label}: {e}") from e


# ---------------------------------------------------------------------------
# Spec file parsing

_SPEC_KEYS = {
    "diagnostic",
    "dim",
    "population_sizes",
    "redundancy_levels",
    "evaluation_budget",
    "replicates",
    "master_seed",
    "snapshot_stride_evals",
    "output_dir",
    "mutation.per_gene_rate",
    "mutation.gaussian_mean",
    "mutation.gaussian_sd",
    "mutation.upper_threshold",
}
_REQUIRED_KEYS = {"diagnostic", "population_sizes", "evaluation_budget",
                  "replicates", "master_seed"}


def _parse_int(text: str, where: str) -> int:
    try:
        # Allow 1.5e9-style literals for budgets as long as they are integral.
        f = float(text)
        if f != int(f):
            raise ValueError
        return int(f)
    except ValueError:
        raise SpecParseError(f"{where}: expected an integer, got {text!r}") from None


def _parse_float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise SpecParseError(f"{where}: expected a number, got {text!r}") from None


def _parse_int_list(text: str, where: str) -> list[int]:
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    if not items:
        raise SpecParseError(f"{where}: expected a comma-separated list")
    return [_parse_int(t, where) for t in items]


def _build_experiment(name: str, kv: dict[str, str]) -> ExperimentSpec:
    unknown = set(kv) - _SPEC_KEYS
    if unknown:
        raise SpecParseError(f"[{name}] unknown key(s): {', '.join(sorted(unknown))}")
    missing = _REQUIRED_KEYS - set(kv)
    if missing:
        raise SpecParseError(f"[{name}] missing key(s): {', '.join(sorted(missing))}")
    where = f"[{name}]"
    mut_kwargs = {}
    for short, long in [
        ("per_gene_rate", "mutation.per_gene_rate"),
        ("gaussian_mean", "mutation.gaussian_mean"),
        ("gaussian_sd", "mutation.gaussian_sd"),
        ("upper_threshold", "mutation.upper_threshold"),
    ]:
        if long in kv:
            mut_kwargs[short] = _parse_float(kv[long], f"{where} {long}")
    spec = ExperimentSpec(
        name=name,
        diagnostic=DiagnosticKind.parse(kv["diagnostic"]),
        population_sizes=_parse_int_list(kv["population_sizes"], f"{where} population_sizes"),
        evaluation_budget=_parse_int(kv["evaluation_budget"], f"{where} evaluation_budget"),
        replicates=_parse_int(kv["replicates"], f"{where} replicates"),
        master_seed=_parse_int(kv["master_seed"], f"{where} master_seed"),
        dim=_parse_int(kv.get("dim", "100"), f"{where} dim"),
        redundancy_levels=_parse_int_list(kv.get("redundancy_levels", "0"),
                                          f"{where} redundancy_levels"),
        mutation=MutationConfig(**mut_kwargs),
        snapshot_stride_evals=_parse_int(kv.get("snapshot_stride_evals", str(10**8)),
                                         f"{where} snapshot_stride_evals"),
        output_dir=kv.get("output_dir"),
    )
    spec.validate()
    return spec


def _parse_ini(text: str, source: str) -> list[ExperimentSpec]:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#",))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as e:
        raise SpecParseError(f"{source}: {e}") from e
    specs = []
    for section in cp.sections():
        if not section.startswith("experiment"):
            raise SpecParseError(
                f"{source}: section [{section}] should be [experiment <name>]"
            )
        name = section[len("experiment"):].strip()
        if not name:
            raise SpecParseError(f"{source}: experiment section needs a name")
        specs.append(_build_experiment(name, dict(cp[section])))
    if not specs:
        raise SpecParseError(f"{source}: no [experiment <name>] sections found")
    return specs


def _parse_json(text: str, source: str) -> list[ExperimentSpec]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecParseError(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict) or "experiments" not in doc:
        raise SpecParseError(f'{source}: expected an object with an "experiments" array')
    specs = []
    for i, exp in enumerate(doc["experiments"]):
        if not isinstance(exp, dict) or "name" not in exp:
            raise SpecParseError(f'{source}: experiments[{i}] needs a "name"')
        kv = {}
        for key, value in exp.items():
            if key == "name":
                continue
            if key == "mutation":
                for mk, mv in value.items():
                    kv[f"mutation.{mk}"] = str(mv)
            elif isinstance(value, list):
                kv[key] = ",".join(str(v) for v in value)
            else:
                kv[key] = str(value)
        specs.append(_build_experiment(str(exp["name"]), kv))
    if not specs:
        raise SpecParseError(f"{source}: experiments array is empty")
    return specs


def parse_spec_file(path: str | Path) -> list[ExperimentSpec]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SpecParseError(f"cannot read spec file {path}: {e}") from e
    stripped = text.lstrip()
    if path.suffix == ".json" or stripped.startswith("{"):
        return _parse_json(text, str(path))
    return _parse_ini(text, str(path))


# ---------------------------------------------------------------------------
# Planning (--dry-run)

@dataclass(frozen=True)
class TreatmentPlan:
    experiment: str
    label: str
    population_size: int
    redundancy: int
    total_cases: int
    evals_per_generation: int
    generations: int
    replicates: int


def plan(spec: ExperimentSpec) -> list[TreatmentPlan]:
    out = []
    for t in spec.treatments():
        cases = spec.dim + t.redundancy
        out.append(
            TreatmentPlan(
                experiment=spec.name,
                label=t.label,
                population_size=t.population_size,
                redundancy=t.redundancy,
                total_cases=cases,
                evals_per_generation=t.population_size * cases,
                generations=generations_for_budget(
                    spec.evaluation_budget, t.population_size, cases
                ),
                replicates=spec.replicates,
            )
        )
    return out


def format_plan(specs: list[ExperimentSpec]) -> str:
    header = (
        f"{'experiment':<22} {'treatment':<16} {'pop':>6} {'cases':>6} "
        f"{'evals/gen':>12} {'generations':>12} {'replicates':>10}"
    )
    lines = [header, "-" * len(header)]
    for spec in specs:
        for p in plan(spec):
            lines.append(
                f"{p.experiment:<22} {p.label:<16} {p.population_size:>6} "
                f"{p.total_cases:>6} {p.evals_per_generation:>12} "
                f"{p.generations:>12} {p.replicates:>10}"
            )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Execution

def _fmt(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _unit_paths(exp_dir: Path, treatment: Treatment, replicate: int) -> tuple[Path, Path]:
    stem = f"{treatment.label}_rep{replicate:02d}"
    return (exp_dir / "trajectories" / f"{stem}.csv",
            exp_dir / "meta" / f"{stem}.json")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _run_unit(payload: dict) -> None:
    """One (treatment, replicate) work unit; executed inside a worker process."""
    spec_d = payload["spec"]
    treatment = Treatment(**payload["treatment"])
    replicate = payload["replicate"]
    cfg = RunConfig(
        diagnostic=DiagnosticKind.parse(spec_d["diagnostic"]),
        population_size=treatment.population_size,
        evaluation_budget=spec_d["evaluation_budget"],
        dim=spec_d["dim"],
        redundant_cases=treatment.redundancy,
        mutation=MutationConfig(**spec_d["mutation"]),
        seed=derive_seed(spec_d["master_seed"], treatment.index, replicate),
        snapshot_stride_evals=spec_d["snapshot_stride_evals"],
    )
    traj_path = Path(payload["trajectory_path"])
    meta_path = Path(payload["meta_path"])

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)

    def sink(rec: GenerationRecord) -> None:
        writer.writerow([
            treatment.label,
            replicate,
            rec.generation,
            rec.cumulative_evaluations,
            _fmt(rec.best_performance),
            _fmt(rec.best_so_far),
            _fmt(rec.activation_gene_coverage),
            rec.satisfactory_trait_coverage,
        ])

    result = run(cfg, sink, engine=payload["engine"])
    traj_path.write_text(buf.getvalue(), encoding="utf-8", newline="")

    summary = {
        "treatment": treatment.label,
        "replicate": replicate,
        "diagnostic": spec_d["diagnostic"],
        "population_size": treatment.population_size,
        "redundancy": treatment.redundancy,
        "dim": spec_d["dim"],
        "generations": result.generations,
        "total_cases": result.case_map.total_cases,
        "total_evals": result.total_evaluations,
        "final_best_performance": result.final_best_performance,
        "best_performance": result.best_performance,
        "final_activation_coverage": result.final_activation_coverage,
        "best_activation_coverage": result.best_activation_coverage,
        "final_satisfactory_coverage": result.final_satisfactory_coverage,
        "best_satisfactory_coverage": result.best_satisfactory_coverage,
        "first_satisfaction_evals": result.first_satisfaction_evals,
    }
    meta = {
        "experiment": spec_d["name"],
        "treatment_index": treatment.index,
        "seed": cfg.seed,
        "evaluation_budget": spec_d["evaluation_budget"],
        "snapshot_stride_evals": spec_d["snapshot_stride_evals"],
        "mutation": spec_d["mutation"],
        "case_map": result.case_map.to_json_dict(),
        "summary": summary,
        "trajectory_sha256": _sha256(traj_path),
    }
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8", newline="")


def _spec_payload(spec: ExperimentSpec) -> dict:
    return {
        "name": spec.name,
        "diagnostic": spec.diagnostic.value,
        "dim": spec.dim,
        "evaluation_budget": spec.evaluation_budget,
        "master_seed": spec.master_seed,
        "snapshot_stride_evals": spec.snapshot_stride_evals,
        "mutation": {
            "per_gene_rate": spec.mutation.per_gene_rate,
            "gaussian_mean": spec.mutation.gaussian_mean,
            "gaussian_sd": spec.mutation.gaussian_sd,
            "upper_threshold": spec.mutation.upper_threshold,
        },
    }


def experiment_dir(spec: ExperimentSpec, out_root: str | Path) -> Path:
    return Path(out_root) / (spec.output_dir or spec.name)


def _write_summary(spec: ExperimentSpec, exp_dir: Path) -> None:
    rows = []
    for t in spec.treatments():
        for r in range(spec.replicates):
            _, meta_path = _unit_paths(exp_dir, t, r)
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            rows.append(meta["summary"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])
    (exp_dir / "summary.csv").write_text(buf.getvalue(), encoding="utf-8", newline="")


def run_experiments(specs: list[ExperimentSpec], out_root: str | Path,
                    workers: int | None = None, resume: bool = False,
                    engine: str | None = None, log=None) -> None:
    """Execute every (treatment, replicate) unit and write per-experiment CSVs."""
    log = log or (lambda msg: None)
    workers = workers or os.cpu_count() or 1
    for spec in specs:
        spec.validate()
        exp_dir = experiment_dir(spec, out_root)
        (exp_dir / "trajectories").mkdir(parents=True, exist_ok=True)
        (exp_dir / "meta").mkdir(parents=True, exist_ok=True)

        payloads = []
        skipped = 0
        for t in spec.treatments():
            for r in range(spec.replicates):
                traj_path, meta_path = _unit_paths(exp_dir, t, r)
                if resume and meta_path.exists():
                    meta = json.loads(meta_path.read_text(encoding="utf-8"))
                    if not traj_path.exists() or _sha256(traj_path) != meta.get(
                        "trajectory_sha256"
                    ):
                        raise ChecksumMismatchError(
                            f"{traj_path} does not match its recorded checksum; "
                            "delete the unit's files to recompute"
                        )
                    skipped += 1
                    continue
                payloads.append({
                    "spec": _spec_payload(spec),
                    "treatment": {
                        "index": t.index,
                        "population_size": t.population_size,
                        "redundancy": t.redundancy,
                    },
                    "replicate": r,
                    "trajectory_path": str(traj_path),
                    "meta_path": str(meta_path),
                    "engine": engine,
                })
        log(f"{spec.name}: {len(payloads)} unit(s) to run, {skipped} resumed")
        if payloads:
            if workers == 1:
                for p in payloads:
                    _run_unit(p)
            else:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    for _ in pool.map(_run_unit, payloads):
                        pass
        _write_summary(spec, exp_dir)
        log(f"{spec.name}: summary written to {exp_dir / 'summary.csv'}")


# ---------------------------------------------------------------------------
# Analysis

def read_summary(exp_dir: str | Path) -> list[dict]:
    path = Path(exp_dir) / "summary.csv"
    if not path.exists():
        raise InvalidConfigError(f"no summary.csv in {exp_dir}")
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise InvalidConfigError(f"{path} has no data rows")
    return rows


def analyze_directory(exp_dir: str | Path, metric: str | None = None,
                      alpha: float = 0.05, group_by: str = "population_size",
                      where: dict[str, str] | None = None,
                      alternative: str = "two-sided") -> StatReport:
    """Group the end-of-run metric and run the KW + rank-sum + Bonferroni stack.

    Censored values (NA) are excluded; a group left empty is an error.
    Writes analysis.json and analysis.txt beside summary.csv.
    """
    exp_dir = Path(exp_dir)
    rows = read_summary(exp_dir)
    if where:
        for key in where:
            if key not in rows[0]:
                raise InvalidConfigError(f"unknown filter column {key!r}")
        rows = [r for r in rows if all(r[k] == v for k, v in where.items())]
        if not rows:
            raise InvalidConfigError(f"no rows match filter {where}")
    if group_by not in rows[0]:
        raise InvalidConfigError(f"unknown group column {group_by!r}")
    if metric is None:
        diagnostics = {r["diagnostic"] for r in rows}
        if len(diagnostics) != 1:
            raise InvalidConfigError(
                "mixed diagnostics in summary; pass --metric explicitly"
            )
        metric = DEFAULT_METRIC_BY_DIAGNOSTIC[diagnostics.pop()]
    if metric not in rows[0]:
        raise InvalidConfigError(f"unknown metric column {metric!r}")

    groups: dict[str, list[float]] = {}
    for row in rows:
        if row[metric] == "NA":
            continue
        groups.setdefault(row[group_by], []).append(float(row[metric]))
    if len(groups) < 2:
        raise InvalidConfigError(
            f"need at least 2 groups by {group_by!r}, found {len(groups)}"
        )

    def group_key(label: str):
        try:
            return (0, float(label))
        except ValueError:
            return (1, label)

    ordered = {k: groups[k] for k in sorted(groups, key=group_key)}
    report = compare_groups(ordered, alpha=alpha, metric=metric,
                            alternative=alternative)
    (exp_dir / "analysis.json").write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    (exp_dir / "analysis.txt").write_text(report.format_table() + "\n", encoding="utf-8")
    return report
