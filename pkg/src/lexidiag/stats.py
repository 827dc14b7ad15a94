"""Nonparametric comparison pipeline: Kruskal-Wallis, rank-sum, Bonferroni.

Rank statistics and tail probabilities are delegated to scipy.stats; this
module pins the conventions the rest of the suite relies on:

  - kruskal_wallis uses midranks with tie correction; when every pooled value
    is identical the tie-corrected denominator vanishes, so that case is
    defined as (H = 0, p = 1): no rank variation, no evidence.
  - wilcoxon_rank_sum reports the U statistic of the first sample and uses the
    exact null distribution when the combined sample size is at most 12 with
    no ties, otherwise the normal approximation with continuity and tie
    correction.
  - bonferroni multiplies by the number of comparisons and clamps to 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _sps

from lexidiag.errors import InvalidInputError

EXACT_RANK_SUM_LIMIT = 12  # combined sample size for the exact branch


def _as_sample(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"{name} must be a nonempty 1-D sample")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def kruskal_wallis(groups) -> tuple[float, float]:
    """H statistic and chi-square tail p over two or more groups."""
    if len(groups) < 2:
        raise InvalidInputError("kruskal_wallis needs at least 2 groups")
    samples = [_as_sample(g, f"group {i}") for i, g in enumerate(groups)]
    pooled = np.concatenate(samples)
    if np.all(pooled == pooled[0]):
        return 0.0, 1.0
    h, p = _sps.kruskal(*samples)
    return float(h), float(p)


def wilcoxon_rank_sum(a, b, alternative: str = "two-sided") -> tuple[float, float]:
    """Mann-Whitney/Wilcoxon rank-sum test; returns (U of sample a, p)."""
    xa = _as_sample(a, "sample a")
    xb = _as_sample(b, "sample b")
    if alternative not in ("two-sided", "less", "greater"):
        raise InvalidInputError(f"unknown alternative {alternative!r}")
    pooled = np.concatenate([xa, xb])
    if np.all(pooled == pooled[0]):
        return xa.size * xb.size / 2.0, 1.0
    no_ties = np.unique(pooled).size == pooled.size
    exact = no_ties and (xa.size + xb.size) <= EXACT_RANK_SUM_LIMIT
    res = _sps.mannwhitneyu(
        xa, xb, alternative=alternative, method="exact" if exact else "asymptotic"
    )
    return float(res.statistic), float(res.pvalue)


def bonferroni(raw_ps) -> list[float]:
    """Multiply each p by the family size, clamped to 1."""
    ps = list(raw_ps)
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise InvalidInputError(f"p-value out of range: {p}")
    k = len(ps)
    return [min(1.0, p * k) for p in ps]


@dataclass
class PairwiseResult:
    group_a: str
    group_b: str
    u_statistic: float
    raw_p: float
    adjusted_p: float
    significant: bool


@dataclass
class StatReport:
    kruskal_h: float
    kruskal_p: float
    pairwise: list[PairwiseResult]
    alpha: float = 0.05
    metric: str = ""
    group_sizes: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "metric": self.metric,
            "alpha": self.alpha,
            "group_sizes": self.group_sizes,
            "kruskal_h": self.kruskal_h,
            "kruskal_p": self.kruskal_p,
            "pairwise": [
                {
                    "group_a": p.group_a,
                    "group_b": p.group_b,
                    "u_statistic": p.u_statistic,
                    "raw_p": p.raw_p,
                    "adjusted_p": p.adjusted_p,
                    "significant": p.significant,
                }
                for p in self.pairwise
            ],
        }

    def format_table(self) -> str:
        lines = []
        if self.metric:
            lines.append(f"metric: {self.metric}")
        lines.append(
            f"groups: {', '.join(f'{k} (n={v})' for k, v in self.group_sizes.items())}"
        )
        lines.append(
            f"Kruskal-Wallis: H = {self.kruskal_h:.6g}, p = {self.kruskal_p:.6g} "
            f"(alpha = {self.alpha})"
        )
        if self.pairwise:
            header = f"{'pair':<24} {'U':>10} {'raw p':>12} {'adj p':>12}  significant"
            lines.append(header)
            lines.append("-" * len(header))
            for pr in self.pairwise:
                lines.append(
                    f"{pr.group_a + ' vs ' + pr.group_b:<24} {pr.u_statistic:>10.4g} "
                    f"{pr.raw_p:>12.4g} {pr.adjusted_p:>12.4g}  "
                    f"{'yes' if pr.significant else 'no'}"
                )
        return "\n".join(lines)


def compare_groups(groups: dict, alpha: float = 0.05, metric: str = "",
                   alternative: str = "two-sided") -> StatReport:
    """Omnibus Kruskal-Wallis plus all pairwise rank-sum tests with Bonferroni."""
    if len(groups) < 2:
        raise InvalidInputError("need at least 2 groups to compare")
    labels = list(groups)
    h, p = kruskal_wallis([groups[k] for k in labels])
    pairs = list(itertools.combinations(labels, 2))
    raw = []
    us = []
    for ga, gb in pairs:
        u, pv = wilcoxon_rank_sum(groups[ga], groups[gb], alternative=alternative)
        us.append(u)
        raw.append(pv)
    adjusted = bonferroni(raw)
    pairwise = [
        PairwiseResult(
            group_a=str(ga),
            group_b=str(gb),
            u_statistic=us[i],
            raw_p=raw[i],
            adjusted_p=adjusted[i],
            significant=adjusted[i] < alpha,
        )
        for i, (ga, gb) in enumerate(pairs)
    ]
    return StatReport(
        kruskal_h=h,
        kruskal_p=p,
        pairwise=pairwise,
        alpha=alpha,
        metric=metric,
        group_sizes={str(k): len(groups[k]) for k in labels},
    )
