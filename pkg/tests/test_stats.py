"""Statistics: spec examples plus independent enumeration/formula oracles."""

import itertools
import math

import numpy as np
import pytest

from lexidiag.errors import InvalidInputError
from lexidiag.stats import bonferroni, compare_groups, kruskal_wallis, wilcoxon_rank_sum


# --- independent oracles ------------------------------------------------------

def rank_sum_enumeration(a, b):
    """Exact two-sided rank-sum p by enumerating every group assignment.

    Assumes no ties. Returns (U of a, p)."""
    n, na = len(a) + len(b), len(a)
    u_obs = sum(1 for x in a for y in b if x > y)
    us = []
    for combo in itertools.combinations(range(n), na):
        sa = set(combo)
        u = sum(sum(1 for j in range(n) if j not in sa and j < i) for i in combo)
        us.append(u)
    us = np.array(us)
    p = min(1.0, 2 * min((us <= u_obs).mean(), (us >= u_obs).mean()))
    return u_obs, p


def midranks(pooled):
    pooled = np.asarray(pooled, dtype=float)
    order = np.argsort(pooled, kind="mergesort")
    ranks = np.empty(len(pooled))
    s = pooled[order]
    i = 0
    while i < len(s):
        j = i
        while j < len(s) and s[j] == s[i]:
            j += 1
        ranks[order[i:j]] = (i + j + 1) / 2.0  # 1-based midrank
        i = j
    return ranks


def kruskal_formula(groups):
    """H from the definitional formula on midranks with tie correction."""
    pooled = np.concatenate([np.asarray(g, dtype=float) for g in groups])
    n = len(pooled)
    ranks = midranks(pooled)
    h = 0.0
    start = 0
    for g in groups:
        k = len(g)
        rbar = ranks[start:start + k].mean()
        h += k * (rbar - (n + 1) / 2.0) ** 2
        start += k
    h *= 12.0 / (n * (n + 1))
    _, counts = np.unique(pooled, return_counts=True)
    tie = 1.0 - (counts**3 - counts).sum() / (n**3 - n)
    return h / tie


# --- kruskal_wallis -----------------------------------------------------------

def test_kruskal_identical_constant_groups():
    h, p = kruskal_wallis([[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]])
    assert h == 0.0 and p == 1.0


def test_kruskal_separated_triples():
    h, p = kruskal_wallis([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    assert abs(h - 7.2) < 1e-9
    assert abs(p - math.exp(-3.6)) < 1e-10  # chi-square sf with 2 dof


def test_kruskal_group_order_invariant():
    groups = [[1, 2, 3], [4, 5, 6], [7, 8, 9]]
    base = kruskal_wallis(groups)
    for perm in itertools.permutations(groups):
        assert kruskal_wallis(list(perm)) == base


def test_kruskal_matches_formula_with_ties():
    rng = np.random.default_rng(1)
    for _ in range(20):
        groups = [list(rng.integers(0, 6, size=rng.integers(2, 8)).astype(float))
                  for _ in range(rng.integers(2, 5))]
        pooled = np.concatenate(groups)
        if np.all(pooled == pooled[0]):
            continue
        h, _ = kruskal_wallis(groups)
        assert abs(h - kruskal_formula(groups)) < 1e-9


def test_kruskal_input_validation():
    with pytest.raises(InvalidInputError):
        kruskal_wallis([[1.0, 2.0]])
    with pytest.raises(InvalidInputError):
        kruskal_wallis([[1.0], []])


# --- wilcoxon_rank_sum ----------------------------------------------------------

def test_rank_sum_separated_triples():
    u, p = wilcoxon_rank_sum([1, 2, 3], [10, 20, 30])
    assert u == 0.0
    assert abs(p - 0.1) < 1e-12  # 2 / C(6,3)


def test_rank_sum_identical_samples():
    _, p = wilcoxon_rank_sum([1, 2, 3], [1, 2, 3])
    assert p >= 0.99


def test_rank_sum_swap_symmetry():
    a, b = [1.0, 5.0, 9.0, 11.0], [2.0, 3.0, 4.0]
    ua, pa = wilcoxon_rank_sum(a, b)
    ub, pb = wilcoxon_rank_sum(b, a)
    assert pa == pb
    assert ub == len(a) * len(b) - ua


def test_rank_sum_exact_branch_matches_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(40):
        na = int(rng.integers(1, 7))
        nb = int(rng.integers(1, 13 - na))
        vals = rng.permutation(np.arange(1.0, na + nb + 1.0))
        a, b = list(vals[:na]), list(vals[na:])
        u, p = wilcoxon_rank_sum(a, b)
        u_o, p_o = rank_sum_enumeration(a, b)
        assert u == u_o
        assert abs(p - p_o) < 1e-12


def exact_vs_approx_worst(na, nb):
    from scipy import stats as sps

    worst = 0.0
    n = na + nb
    for combo in itertools.combinations(range(n), na):
        vals = np.arange(1.0, n + 1.0)
        a = [vals[i] for i in combo]
        b = [vals[i] for i in range(n) if i not in combo]
        _, p_exact = rank_sum_enumeration(a, b)
        p_approx = float(sps.mannwhitneyu(a, b, method="asymptotic").pvalue)
        worst = max(worst, abs(p_exact - p_approx))
    return worst


def test_rank_sum_exact_vs_normal_approx_at_branch_boundary():
    # At the exact-branch switchover (6 + 6) the continuity-corrected normal
    # approximation agrees with enumeration within 0.02, so crossing the
    # branch rule introduces no jump. (At very small sizes the approximation
    # is coarser -- see the next test -- which is why the exact branch exists.)
    assert exact_vs_approx_worst(6, 6) <= 0.02


def test_rank_sum_exact_vs_normal_approx_small_sizes():
    # The coarsest disagreement over all pairs with sizes in [2, 6]; the
    # worst cell is (2, 2) at ~0.088. Guard the envelope and the trend.
    assert exact_vs_approx_worst(2, 2) <= 0.09
    assert exact_vs_approx_worst(4, 4) <= 0.035
    assert exact_vs_approx_worst(5, 5) <= 0.02


def test_rank_sum_scale_invariance():
    a, b = [1.0, 4.0, 6.0], [2.0, 9.0, 12.0, 15.0]
    base = wilcoxon_rank_sum(a, b)
    scaled = wilcoxon_rank_sum([3.5 * x for x in a], [3.5 * x for x in b])
    assert base == scaled


def test_rank_sum_separation_monotonicity():
    a, b = [1.0, 2.0, 3.0, 4.0], [3.5, 4.5, 5.0, 6.0]
    _, p_overlap = wilcoxon_rank_sum(a, b)
    _, p_separated = wilcoxon_rank_sum(a, [x + 100.0 for x in b])
    assert p_separated <= p_overlap


def test_rank_sum_midranks_conserve_total():
    pooled = [1.0, 2.0, 2.0, 3.0, 7.0, 7.0, 7.0]
    n = len(pooled)
    assert midranks(pooled).sum() == n * (n + 1) / 2


def test_rank_sum_one_sided():
    u, p_two = wilcoxon_rank_sum([1, 2, 3], [10, 20, 30])
    _, p_less = wilcoxon_rank_sum([1, 2, 3], [10, 20, 30], alternative="less")
    assert abs(p_less - p_two / 2) < 1e-12
    with pytest.raises(InvalidInputError):
        wilcoxon_rank_sum([1], [2], alternative="sideways")


def test_rank_sum_input_validation():
    with pytest.raises(InvalidInputError):
        wilcoxon_rank_sum([], [1.0])
    with pytest.raises(InvalidInputError):
        wilcoxon_rank_sum([1.0], [float("nan")])


# --- bonferroni and the report --------------------------------------------------

def test_bonferroni_examples():
    assert bonferroni([0.01, 0.02]) == pytest.approx([0.02, 0.04], abs=1e-15)
    assert bonferroni([0.6]) == [0.6]
    out = bonferroni([0.3, 0.4, 0.5])
    assert out == pytest.approx([0.9, 1.0, 1.0], abs=1e-15)
    assert out[1] == 1.0 and out[2] == 1.0  # clamping is exact


def test_bonferroni_rejects_out_of_range():
    with pytest.raises(InvalidInputError):
        bonferroni([0.5, 1.5])


def test_compare_groups_report():
    groups = {
        "10": list(range(1, 21)),
        "50": list(range(100, 121)),
        "250": list(range(300, 321)),
    }
    report = compare_groups(groups, alpha=0.05, metric="demo")
    assert report.kruskal_p < 0.05
    assert len(report.pairwise) == 3
    for pr in report.pairwise:
        assert pr.adjusted_p == min(1.0, pr.raw_p * 3)
        assert pr.significant == (pr.adjusted_p < 0.05)
        assert pr.significant
    table = report.format_table()
    assert "Kruskal-Wallis" in table and "10 vs 50" in table
    blob = report.to_json_dict()
    assert blob["metric"] == "demo" and len(blob["pairwise"]) == 3


def test_compare_groups_identical_groups_not_significant():
    groups = {"a": [1.0, 2.0, 3.0], "b": [1.0, 2.0, 3.0]}
    report = compare_groups(groups)
    assert not any(p.significant for p in report.pairwise)
