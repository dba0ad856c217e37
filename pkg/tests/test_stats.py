import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from progperm.errors import DomainError, LengthMismatch
from progperm.stats import (
    KendallKernel,
    KruskalKernel,
    RankSumKernel,
    SpearmanKernel,
    ZKernel,
    _count_inversions,
    cliffs_delta,
    kendall_tau,
    kruskal_wallis,
    neg_log10,
    spearman_rho,
    two_sample_z,
    wilcoxon_rank_sum,
)


def exact_rank_sum_p(x, y):
    n1, n = len(x), len(x) + len(y)
    ranks = sps.rankdata(np.concatenate([x, y]))
    mu = n1 * (n - n1) / 2
    u_obs = ranks[:n1].sum() - n1 * (n1 + 1) / 2
    us = np.array([ranks[list(c)].sum() - n1 * (n1 + 1) / 2 for c in itertools.combinations(range(n), n1)])
    return float(np.mean(np.abs(us - mu) >= abs(u_obs - mu) - 1e-9))


def brute_kendall_s(x, y):
    return sum(np.sign(x[i] - x[j]) * np.sign(y[i] - y[j]) for i in range(len(x)) for j in range(i + 1, len(x)))


def test_rank_sum_example():
    r = wilcoxon_rank_sum([1, 2, 3], [4, 5, 6])
    assert exact_rank_sum_p([1, 2, 3], [4, 5, 6]) == pytest.approx(0.1)
    assert 0.05 <= r.p_value <= 0.15
    assert r.statistic == 0.0


def test_rank_sum_degenerate_and_symmetry():
    assert wilcoxon_rank_sum([1, 1, 1], [1, 1, 1]).p_value == 1.0
    a, b = [0.3, 1.2, 5.0, 2.2], [0.1, 0.0, 0.7, 3.3, 0.2]
    assert wilcoxon_rank_sum(a, b).p_value == wilcoxon_rank_sum(b, a).p_value
    with pytest.raises(DomainError):
        wilcoxon_rank_sum([1], [2, 3])


@pytest.mark.parametrize("seed", range(5))
def test_rank_sum_matches_scipy_with_ties(seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 5, 14).astype(float)
    y = rng.integers(0, 6, 11).astype(float)
    ref = sps.mannwhitneyu(x, y, alternative="two-sided", method="asymptotic", use_continuity=True)
    assert wilcoxon_rank_sum(x, y).p_value == pytest.approx(ref.pvalue, rel=1e-10)


def test_rank_sum_close_to_exact_for_moderate_sizes():
    # every untied arrangement with n1 = n2 = 4 and n1 = 3, n2 = 6
    for n1, n2 in ((4, 4), (3, 6), (5, 5)):
        vals = np.arange(1.0, n1 + n2 + 1)
        for c in itertools.combinations(range(n1 + n2), n1):
            x = vals[list(c)]
            y = np.delete(vals, list(c))
            assert abs(wilcoxon_rank_sum(x, y).p_value - exact_rank_sum_p(x, y)) <= 0.05


def test_kruskal_matches_scipy_and_two_group_rank_sum():
    rng = np.random.default_rng(3)
    groups = [rng.integers(0, 7, n).astype(float) for n in (6, 8, 5)]
    r = kruskal_wallis(groups)
    ref = sps.kruskal(*groups)
    assert r.statistic == pytest.approx(ref.statistic, rel=1e-12)
    assert r.p_value == pytest.approx(ref.pvalue, rel=1e-10)
    a, b = rng.normal(size=9), rng.normal(size=7) + 0.8
    assert abs(kruskal_wallis([a, b]).p_value - wilcoxon_rank_sum(a, b, continuity=False).p_value) < 1e-12


def test_kendall_examples():
    assert kendall_tau([1, 2, 3, 4, 5], [1, 2, 3, 4, 5]).statistic == pytest.approx(1.0)
    assert kendall_tau([1, 2, 3, 4, 5], [5, 4, 3, 2, 1]).statistic == pytest.approx(-1.0)
    assert kendall_tau([1, 1, 1], [1, 2, 3]).p_value == 1.0
    with pytest.raises(LengthMismatch):
        kendall_tau([1, 2, 3], [1, 2])


@pytest.mark.parametrize("seed", range(5))
def test_kendall_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 6, 25).astype(float)
    y = rng.integers(0, 4, 25).astype(float) + 0.1 * x
    ref = sps.kendalltau(x, y, method="asymptotic")
    r = kendall_tau(x, y)
    assert r.statistic == pytest.approx(ref.statistic, abs=1e-12)
    assert r.p_value == pytest.approx(ref.pvalue, rel=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_spearman_matches_scipy(seed):
    rng = np.random.default_rng(seed + 10)
    x = rng.integers(0, 8, 30).astype(float)
    y = x + rng.normal(size=30) * 3
    ref = sps.spearmanr(x, y)
    r = spearman_rho(x, y)
    assert r.statistic == pytest.approx(ref.statistic, abs=1e-12)
    assert r.p_value == pytest.approx(ref.pvalue, rel=1e-9)


def test_spearman_perfect():
    assert spearman_rho([1, 2, 3, 4], [2, 4, 6, 8]).statistic == pytest.approx(1.0)
    assert spearman_rho([1, 2, 3, 4], [2, 4, 6, 8]).p_value == 0.0


def test_brute_force_correlations_on_small_vectors():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        n = int(rng.integers(3, 12))
        x = rng.integers(0, 5, n).astype(float)
        y = rng.integers(0, 5, n).astype(float)
        s = brute_kendall_s(x, y)
        n0 = n * (n - 1) / 2
        tx = sum(c * (c - 1) / 2 for c in np.unique(x, return_counts=True)[1])
        ty = sum(c * (c - 1) / 2 for c in np.unique(y, return_counts=True)[1])
        den = math.sqrt((n0 - tx) * (n0 - ty))
        expect_tau = s / den if den > 0 else 0.0
        assert kendall_tau(x, y).statistic == pytest.approx(expect_tau, abs=1e-12)
        rx, ry = sps.rankdata(x), sps.rankdata(y)
        vx, vy = np.sum((rx - rx.mean()) ** 2), np.sum((ry - ry.mean()) ** 2)
        expect_rho = np.sum((rx - rx.mean()) * (ry - ry.mean())) / math.sqrt(vx * vy) if vx * vy > 0 else 0.0
        assert spearman_rho(x, y).statistic == pytest.approx(expect_rho, abs=1e-12)


@settings(max_examples=100)
@given(st.lists(st.integers(-20, 20), max_size=40))
def test_inversion_count_matches_quadratic(seq):
    brute = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    assert _count_inversions(seq) == brute


# grid-spaced values keep exp() strictly increasing in floating point
finite = st.integers(-400, 400).map(lambda i: i / 8)


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=2, max_size=12), st.lists(finite, min_size=2, max_size=12))
def test_rank_sum_monotone_invariance(x, y):
    a = wilcoxon_rank_sum(x, y).p_value
    b = wilcoxon_rank_sum(np.exp(np.array(x) / 10), np.exp(np.array(y) / 10)).p_value
    assert a == pytest.approx(b, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=3, max_size=15), st.randoms(use_true_random=False))
def test_correlation_invariances(pairs, rnd):
    x = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    k = kendall_tau(x, y).p_value
    s = spearman_rho(x, y).p_value
    assert kendall_tau(np.exp(x / 10), y).p_value == pytest.approx(k, abs=1e-12)
    assert spearman_rho(np.exp(x / 10), y).p_value == pytest.approx(s, abs=1e-12)
    idx = list(range(len(x)))
    rnd.shuffle(idx)
    assert kendall_tau(x[idx], y[idx]).p_value == pytest.approx(k, abs=1e-12)
    assert spearman_rho(x[idx], y[idx]).p_value == pytest.approx(s, abs=1e-12)


def test_null_rejection_rate():
    rng = np.random.default_rng(2024)
    x = rng.normal(size=(10_000, 25))
    y = rng.normal(size=(10_000, 25))
    rate = np.mean([wilcoxon_rank_sum(a, b).p_value <= 0.05 for a, b in zip(x, y)])
    assert abs(rate - 0.05) <= 0.01


def test_two_sample_z():
    r = two_sample_z(0.5, 1.0, 20, 20)
    assert r.p_value == pytest.approx(2 * sps.norm.sf(0.5 / math.sqrt(0.1)), rel=1e-12)
    assert two_sample_z(-0.5, 1.0, 20, 20).p_value == r.p_value
    assert two_sample_z(0.0, 1.0, 5, 5).p_value == 1.0
    with pytest.raises(DomainError):
        two_sample_z(1.0, 0.0, 5, 5)


def test_cliffs_delta():
    assert cliffs_delta([5, 6], [1, 2]) == 1.0
    assert cliffs_delta([1, 2, 3], [1, 2, 3]) == 0.0
    assert cliffs_delta([1, 2, 3], [2, 3, 4]) == pytest.approx(-5 / 9)


def test_neg_log10_floor():
    assert np.isfinite(neg_log10(0.0))
    assert neg_log10(0.01) == pytest.approx(2.0)


def _masks(n1, n2, rng, draws):
    out = []
    for _ in range(draws):
        m = np.zeros(n1 + n2)
        m[rng.permutation(n1 + n2)[:n1]] = 1
        out.append(m)
    return np.array(out)


def test_kernels_match_scalar_tests():
    rng = np.random.default_rng(8)
    n1, n2 = 7, 9
    x = rng.integers(0, 4, size=(n1 + n2, 5)).astype(float)
    x[:, 4] = 1.0  # constant feature
    masks = _masks(n1, n2, rng, 6)
    rs = RankSumKernel(x, n1).pvalues(masks)
    kw = KruskalKernel(x, n1).pvalues(masks)
    for d, m in enumerate(masks):
        g1, g2 = x[m == 1], x[m == 0]
        for j in range(5):
            assert rs[d, j] == pytest.approx(wilcoxon_rank_sum(g1[:, j], g2[:, j]).p_value, rel=1e-12, abs=1e-15)
            assert kw[d, j] == pytest.approx(kruskal_wallis([g1[:, j], g2[:, j]]).p_value, rel=1e-12, abs=1e-15)
    z = ZKernel(x, n1, 1.0).pvalues(masks[:1])
    diff = x[masks[0] == 1].mean(0) - x[masks[0] == 0].mean(0)
    assert z[0, 0] == pytest.approx(two_sample_z(diff[0], 1.0, n1, n2).p_value, rel=1e-12)


def test_correlation_kernels_match_scalar_tests():
    rng = np.random.default_rng(9)
    n = 13
    y = rng.integers(0, 6, n).astype(float)
    x = rng.integers(0, 5, size=(n, 4)).astype(float)
    orders = np.array([rng.permutation(n) for _ in range(5)])
    sp = SpearmanKernel(x, y).pvalues(orders)
    kd = KendallKernel(x, y).pvalues(orders)
    for d, o in enumerate(orders):
        for j in range(4):
            assert sp[d, j] == pytest.approx(spearman_rho(x[:, j], y[o]).p_value, rel=1e-10, abs=1e-15)
            assert kd[d, j] == pytest.approx(kendall_tau(x[:, j], y[o]).p_value, rel=1e-10, abs=1e-15)
