import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from progperm.errors import DomainError
from progperm.permutation import (
    SwapDraw,
    apply_swap,
    continuous_draw_count,
    continuous_order,
    draw_stream,
    enumerate_swap_draws,
    full_mixing_index,
    generate_swap_draw,
    log_choose,
    scenario_draw_count,
    scenario_orders,
    scenario_swap_draws,
    swap_mask,
)


def test_vandermonde_identity():
    for n1 in range(1, 13):
        for n2 in range(1, 13):
            K = min(n1, n2)
            assert sum(math.comb(n1, k) * math.comb(n2, k) for k in range(K + 1)) == math.comb(n1 + n2, K)


@pytest.mark.parametrize("n1, n2, kf", [(30, 30, 15), (14, 15, 7), (166, 120, 70), (126, 91, 53), (20, 20, 10)])
def test_full_mixing_index_values(n1, n2, kf):
    assert full_mixing_index(n1, n2) == kf


@settings(max_examples=200)
@given(st.integers(1, 60), st.integers(1, 60))
def test_full_mixing_index_maximizes_draw_count(n1, n2):
    counts = [math.comb(n1, k) * math.comb(n2, k) for k in range(min(n1, n2) + 1)]
    best = max(counts)
    # the formula picks a maximizer (ties between neighbors are possible)
    assert counts[full_mixing_index(n1, n2)] == best


def test_log_choose():
    assert log_choose(10, 0) == 0.0
    assert log_choose(10, 10) == 0.0
    assert log_choose(30, 15) == pytest.approx(math.log(math.comb(30, 15)), rel=1e-13)
    with pytest.raises(DomainError):
        log_choose(3, 4)


def test_draw_budget_formula_and_clamp():
    b = scenario_draw_count(30, 30, 15)
    expect = math.ceil(60 * 2 * math.log(math.comb(30, 15)))
    assert b.nu == expect and not b.exhaustive
    assert scenario_draw_count(30, 30, 0).nu == 1
    # k = K: exactly one distinct draw
    full = scenario_draw_count(30, 30, 30)
    assert full.nu == 1 and full.exhaustive
    small = scenario_draw_count(4, 4, 2, 2.0)
    assert small.total == 36 and small.exhaustive and small.nu == 36
    with pytest.raises(DomainError):
        scenario_draw_count(5, 5, 6)
    with pytest.raises(DomainError):
        scenario_draw_count(5, 5, 2, draw_scale=0)


def test_draw_scale_is_monotone():
    a = scenario_draw_count(30, 30, 10, 0.25)
    b = scenario_draw_count(30, 30, 10, 1.0)
    assert a.nu < b.nu


def test_continuous_budget():
    b = continuous_draw_count(10, 3, 1.0)
    assert b.total == 720
    assert b.nu == min(720, math.ceil(10 * math.log(720)))
    assert continuous_draw_count(10, 0).nu == 1


def test_streams_are_reproducible_and_distinct():
    a = draw_stream(1, 2, 3).random(4)
    assert np.array_equal(a, draw_stream(1, 2, 3).random(4))
    assert not np.array_equal(a, draw_stream(1, 2, 4).random(4))
    assert not np.array_equal(a, draw_stream(1, 3, 3).random(4))


def test_generated_draw_shape():
    d = generate_swap_draw(draw_stream(0, 3, 0), 7, 5, 3)
    assert d.k == 3
    assert len(set(d.from_group1)) == 3 and max(d.from_group1) < 7
    assert len(set(d.from_group2)) == 3 and max(d.from_group2) < 5
    assert list(d.from_group1) == sorted(d.from_group1)


def test_enumeration_is_complete():
    draws = list(enumerate_swap_draws(4, 3, 2))
    assert len(draws) == math.comb(4, 2) * math.comb(3, 2)
    assert len({(d.from_group1, d.from_group2) for d in draws}) == len(draws)


def test_sampled_draws_uniform():
    n1, n2, k = 4, 4, 2
    counts = Counter()
    for d in range(7200):
        draw = generate_swap_draw(draw_stream(9, k, d), n1, n2, k)
        counts[(draw.from_group1, draw.from_group2)] += 1
    assert len(counts) == 36
    obs = np.array(list(counts.values()))
    assert stats.chisquare(obs).pvalue > 1e-3


def test_scenario_draws_chunking_matches_whole():
    b = scenario_draw_count(10, 9, 3, 0.5)
    whole = list(scenario_swap_draws(10, 9, b, 4))
    parts = [d for s in range(0, b.nu, 7) for d in scenario_swap_draws(10, 9, b, 4, s, s + 7)]
    assert whole == parts
    assert len(whole) == b.nu


def test_apply_swap_example():
    labels = np.array([1, 1, 1, 2, 2, 2])
    out = apply_swap(labels, SwapDraw((0,), (2,)))
    assert list(out) == [2, 1, 1, 2, 2, 1]
    with pytest.raises(IndexError):
        apply_swap(labels, SwapDraw((5,), (0,)))


@settings(max_examples=100)
@given(st.data())
def test_apply_swap_involution_and_balance(data):
    n1 = data.draw(st.integers(2, 12))
    n2 = data.draw(st.integers(2, 12))
    k = data.draw(st.integers(0, min(n1, n2)))
    labels = np.array(data.draw(st.permutations([1] * n1 + [2] * n2)))
    seed = data.draw(st.integers(0, 2**32))
    draw = generate_swap_draw(np.random.default_rng(seed), n1, n2, k)
    part = (np.flatnonzero(labels == 1), np.flatnonzero(labels == 2))
    once = apply_swap(labels, draw)
    assert np.sum(once == 1) == n1 and np.sum(once == 2) == n2
    assert np.sum(once != labels) == 2 * k
    assert np.array_equal(apply_swap(once, draw, part), labels)


def test_swap_mask_matches_apply_swap():
    d = SwapDraw((1, 3), (0, 2))
    labels = np.array([1] * 5 + [2] * 4)
    assert np.array_equal(swap_mask(5, 4, d) == 1, apply_swap(labels, d) == 1)


@settings(max_examples=50)
@given(st.integers(1, 15), st.data())
def test_continuous_order_moves_at_most_k(n, data):
    k = data.draw(st.integers(0, n))
    order = continuous_order(np.random.default_rng(data.draw(st.integers(0, 1000))), n, k)
    assert sorted(order) == list(range(n))
    assert np.sum(order != np.arange(n)) <= k


def test_continuous_exhaustive_enumeration():
    b = continuous_draw_count(4, 2, 10.0)
    assert b.exhaustive and b.nu == 12
    orders = list(scenario_orders(4, b, 0))
    assert len(orders) == 12
