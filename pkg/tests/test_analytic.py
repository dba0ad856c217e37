import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from progperm.analytic import AnalyticSpec, analytic_curve, analytic_p, analytic_families, permuted_mean_shift
from progperm.errors import DomainError
from progperm.stats import two_sample_z


def test_shrink_factor():
    assert permuted_mean_shift(20, 20, 0) == 1.0
    assert permuted_mean_shift(20, 20, 10) == 0.0
    assert permuted_mean_shift(20, 20, 20) == -1.0
    with pytest.raises(DomainError):
        permuted_mean_shift(20, 20, 21)


def test_closed_form_values():
    s = AnalyticSpec(20, 20, 0.5)
    assert analytic_p(s, 0) == pytest.approx(0.2636, abs=1e-4)
    assert analytic_p(s, 10) == 1.0
    assert np.all(analytic_p(AnalyticSpec(20, 20, 0.0), np.arange(21)) == 1.0)


def test_textbook_variant_matches_z_test():
    s = AnalyticSpec(20, 20, 0.5)
    assert analytic_p(s, 0, textbook=True) == pytest.approx(two_sample_z(0.5, 1.0, 20, 20).p_value, rel=1e-14)


def test_symmetry_balanced():
    _, y = analytic_curve(AnalyticSpec(20, 20, 1.0))
    np.testing.assert_allclose(y, y[::-1], rtol=0, atol=1e-12)


@settings(max_examples=60)
@given(st.integers(2, 40), st.integers(2, 40), st.floats(0.05, 3.0))
def test_monotone_on_each_side(n1, n2, delta):
    s = AnalyticSpec(n1, n2, delta)
    ks = np.arange(s.K + 1)
    y = -np.log10(analytic_p(s, ks))
    cross = n1 * n2 / (n1 + n2)
    left = ks[ks <= math.floor(cross)]
    right = ks[ks >= math.ceil(cross)]
    assert np.all(np.diff(y[left]) < 0)
    if right.size > 1:
        assert np.all(np.diff(y[right]) > 0)


def test_analytic_families_order():
    by_diff, by_sigma = analytic_families()
    heads = [analytic_curve(s)[1][0] for s in by_diff]
    assert heads == sorted(heads)
    heads = [analytic_curve(s)[1][0] for s in by_sigma]
    assert heads == sorted(heads, reverse=True)


def test_spec_validation():
    with pytest.raises(DomainError):
        AnalyticSpec(5, 5, 1.0, sigma=0)
    assert AnalyticSpec.from_means(5, 5, 2.0, 4.0).delta == 0.5
