import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings, strategies as st

from tiecontagion.stats import (
    Distribution,
    StatisticsError,
    bernoulli,
    bernoulli_from_sample,
    betainc,
    histogram,
    kl_divergence,
    mean_and_sem,
    student_t_cdf,
    uniform_histogram,
    wasserstein_1d,
    welch_t_test,
)

unit_samples = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=60)


def random_hist(rng, bins=20):
    m = rng.dirichlet(np.ones(bins))
    return Distribution("histogram", m, np.linspace(0.0, 1.0, bins + 1), 100)


def test_histogram_examples():
    h = histogram([0.0, 0.5, 1.0], bins=2)
    np.testing.assert_allclose(h.masses, [1 / 3, 2 / 3])
    h = histogram([0.37] * 5)
    assert h.masses.max() == 1.0 and h.masses[7] == 1.0
    with pytest.raises(ValueError):
        histogram([0.2, 1.1])
    with pytest.raises(ValueError):
        histogram([])


@given(unit_samples, st.integers(2, 40))
def test_histogram_sums_to_one(sample, bins):
    h = histogram(sample, bins)
    assert abs(h.masses.sum() - 1.0) < 1e-12
    expected, _ = np.histogram(sample, bins=h.bin_edges)
    np.testing.assert_array_equal(np.round(h.masses * len(sample)).astype(int), expected)


def test_kl_examples():
    p, q = bernoulli(0.5), bernoulli(0.25)
    expected = 0.5 * math.log(0.5 / 0.75) + 0.5 * math.log(0.5 / 0.25)
    assert abs(kl_divergence(p, q, epsilon=0.0) - expected) < 1e-12
    assert abs(expected - 0.143841036) < 1e-9
    a = histogram([0.1, 0.9])
    b = histogram([0.1, 0.1])
    assert math.isfinite(kl_divergence(a, b))
    assert kl_divergence(a, b, epsilon=0.0) == math.inf
    assert kl_divergence(a, a) == 0.0
    with pytest.raises(ValueError):
        kl_divergence(a, uniform_histogram(10))
    with pytest.raises(ValueError):
        kl_divergence(a, bernoulli(0.5))


def test_kl_matches_scipy(rng):
    for _ in range(50):
        p, q = random_hist(rng), random_hist(rng)
        assert abs(kl_divergence(p, q, 0.0) - scipy.stats.entropy(p.masses, q.masses)) < 1e-10


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_kl_nonnegative(seed):
    rng = np.random.default_rng(seed)
    p, q = random_hist(rng, 8), random_hist(rng, 8)
    assert kl_divergence(p, q) >= 0.0
    assert kl_divergence(p, p) == 0.0


def test_wasserstein_examples(rng):
    assert wasserstein_1d(bernoulli(0.3), bernoulli(0.3)) == 0.0
    for _ in range(20):
        p1, p2 = rng.random(2)
        assert abs(wasserstein_1d(bernoulli(p1), bernoulli(p2)) - abs(p1 - p2)) < 1e-12
    a = histogram([0.125], bins=4)
    b = histogram([0.875], bins=4)
    assert abs(wasserstein_1d(a, b) - 0.75) < 1e-12


def test_wasserstein_matches_scipy(rng):
    for _ in range(50):
        p, q = random_hist(rng), random_hist(rng)
        ref = scipy.stats.wasserstein_distance(p.support, q.support, p.masses, q.masses)
        assert abs(wasserstein_1d(p, q) - ref) < 1e-12


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_wasserstein_metric_properties(seed):
    rng = np.random.default_rng(seed)
    p, q, r = (random_hist(rng, 10) for _ in range(3))
    assert abs(wasserstein_1d(p, q) - wasserstein_1d(q, p)) < 1e-10
    assert wasserstein_1d(p, r) <= wasserstein_1d(p, q) + wasserstein_1d(q, r) + 1e-10


def test_bernoulli_from_sample():
    b = bernoulli_from_sample([0, 1, 1, 0])
    np.testing.assert_array_equal(b.masses, [0.5, 0.5])
    with pytest.raises(ValueError):
        bernoulli(1.5)


def test_betainc_matches_scipy():
    import scipy.special

    for a, b, x in [(0.5, 0.5, 0.3), (4.0, 0.5, 0.9), (30, 2, 0.97), (2.5, 7, 0.01), (100, 0.5, 0.99)]:
        assert abs(betainc(a, b, x) - scipy.special.betainc(a, b, x)) < 1e-12


@given(st.floats(0.05, 1e4))
def test_t_cdf_at_zero(df):
    assert abs(student_t_cdf(0.0, df) - 0.5) < 1e-10


def test_t_cdf_matches_scipy():
    for df in (1, 2.5, 8, 30, 400):
        for t in (-5, -1.3, 0.2, 2, 12):
            assert abs(student_t_cdf(t, df) - scipy.stats.t.cdf(t, df)) < 1e-11


def test_welch_fixture():
    r = welch_t_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
    assert abs(r.t + 1) < 1e-12 and abs(r.df - 8) < 1e-12
    assert abs(r.p_two_sided - 0.346594) < 1e-5
    ref = scipy.stats.ttest_ind([1, 2, 3, 4, 5], [2, 3, 4, 5, 6], equal_var=False)
    assert abs(r.p_two_sided - ref.pvalue) < 1e-12


def test_welch_edge_cases(rng):
    a = rng.random(10)
    r = welch_t_test(a, a)
    assert r.t == 0.0 and r.p_two_sided == 1.0
    r = welch_t_test(1 + 1e-3 * rng.random(20), 5 + 1e-3 * rng.random(20))
    assert r.p_two_sided < 1e-6
    with pytest.raises(StatisticsError):
        welch_t_test([1.0], [1.0, 2.0])
    with pytest.raises(StatisticsError):
        welch_t_test([1.0, 1.0], [2.0, 2.0])


def test_welch_matches_scipy(rng):
    for _ in range(50):
        a = rng.normal(0, rng.uniform(0.1, 3), int(rng.integers(2, 40)))
        b = rng.normal(rng.normal(), rng.uniform(0.1, 3), int(rng.integers(2, 40)))
        r = welch_t_test(a, b)
        ref = scipy.stats.ttest_ind(a, b, equal_var=False)
        assert abs(r.t - ref.statistic) < 1e-9
        assert abs(r.p_two_sided - ref.pvalue) < 1e-9


@given(st.lists(st.floats(-100, 100), min_size=2, max_size=20),
       st.lists(st.floats(-100, 100), min_size=2, max_size=20))
def test_welch_antisymmetric(a, b):
    try:
        r1 = welch_t_test(a, b)
    except StatisticsError:
        return
    r2 = welch_t_test(b, a)
    assert r1.t == -r2.t
    assert abs(r1.df - r2.df) <= 1e-9 * max(1.0, r1.df)
    assert abs(r1.p_two_sided - r2.p_two_sided) < 1e-12


def test_mean_and_sem():
    m, s = mean_and_sem([1, 2, 3])
    assert m == 2.0 and abs(s - 1 / math.sqrt(3)) < 1e-12
    assert math.isnan(mean_and_sem([])[0])
