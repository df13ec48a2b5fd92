import pytest
from scipy.stats import chisquare

from wyscheck.sampler import FALLBACK_RATIO, SamplePlan, select, target_count


def test_exhaustive():
    assert list(SamplePlan(10, 1.0, 5).indices()) == list(range(10))


def test_empty_domain():
    assert list(SamplePlan(0, 0.5, 1).indices()) == []
    assert target_count(0, 0.5) == 0


@pytest.mark.parametrize("size,rate,expected", [
    (10, 0.1, 1), (1000, 0.01, 10), (10, 0.01, 1), (3, 0.5, 2), (5, 0.5, 3), (7, 1.0, 7), (1, 0.001, 1),
])
def test_target_count(size, rate, expected):
    assert target_count(size, rate) == expected


@pytest.mark.parametrize("seed", range(20))
def test_exact_count_sorted_distinct(seed):
    out = list(SamplePlan(1000, 0.01, seed).indices())
    assert len(out) == 10
    assert out == sorted(set(out))
    assert all(0 <= i < 1000 for i in out)


def test_deterministic():
    assert list(select(500, 37, 9)) == list(select(500, 37, 9))
    assert list(select(500, 37, 9)) != list(select(500, 37, 10))


def test_bad_rate():
    with pytest.raises(ValueError):
        target_count(10, 0)
    with pytest.raises(ValueError):
        target_count(10, 1.5)


def test_single_draw_uniform():
    counts = [0] * 10
    for seed in range(100_000):
        (i,) = select(10, 1, seed)
        counts[i] += 1
    assert all(abs(c - 10_000) < 3 * (100_000 * 0.1 * 0.9) ** 0.5 for c in counts)
    assert chisquare(counts).pvalue > 0.001


def test_pair_inclusion_uniform():
    counts = [0] * 8
    for seed in range(20_000):
        for i in select(8, 3, seed):
            counts[i] += 1
    assert chisquare(counts).pvalue > 0.001


def test_large_domain_falls_back():
    size = 10 ** 30
    out = list(select(size, 5, 3))
    assert len(out) == 5 and out == sorted(set(out))
    assert size > FALLBACK_RATIO * 5
