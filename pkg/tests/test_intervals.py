import math

import numpy as np
import pytest
from bootens.core import RngStream
from bootens.errors import InvariantViolation
from bootens.intervals import (
    BdeStatistics,
    IntervalKind,
    IntervalSet,
    Method,
    PointPrediction,
    bde_confidence_interval,
    bde_intervals,
    bde_prediction_interval,
    de_confidence_interval,
    de_intervals,
    de_mixture_moments,
    de_prediction_interval,
    empirical_quantiles,
    estimate_sigma_d_sq,
    estimate_sigma_t_sq,
)

sigma_t_tests = [
    ([1, 1, 1, 1, 1], 0.0),
    ([0, 2], 2.0),
    ([1, 2, 3, 4, 5], 2.5),
]


@pytest.mark.parametrize("means, expected", sigma_t_tests)
def test_estimate_sigma_t_sq(means, expected):
    assert estimate_sigma_t_sq(means) == pytest.approx(expected)


def test_sigma_t_needs_two_members():
    with pytest.raises(ValueError):
        estimate_sigma_t_sq([1.0])


sigma_d_tests = [
    ([1, 2, 3], [1, 2, 3], 0.0),
    ([0, 0], [1, -1], 1.0),
    ([1, 2, 3], [2, 2, 2], 2 / 3),
]


@pytest.mark.parametrize("original, retrained, expected", sigma_d_tests)
def test_estimate_sigma_d_sq(original, retrained, expected):
    assert estimate_sigma_d_sq(original, retrained) == pytest.approx(expected)


def test_sigma_d_shape_mismatch():
    with pytest.raises(ValueError):
        estimate_sigma_d_sq([1, 2, 3], [1, 2])


def test_empirical_quantiles_interpolate():
    assert empirical_quantiles([0.0, 1.0, 2.0, 3.0], [0.5]) == pytest.approx([1.5])


def test_bde_confidence_interval():
    p = PointPrediction(0.0, 1.25, 0.75, 1.0, 5)
    lower, upper = bde_confidence_interval(p, 0.2)
    assert upper == pytest.approx(1.533206, abs=1e-6)
    assert lower == pytest.approx(-1.533206, abs=1e-6)


def test_bde_confidence_interval_zero_variance():
    assert bde_confidence_interval(PointPrediction(3.0, 0.0, 0.0, 1.0, 4), 0.1) == (3.0, 3.0)


def test_bde_confidence_interval_scales():
    lower, upper = bde_confidence_interval(PointPrediction(1.0, 1.0, 0.5, 1.0, 5), 0.1)
    lower2, upper2 = bde_confidence_interval(PointPrediction(2.0, 4.0, 2.0, 4.0, 5), 0.1)
    assert (lower2, upper2) == pytest.approx((2 * lower, 2 * upper))


@pytest.mark.parametrize("alpha", [0.05, 0.2])
def test_bde_prediction_interval_gaussian_limit(alpha):
    p = PointPrediction(1.0, 0.0, 0.0, 4.0, 5)
    lower, upper = bde_prediction_interval(p, alpha, 100000, RngStream(0))
    z = 1.959964 if alpha == 0.05 else 1.281552
    assert lower == pytest.approx(1.0 - 2 * z, abs=0.06)
    assert upper == pytest.approx(1.0 + 2 * z, abs=0.06)


def test_bde_prediction_interval_epistemic_limit():
    p = PointPrediction(0.0, 1.25, 0.75, 1e-10, 5)
    lower, upper = bde_prediction_interval(p, 0.2, 100000, RngStream(1))
    assert lower == pytest.approx(-1.533206, abs=0.05)
    assert upper == pytest.approx(1.533206, abs=0.05)


def test_prediction_interval_needs_draws():
    with pytest.raises(ValueError):
        bde_prediction_interval(PointPrediction(0.0, 1.0, 1.0, 1.0, 5), 0.1, 999, RngStream(0))


def test_point_prediction_needs_members():
    with pytest.raises(ValueError):
        bde_confidence_interval(PointPrediction(0.0, 1.0, 1.0, 1.0, 1), 0.1)


def random_statistics(m=5, n=40, seed=0):
    rng = RngStream(seed).generator
    means = rng.normal(size=(m, n))
    variances = rng.uniform(0.1, 2.0, size=(m, n))
    retrained = means + rng.normal(scale=0.5, size=(m, n))
    return means, variances, retrained


def test_intervals_are_nested_in_alpha():
    means, variances, retrained = random_statistics()
    stats = BdeStatistics.from_predictions(means, variances, retrained)
    alphas = [0.05, 0.1, 0.2, 0.3]
    out = bde_intervals(stats, alphas, 2000, RngStream(2))
    de = de_intervals(means, variances, alphas)
    for intervals in (out, de):
        for kind in IntervalKind:
            for wide, narrow in zip(alphas[:-1], alphas[1:]):
                assert np.all(intervals[(kind, wide)].lower <= intervals[(kind, narrow)].lower)
                assert np.all(intervals[(kind, wide)].upper >= intervals[(kind, narrow)].upper)


def test_prediction_interval_contains_center():
    means, variances, retrained = random_statistics()
    stats = BdeStatistics.from_predictions(means, variances, retrained)
    pi = bde_intervals(stats, [0.3], 5000, RngStream(3), [IntervalKind.PREDICTION])
    assert np.all(pi[(IntervalKind.PREDICTION, 0.3)].contains(stats.f_star))
    assert (IntervalKind.CONFIDENCE, 0.3) not in pi


def test_bde_intervals_match_point_formula():
    means, variances, retrained = random_statistics(n=5)
    stats = BdeStatistics.from_predictions(means, variances, retrained)
    ci = bde_intervals(stats, [0.1], 1000, RngStream(0))[(IntervalKind.CONFIDENCE, 0.1)]
    for j in range(5):
        assert (ci.lower[j], ci.upper[j]) == pytest.approx(
            bde_confidence_interval(stats.point(j), 0.1)
        )


@pytest.mark.parametrize("m", [2, 3, 5, 20])
def test_bde_wider_than_de_condition(m):
    means, variances, retrained = random_statistics(m=m, n=200, seed=m)
    stats = BdeStatistics.from_predictions(means, variances, retrained)
    bde = bde_intervals(stats, [0.2], 1000, RngStream(0), [IntervalKind.CONFIDENCE])
    de_lower, de_upper = de_confidence_interval(means, 0.2)
    bde_wider = bde[(IntervalKind.CONFIDENCE, 0.2)].width > de_upper - de_lower
    predicted = stats.sigma_d_sq > stats.sigma_t_sq * (m - 2) / m
    assert np.array_equal(bde_wider, predicted)


@pytest.mark.parametrize("alpha", [0.05, 0.2])
@pytest.mark.parametrize("m", [2, 5, 20])
@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0])
def test_bde_confidence_coverage(alpha, m, gamma):
    # truth f = 0; originals share a data error d and add independent training
    # noise; each retrained member moves by a fresh draw of the data error
    trials = 20000
    rng = RngStream(100 + m, int(10 * gamma)).generator
    sigma_d, sigma_t = math.sqrt(gamma), math.sqrt(1.0 - gamma)
    d = rng.normal(scale=sigma_d, size=trials)
    originals = d + rng.normal(scale=sigma_t, size=(m, trials))
    retrained = originals + rng.normal(scale=sigma_d, size=(m, trials))
    stats = BdeStatistics.from_predictions(originals, np.ones((m, trials)), retrained)
    ci = bde_intervals(stats, [alpha], 1000, RngStream(0), [IntervalKind.CONFIDENCE])
    coverage = ci[(IntervalKind.CONFIDENCE, alpha)].contains(np.zeros(trials)).mean()
    assert coverage >= (1 - alpha) - 3 * math.sqrt(alpha * (1 - alpha) / trials)


mixture_tests = [
    ([0, 0], [1, 1], (0.0, 1.0)),
    ([-1, 1], [1e-12, 1e-12], (0.0, 1.0)),
    ([1, 3], [2, 4], (2.0, 4.0)),
]


@pytest.mark.parametrize("means, variances, expected", mixture_tests)
def test_de_mixture_moments(means, variances, expected):
    assert de_mixture_moments(means, variances) == pytest.approx(expected)


def test_de_mixture_matches_sampling():
    rng = RngStream(9).generator
    n = 1_000_000
    pick = rng.integers(0, 2, size=n)
    draws = np.where(pick == 0, rng.normal(1, math.sqrt(2), n), rng.normal(3, 2, n))
    f_star, sigma_star_sq = de_mixture_moments([1.0, 3.0], [2.0, 4.0])
    assert draws.mean() == pytest.approx(f_star, abs=0.01)
    assert draws.var() == pytest.approx(sigma_star_sq, abs=0.04)


de_pi_tests = [
    (0.0, 1.0, 0.05, 1.959964),
    (0.0, 0.0, 0.05, 0.0),
    (0.0, 4.0, 0.2, 2 * 1.281552),
]


@pytest.mark.parametrize("f_star, sigma_sq, alpha, half", de_pi_tests)
def test_de_prediction_interval(f_star, sigma_sq, alpha, half):
    lower, upper = de_prediction_interval(f_star, sigma_sq, alpha)
    assert upper == pytest.approx(f_star + half, abs=1e-6)
    assert lower == pytest.approx(f_star - half, abs=1e-6)


de_ci_tests = [
    ([2, 2, 2], 0.1, 0.0),
    ([0, 2], 0.2, 3.077684),
    ([1, 2, 3, 4, 5], 0.2, 1.533206 * math.sqrt(2)),
]


@pytest.mark.parametrize("means, alpha, half", de_ci_tests)
def test_de_confidence_interval(means, alpha, half):
    lower, upper = de_confidence_interval(means, alpha)
    center = float(np.mean(means))
    assert upper - center == pytest.approx(half, abs=1e-5)
    assert center - lower == pytest.approx(half, abs=1e-5)


def test_naive_bootstrap_uses_de_formulas():
    means, variances, _ = random_statistics()
    de = de_intervals(means, variances, [0.1])
    nb = de_intervals(means, variances, [0.1], method=Method.NB)
    for key in de:
        assert nb[key].method is Method.NB
        assert np.array_equal(nb[key].lower, de[key].lower)


def test_interval_set_rejects_inverted_bounds():
    with pytest.raises(InvariantViolation):
        IntervalSet([1.0], [0.0], 0.1, IntervalKind.CONFIDENCE, Method.BDE)


def test_interval_set_is_closed():
    interval = IntervalSet([0.0, 0.0], [1.0, 1.0], 0.1, IntervalKind.PREDICTION, Method.DE)
    assert list(interval.contains([1.0, 1.1])) == [True, False]
    assert np.array_equal(interval.width, [1.0, 1.0])
