import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localprice.observables import (Histogram, ObservableError, PriceOverflowError, auto_bin_width,
                                    count_domain_walls, excess_kurtosis, exp_transform, find_modes,
                                    fit_loglog, modality, peak_price, price_histogram, smooth, variance)

int_prices = st.lists(st.integers(-10_000, 10_000), min_size=1, max_size=300)


def test_histogram_examples():
    h = price_histogram([0, 0, 0], 1)
    assert (h.origin, h.counts.tolist()) == (0, [3])
    h = price_histogram([-1, 0, 1], 1)
    assert h.counts.tolist() == [1, 1, 1]
    assert h.centers.tolist() == [-1, 0, 1]
    # bins of width 2 from -2: [-2,-1], [0,1], [2,3]
    h = price_histogram([-2, -2, 3], 2)
    assert (h.origin, h.counts.tolist()) == (-2, [2, 0, 1])
    assert h.centers.tolist() == [-1.5, 0.5, 2.5]


def test_histogram_errors():
    with pytest.raises(ObservableError):
        price_histogram([], 1)
    with pytest.raises(ObservableError):
        price_histogram([1], 0)


@given(int_prices, st.integers(1, 500))
def test_histogram_mass_conservation(prices, w):
    h = price_histogram(prices, w)
    assert h.counts.sum() == len(prices)
    # every price falls in the bin whose range contains it
    for p in prices[:20]:
        k = (p - h.origin) // w
        assert h.origin + k * w <= p <= h.origin + (k + 1) * w - 1
        assert h.counts[k] > 0


def test_smooth_examples():
    h = Histogram(1, 0, np.array([4, 1, 7]))
    assert smooth(h, 1).counts.tolist() == [4, 1, 7]
    assert smooth(Histogram(1, 0, np.array([0, 3, 0])), 3).counts.tolist() == [1, 1, 1]
    got = smooth(Histogram(1, 0, np.array([1, 2, 3, 2, 1])), 3).counts
    assert got == pytest.approx([1, 2, 7 / 3, 2, 1], abs=1e-15)


def test_smooth_even_window_rejected():
    with pytest.raises(ObservableError):
        smooth(Histogram(1, 0, np.array([1, 2])), 4)


@given(st.lists(st.integers(0, 50), min_size=1, max_size=60), st.sampled_from([1, 3, 5, 7, 9]))
def test_smooth_preserves_mass_inside_padding(counts, window):
    pad = [0] * (window // 2)
    h = Histogram(1, 0, np.array(pad + counts + pad))
    assert smooth(h, window).counts.sum() == pytest.approx(sum(counts))


def _bumps(center_a, center_b, sigma=4.0, n_bins=200, height=1000.0):
    x = np.arange(n_bins)
    dens = np.exp(-0.5 * ((x - center_a) / sigma) ** 2) + np.exp(-0.5 * ((x - center_b) / sigma) ** 2)
    return Histogram(1, 0, np.round(height * dens).astype(np.int64))


def test_find_modes_single_spike():
    h = Histogram(1, 1, np.array([0, 0, 0, 0, 50, 0, 0, 0, 0]))
    assert find_modes(h) == [5.0]
    assert find_modes(price_histogram([5] * 50)) == [5.0]


def test_find_modes_two_bumps():
    h = _bumps(50, 150)
    # brute-force oracle: strict local maxima of the raw counts above 10% of max
    c = h.counts
    raw = [k for k in range(1, len(c) - 1) if c[k] > c[k - 1] and c[k] > c[k + 1] and c[k] > 0.1 * c.max()]
    assert raw == [50, 150]
    modes = find_modes(h)
    assert len(modes) == 2
    assert 40 <= modes[0] <= 60 and 140 <= modes[1] <= 160
    assert modality(modes) == "bimodal"


def test_find_modes_flat_histogram_is_unimodal_at_centre():
    h = Histogram(1, -3, np.full(7, 10))
    assert find_modes(h) == [0.0]
    assert modality(find_modes(h)) == "unimodal"


@given(st.lists(st.integers(-60, 60), min_size=5, max_size=400))
def test_modes_mirror_under_price_negation(prices):
    a = find_modes(price_histogram(prices, 1))
    b = find_modes(price_histogram([-p for p in prices], 1))
    assert len(a) == len(b)
    # plateau centres round toward the lower index, so mirrored positions agree to one bin
    assert np.allclose(sorted(-x for x in a), b, atol=1.0)


def test_peak_price_examples():
    assert peak_price(price_histogram([0, 0, 0])) == 0
    assert peak_price(Histogram(1, -1, np.array([1, 5, 1]))) == 0
    # tie between -1 and +1 goes to the larger |price|, then to the positive side
    assert peak_price(Histogram(1, -1, np.array([3, 1, 3]))) == 1


def test_peak_price_prefers_larger_magnitude():
    assert peak_price(Histogram(1, -5, np.array([4, 0, 0, 0, 4, 0, 0]))) == -5


def test_variance_examples():
    assert variance([0, 0, 0]) == 0
    assert variance([-1, 1]) == 1
    assert variance([0, 0, 2, 2]) == 1
    with pytest.raises(ObservableError):
        variance([])


@given(int_prices, st.integers(-10 ** 6, 10 ** 6))
def test_variance_shift_invariance(prices, c):
    assert variance(np.array(prices) + c) == pytest.approx(variance(prices), rel=1e-9, abs=1e-6)


def test_excess_kurtosis_examples():
    assert excess_kurtosis([-1, -1, 1, 1]) == pytest.approx(-2.0)
    peaked = [-1, 1, -1, 1] + [0] * 40
    # hand value: m2 = 4/44, m4 = 4/44 -> m4/m2^2 - 3 = 44/4 - 3 = 8
    assert excess_kurtosis(peaked) == pytest.approx(8.0)
    with pytest.raises(ObservableError):
        excess_kurtosis([2, 2, 2, 2])
    with pytest.raises(ObservableError):
        excess_kurtosis([1, 2, 3])


def test_excess_kurtosis_of_normal_sample():
    n = 200_000
    x = np.random.default_rng(7).normal(size=n)
    # standard error of the sample excess kurtosis for a normal is sqrt(24/n)
    assert abs(excess_kurtosis(x)) < 3 * math.sqrt(24 / n)


def test_domain_wall_examples():
    assert count_domain_walls([1] * 8) == 0
    assert count_domain_walls([1, -1] * 3) == 6
    assert count_domain_walls([1, 1, -1, -1, 1, 1]) == 2
    with pytest.raises(ObservableError):
        count_domain_walls([1])


@given(st.lists(st.sampled_from([-1, 1]), min_size=2, max_size=200))
def test_domain_walls_even_on_ring(spins):
    walls = count_domain_walls(spins)
    assert walls % 2 == 0
    brute = sum(spins[i] != spins[(i + 1) % len(spins)] for i in range(len(spins)))
    assert walls == brute


def test_fit_loglog_exact_power_law():
    xs = np.arange(1, 101, dtype=float)
    fit = fit_loglog(xs, 1 / xs)
    assert fit.slope == pytest.approx(-1.0, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit_loglog(xs, np.full(100, 3.0)).slope == pytest.approx(0.0, abs=1e-9)


def test_fit_loglog_noisy():
    xs = np.arange(1, 101, dtype=float)
    noise = np.exp(np.random.default_rng(3).normal(0, 0.01, size=xs.size))
    fit = fit_loglog(xs, 3 * xs ** -0.5 * noise)
    assert fit.slope == pytest.approx(-0.5, abs=0.05)
    assert fit.intercept == pytest.approx(math.log(3), abs=0.05)


@settings(max_examples=50)
@given(st.just(0.0) | st.floats(0.01, 3) | st.floats(-3, -0.01), st.floats(0.1, 100))
def test_fit_loglog_recovers_any_exponent(k, a):
    xs = np.geomspace(1, 1e4, 30)
    fit = fit_loglog(xs, a * xs ** k)
    assert fit.slope == pytest.approx(k, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("xs,ys", [([1, 2, 3], [1, 0, 1]), ([1, -2, 3], [1, 1, 1]), ([1, 2], [1, 2]),
                                   ([1, 2, 3], [1, 2])])
def test_fit_loglog_domain(xs, ys):
    with pytest.raises(ObservableError):
        fit_loglog(xs, ys)


def test_exp_transform():
    assert exp_transform([0]).tolist() == [1.0]
    assert exp_transform([1, -1]) == pytest.approx([math.e, 1 / math.e])
    with pytest.raises(PriceOverflowError) as err:
        exp_transform([0, 800, 3, -900])
    assert err.value.indices.tolist() == [1, 3]


@given(st.lists(st.integers(-700, 700), min_size=1, max_size=50))
def test_exp_transform_positive(prices):
    assert np.all(exp_transform(prices) > 0)


def test_auto_bin_width():
    assert auto_bin_width([0] * 10) == 1
    prices = np.arange(1000)
    # IQR = 499.5 (linear interpolation), n^(1/3) = 10
    assert auto_bin_width(prices) == math.ceil(2 * 499.5 / 1000 ** (1 / 3))
