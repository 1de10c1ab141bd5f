"""Statistics of price and spin configurations.

All functions are pure.  Histograms use integer bins of ``bin_width`` price
units; bin ``k`` covers ``[origin + k*w, origin + (k+1)*w - 1]`` and its
centre is ``origin + k*w + (w-1)/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ObservableError(ValueError):
    """Input outside an estimator's domain."""


DEFAULT_BIN_WIDTH = 1
DEFAULT_SMOOTH_WINDOW = 5
DEFAULT_PROMINENCE = 0.1


@dataclass(frozen=True)
class Histogram:
    bin_width: int
    origin: int
    counts: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        k = np.arange(len(self.counts))
        return self.origin + k * self.bin_width + (self.bin_width - 1) / 2.0

    @property
    def total(self) -> float:
        return float(np.sum(self.counts))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return (self.bin_width == other.bin_width and self.origin == other.origin
                and np.array_equal(self.counts, other.counts))


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    r_squared: float


def _as_int_prices(prices) -> np.ndarray:
    arr = np.asarray(prices)
    if arr.size == 0:
        raise ObservableError("empty price array")
    return arr.astype(np.int64).ravel()


def price_histogram(prices, bin_width: int = DEFAULT_BIN_WIDTH) -> Histogram:
    """Integer histogram whose first bin starts at ``min(prices)``."""
    arr = _as_int_prices(prices)
    if bin_width < 1:
        raise ObservableError(f"bin width must be a positive integer, got {bin_width}")
    lo = int(arr.min())
    idx = (arr - lo) // bin_width
    counts = np.bincount(idx, minlength=int(idx.max()) + 1)
    return Histogram(int(bin_width), lo, counts.astype(np.int64))


def auto_bin_width(prices) -> int:
    """Freedman-Diaconis width ``ceil(2 * IQR / n**(1/3))``, at least 1 price unit."""
    arr = _as_int_prices(prices)
    q75, q25 = np.percentile(arr, [75, 25])
    return max(1, int(math.ceil(2.0 * (q75 - q25) / arr.size ** (1.0 / 3.0))))


def smooth(h: Histogram, window: int = DEFAULT_SMOOTH_WINDOW) -> Histogram:
    """Centred moving average over ``window`` bins, zero-padded at the edges.

    Every output bin is the sum over its (possibly truncated) window divided
    by the full ``window``, so mass is conserved whenever the outer
    ``window // 2`` bins on each side are empty.
    """
    if window < 1 or window % 2 == 0:
        raise ObservableError(f"smoothing window must be an odd positive integer, got {window}")
    counts = np.asarray(h.counts, dtype=np.float64)
    if window == 1:
        return Histogram(h.bin_width, h.origin, counts)
    half = window // 2
    csum = np.concatenate(([0.0], np.cumsum(counts)))
    k = np.arange(len(counts))
    lo = np.maximum(k - half, 0)
    hi = np.minimum(k + half + 1, len(counts))
    return Histogram(h.bin_width, h.origin, (csum[hi] - csum[lo]) / window)


def _plateau_maxima(values: np.ndarray, threshold: float) -> list[int]:
    """Indices of local maxima (plateaus reported at their centre bin, lower-middle on ties)."""
    n = len(values)
    modes = []
    k = 0
    while k < n:
        end = k
        while end + 1 < n and values[end + 1] == values[k]:
            end += 1
        left_lower = k == 0 or values[k - 1] < values[k]
        right_lower = end == n - 1 or values[end + 1] < values[k]
        if left_lower and right_lower and values[k] > threshold:
            modes.append((k + end) // 2)
        k = end + 1
    return modes


def find_modes(h: Histogram, window: int = DEFAULT_SMOOTH_WINDOW,
               prominence_fraction: float = DEFAULT_PROMINENCE) -> list[float]:
    """Centres of local maxima of the smoothed histogram above ``prominence_fraction * max``."""
    if not 0.0 < prominence_fraction < 1.0:
        raise ObservableError(f"prominence fraction must lie in (0, 1), got {prominence_fraction}")
    if len(h.counts) == 0:
        raise ObservableError("empty histogram")
    s = smooth(h, window).counts
    threshold = prominence_fraction * float(s.max())
    centers = h.centers
    return [float(centers[k]) for k in _plateau_maxima(s, threshold)]


def modality(modes: list[float]) -> str:
    return {0: "empty", 1: "unimodal", 2: "bimodal"}.get(len(modes), "multimodal")


def peak_price(h: Histogram, window: int = 1) -> float:
    """Centre of the global maximum of ``smooth(h, window)``.

    The default ``window=1`` reads the raw counts; callers that want a
    smoothed peak pass their smoothing window.  Ties go to the bin with the
    larger absolute centre, then to the positive side.
    """
    if len(h.counts) == 0:
        raise ObservableError("empty histogram")
    s = smooth(h, window).counts
    centers = h.centers
    best = np.flatnonzero(s == s.max())
    k = max(best, key=lambda b: (abs(centers[b]), centers[b]))
    return float(centers[k])


def variance(prices) -> float:
    """Population variance (divides by the sample count)."""
    arr = np.asarray(prices, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ObservableError("variance of an empty array")
    dev = arr - arr.mean()
    return float(np.mean(dev * dev))


def excess_kurtosis(prices) -> float:
    """Fourth central moment over squared variance, minus 3."""
    arr = np.asarray(prices, dtype=np.float64).ravel()
    if arr.size < 4:
        raise ObservableError(f"excess kurtosis needs at least 4 samples, got {arr.size}")
    dev = arr - arr.mean()
    m2 = np.mean(dev ** 2)
    if m2 == 0.0:
        raise ObservableError("excess kurtosis undefined for zero variance")
    return float(np.mean(dev ** 4) / m2 ** 2 - 3.0)


def count_domain_walls(spins) -> int:
    """Number of ring edges ``(i, i+1 mod N)`` joining unequal spins."""
    arr = np.asarray(spins).ravel()
    if arr.size < 2:
        raise ObservableError(f"domain walls need at least 2 spins, got {arr.size}")
    return int(np.count_nonzero(arr != np.roll(arr, -1)))


def fit_loglog(xs, ys) -> PowerLawFit:
    """Least-squares line through ``(ln x, ln y)``.

    ``intercept`` is in natural-log units, so ``y ~ exp(intercept) * x**slope``.
    """
    x = np.asarray(xs, dtype=np.float64).ravel()
    y = np.asarray(ys, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ObservableError(f"length mismatch: {x.size} abscissae, {y.size} values")
    if x.size < 3:
        raise ObservableError(f"power-law fit needs at least 3 points, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0) or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ObservableError("power-law fit needs strictly positive finite values")
    lx, ly = np.log(x), np.log(y)
    mx, my = lx.mean(), ly.mean()
    sxx = np.sum((lx - mx) ** 2)
    if sxx == 0.0:
        raise ObservableError("power-law fit needs at least two distinct abscissae")
    slope = np.sum((lx - mx) * (ly - my)) / sxx
    intercept = my - slope * mx
    ss_tot = np.sum((ly - my) ** 2)
    ss_res = np.sum((ly - (intercept + slope * lx)) ** 2)
    # a constant series is fitted exactly; its ss_tot is pure rounding
    flat = ss_tot <= x.size * (1e-12 * max(1.0, abs(my))) ** 2
    r2 = 1.0 if flat else 1.0 - ss_res / ss_tot
    return PowerLawFit(float(slope), float(intercept), float(min(max(r2, 0.0), 1.0)))


class PriceOverflowError(ObservableError, OverflowError):
    """Some prices are too large for ``exp`` in double precision."""

    def __init__(self, indices: np.ndarray):
        self.indices = indices
        super().__init__(f"exp overflows for {len(indices)} price(s) at indices {indices[:10].tolist()}")


_EXP_LIMIT = math.log(np.finfo(np.float64).max)


def exp_transform(prices) -> np.ndarray:
    """Positive prices ``exp(p)`` from log-prices ``p``.

    Raises :class:`PriceOverflowError` listing every index whose result
    would overflow (or underflow to zero).
    """
    arr = np.asarray(prices, dtype=np.float64).ravel()
    bad = np.flatnonzero(np.abs(arr) > _EXP_LIMIT)
    if bad.size:
        raise PriceOverflowError(bad)
    return np.exp(arr)
