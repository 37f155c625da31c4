"""Empirical distributions, histograms, and Kolmogorov-Smirnov distances."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import kolmogi

from .errors import InvalidSpecError


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted overlap samples in [0, 1]."""

    samples: np.ndarray
    count: int

    def __post_init__(self):
        if self.count < 1 or len(self.samples) != self.count:
            raise InvalidSpecError("sample count mismatch or empty sample set")
        if np.any(np.diff(self.samples) < 0):
            raise InvalidSpecError("samples must be sorted ascending")
        if self.samples[0] < 0.0 or self.samples[-1] > 1.0:
            raise InvalidSpecError("samples must lie in [0, 1]")

    @classmethod
    def from_samples(cls, values) -> "EmpiricalDistribution":
        arr = np.sort(np.asarray(values, dtype=float))
        return cls(samples=arr, count=len(arr))

    def ecdf(self, x) -> np.ndarray:
        return np.searchsorted(self.samples, x, side="right") / self.count


@dataclass(frozen=True)
class Histogram:
    """Density-normalized histogram: sum(density * width) = 1."""

    bin_edges: np.ndarray
    densities: np.ndarray


def ks_statistic(sorted_values: np.ndarray, cdf) -> float:
    """sup_x |ECDF(x) - CDF(x)|, evaluated on both sides of every step."""
    n = len(sorted_values)
    if n == 0:
        raise InvalidSpecError("empty sample set")
    f = np.asarray(cdf(sorted_values), dtype=float)
    i = np.arange(n)
    return float(max(np.max(f - i / n), np.max((i + 1) / n - f)))


def ks_distance(empirical: EmpiricalDistribution, cdf) -> float:
    """One-sample KS distance between an empirical set and a model CDF."""
    return ks_statistic(empirical.samples, cdf)


def ks_two_sample_arrays(a: np.ndarray, b: np.ndarray) -> float:
    """sup-distance between the ECDFs of two (unsorted) sample arrays."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise InvalidSpecError("empty sample set")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.abs(fa - fb).max())


def ks_two_sample(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    return ks_two_sample_arrays(a.samples, b.samples)


def ks_null_quantile(n: int, m: int | None = None, alpha: float = 0.01) -> float:
    """Upper alpha quantile of the KS distance under the null, asymptotic.

    One-sample for m = None, else two-sample with sizes (n, m).
    """
    if n < 1 or (m is not None and m < 1):
        raise InvalidSpecError("sample sizes must be positive")
    if not 0.0 < alpha < 1.0:
        raise InvalidSpecError("alpha must be in (0, 1)")
    scale = math.sqrt(1.0 / n) if m is None else math.sqrt((n + m) / (n * m))
    return float(kolmogi(alpha)) * scale


def histogram(empirical: EmpiricalDistribution, n_bins: int) -> Histogram:
    """Equal-width density histogram on [0, 1]."""
    if n_bins < 1:
        raise InvalidSpecError("n_bins must be >= 1")
    densities, edges = np.histogram(
        empirical.samples, bins=n_bins, range=(0.0, 1.0), density=True
    )
    return Histogram(bin_edges=edges, densities=densities)
