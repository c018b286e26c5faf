"""Monte Carlo estimators and a one-sample Kolmogorov-Smirnov test.

All stochastic acceptance checks in this package are phrased as "within k
standard errors" with k = 4 (false-alarm probability below 1e-4 per check
under Gaussian asymptotics); test seeds are fixed so failures are
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateReferenceError, NonFiniteDrawError
from .streams import GaussianStream


@dataclass(frozen=True)
class MCEstimate:
    """Single-pass mean/variance estimate with its standard error."""

    mean: float
    variance: float
    se: float
    count: int
    seed: int | None = None
    first_index: int | None = None

    @classmethod
    def _from_moments(cls, mean, m2, count, seed=None, first_index=None):
        variance = m2 / (count - 1) if count > 1 else 0.0
        return cls(mean=float(mean), variance=float(variance),
                   se=float(math.sqrt(variance / count)), count=count,
                   seed=seed, first_index=first_index)


def mc_estimate(sampler, count: int, stream: GaussianStream) -> MCEstimate:
    """Welford single-pass estimate over `count` draws.

    Draw k calls the sampler with the derived stream (seed, index + k), so the
    result is a pure function of the stream layout.
    """
    if count < 2:
        raise ValueError("need at least 2 draws")
    mean = 0.0
    m2 = 0.0
    for k in range(count):
        x = float(sampler(stream.child(k)))
        if not math.isfinite(x):
            raise NonFiniteDrawError(f"draw {k} returned {x}")
        delta = x - mean
        mean += delta / (k + 1)
        m2 += delta * (x - mean)
    return MCEstimate._from_moments(mean, m2, count,
                                    seed=stream.seed, first_index=stream.index)


def mc_from_samples(samples: np.ndarray, seed: int | None = None,
                    first_index: int | None = None) -> MCEstimate:
    """Estimate from an already-materialized sample array (vectorized batteries)."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise ValueError("need at least 2 draws")
    if not np.all(np.isfinite(samples)):
        raise NonFiniteDrawError("sample array contains non-finite values")
    mean = float(samples.mean())
    m2 = float(np.sum((samples - mean) ** 2))
    return MCEstimate._from_moments(mean, m2, samples.size, seed, first_index)


def merge_estimates(a: MCEstimate, b: MCEstimate) -> MCEstimate:
    """Associative Welford merge; canonical order is ascending first_index."""
    n = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * b.count / n
    m2 = (a.variance * (a.count - 1) + b.variance * (b.count - 1)
          + delta**2 * a.count * b.count / n)
    return MCEstimate._from_moments(mean, m2, n, seed=a.seed,
                                    first_index=a.first_index)


@dataclass(frozen=True)
class KSReport:
    """One-sample KS statistic against a Gaussian reference."""

    statistic: float
    p_value: float
    count: int
    mean: float
    variance: float


#: Terms kept in the asymptotic Kolmogorov survival series.
_KS_SERIES_TERMS = 100


def _kolmogorov_sf(x: float) -> float:
    """Asymptotic survival function 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2),
    truncated at _KS_SERIES_TERMS terms and clipped to [0, 1]."""
    if x <= 0.05:  # series converges too slowly; the limit is 1
        return 1.0
    total = 0.0
    sign = 1.0
    for k in range(1, _KS_SERIES_TERMS + 1):
        term = math.exp(-2.0 * (k * x) ** 2)
        total += sign * term
        if term < 1e-18:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_test(samples, mean: float, variance: float) -> KSReport:
    """Exact D statistic and asymptotic p-value against Normal(mean, variance).

    D is the supremum over the sample of |empirical CDF - reference CDF|; the
    p-value is the Kolmogorov survival function at sqrt(n) * D.
    """
    if variance <= 0:
        raise DegenerateReferenceError("reference variance must be positive")
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n < 30:
        raise ValueError("need at least 30 samples")
    cdf = ndtr((x - mean) / math.sqrt(variance))
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    d = float(max(upper.max(), lower.max()))
    return KSReport(statistic=d, p_value=_kolmogorov_sf(math.sqrt(n) * d),
                    count=n, mean=mean, variance=variance)
