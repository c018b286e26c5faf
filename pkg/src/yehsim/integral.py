"""Wiener integrals against sample paths and their analytic moments.

Step integrands integrate exactly (the defining telescoping sum); continuous
integrands go through step projection (the L2-limit construction) or through
pathwise Riemann-Stieltjes sums when a bounded-variation certificate is
present.  Partition points must lie on the path grid: a path is only known at
its grid points and interpolating would fabricate correlation structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MissingBVCertificateError, PartitionNotOnGridError
from .funcspace import Integrand, as_integrand, inner_rho, project_to_steps
from .process import SamplePath
from .stieltjes import (
    DEFAULT_RESOLUTION,
    Interval,
    MeanFunction,
    VarianceFunction,
    stieltjes_quad,
    stieltjes_step,
)


@dataclass(frozen=True)
class WienerIntegralResult:
    """Integral value, the method that produced it, and a refinement estimate.

    step_exact results are partition-refinement invariant and carry estimate 0.
    l2_approx reports |result(cells) - result(cells // 2)|; pathwise_rs reports
    the left/right tag spread of the same partition.  inf means no refinement
    comparison was available.
    """

    value: float
    method: str
    cells: int | None = None
    refinement: float = 0.0


def _locate(grid: np.ndarray, points) -> np.ndarray:
    """Indices of `points` on the grid; exact up to 1e-12 absolute slack."""
    points = np.atleast_1d(np.asarray(points, dtype=float))
    idx = np.searchsorted(grid, points)
    out = np.empty(len(points), dtype=int)
    for k, (i, p) in enumerate(zip(idx, points)):
        best = None
        for j in (i - 1, i, i + 1):
            if 0 <= j < len(grid) and abs(grid[j] - p) <= 1e-12:
                best = j
                break
        if best is None:
            raise PartitionNotOnGridError(
                f"point {p} is not on the path grid; refusing to interpolate"
            )
        out[k] = best
    return out


def integrate_step(f, path: SamplePath) -> WienerIntegralResult:
    """Exact Wiener integral of a step function: sum of ci * (X(ti) - X(t_{i-1}))."""
    f = as_integrand(f)
    if not f.is_step:
        raise TypeError("integrate_step requires a step integrand")
    idx = _locate(path.grid, f.step.partition)
    increments = np.diff(path.values[idx])
    value = float(np.dot(f.step.values, increments))
    return WienerIntegralResult(value, "step_exact")


def _l2_value(f: Integrand, path: SamplePath, cells: int) -> float:
    interval = Interval(float(path.grid[0]), float(path.grid[-1]))
    projected = project_to_steps(f, cells, interval)
    return integrate_step(projected, path).value


def integrate_l2(f, path: SamplePath, cells: int) -> WienerIntegralResult:
    """Wiener integral via the step-projection route (the L2-limit construction).

    Cell boundaries must lie on the path grid.  The refinement estimate
    compares against cells // 2; it is inf when the coarse boundaries do not
    exist on the grid (or cells == 1).
    """
    if cells < 1:
        raise ValueError("cell count must be >= 1")
    f = as_integrand(f)
    value = _l2_value(f, path, cells)
    refinement = math.inf
    if cells >= 2:
        try:
            refinement = abs(value - _l2_value(f, path, cells // 2))
        except PartitionNotOnGridError:
            pass
    return WienerIntegralResult(value, "l2_approx", cells=cells, refinement=refinement)


def integrate_pathwise_rs(f, path: SamplePath, cells: int) -> WienerIntegralResult:
    """Pathwise Riemann-Stieltjes sum with left tags on the path grid.

    Requires a bounded-variation certificate.  The refinement estimate is the
    left/right tag spread |sum of (f(right) - f(left)) * dX| over the same
    cells, which bounds the spread of tagged sums on this partition.
    """
    if cells < 1:
        raise ValueError("cell count must be >= 1")
    f = as_integrand(f)
    if not f.is_step and f.bv_breaks is None:
        raise MissingBVCertificateError(
            "pathwise RS integration requires a bounded-variation certificate"
        )
    a, b = float(path.grid[0]), float(path.grid[-1])
    boundaries = np.linspace(a, b, cells + 1)
    idx = _locate(path.grid, boundaries)
    x = path.values[idx]
    dx = np.diff(x)
    left = f(boundaries[:-1])
    right = f(boundaries[1:])
    value = float(np.dot(left, dx))
    spread = abs(float(np.dot(right - left, dx)))
    return WienerIntegralResult(value, "pathwise_rs", cells=cells, refinement=spread)


def integral_mean(f, lam: MeanFunction, resolution: int = DEFAULT_RESOLUTION) -> float:
    """Expected value of the Wiener integral: the integral of f against d(lambda)."""
    f = as_integrand(f)
    if f.is_step:
        return stieltjes_step(f.step, lam)
    return stieltjes_quad(f, lam, lam.interval.a, lam.interval.b, resolution).value


def integral_covariance(f, g, lam: MeanFunction, rho: VarianceFunction,
                        resolution: int = DEFAULT_RESOLUTION) -> float:
    """E[I(f) I(g)]: the rho inner product plus the product of the means."""
    return inner_rho(f, g, rho, resolution) + integral_mean(
        f, lam, resolution
    ) * integral_mean(g, lam, resolution)


def integral_distribution(f, lam: MeanFunction, rho: VarianceFunction,
                          resolution: int = DEFAULT_RESOLUTION) -> tuple[float, float]:
    """(mean, variance) of the Gaussian law of the Wiener integral."""
    mean = integral_mean(f, lam, resolution)
    variance = inner_rho(f, f, rho, resolution)
    return mean, variance


def integrate_step_batch(f, value_matrix: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Exact step integrals for a batch of paths (rows of value_matrix).

    Matches integrate_step row by row; used by the Monte Carlo batteries.
    """
    f = as_integrand(f)
    if not f.is_step:
        raise TypeError("integrate_step_batch requires a step integrand")
    idx = _locate(np.asarray(grid, dtype=float), f.step.partition)
    increments = np.diff(value_matrix[:, idx], axis=1)
    return increments @ np.asarray(f.step.values)
