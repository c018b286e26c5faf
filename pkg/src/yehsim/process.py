"""Construction and sampling of Gaussian additive processes.

Two samplers: exact increment sampling on a grid (no truncation error at the
grid points) and truncated random-series sampling built on an orthonormal
basis of the rho-weighted space.  Path generation is reproducible per stream
index regardless of batch layout or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .errors import BadGridError, GridMismatchError, NegativeVarianceError
from .funcspace import BasisFamily
from .stieltjes import Interval, MeanFunction, VarianceFunction, rho_inverse
from .streams import GaussianStream, normal_matrix

#: Default grid resolution: 2**10 + 1 points.
DEFAULT_GRID_POINTS = 1025

#: Default series truncation.
DEFAULT_TRUNCATION = 256


@dataclass(frozen=True)
class YehSpec:
    """The pair (lambda, rho) determining the process on a shared interval."""

    lam: MeanFunction
    rho: VarianceFunction

    def __post_init__(self):
        if self.lam.interval != self.rho.interval:
            raise ValueError("mean and variance functions must share the interval")

    @property
    def interval(self) -> Interval:
        return self.lam.interval

    @classmethod
    def brownian(cls, interval=(0.0, 1.0)) -> "YehSpec":
        return cls(MeanFunction.zero(interval), VarianceFunction.identity(interval))


@dataclass(frozen=True)
class SamplePath:
    """One realization on a grid, with provenance and stream identity."""

    grid: np.ndarray
    values: np.ndarray
    provenance: str  # "increments" or "series"
    seed: int | None = None
    stream_index: int | None = None
    truncation: int | None = None
    truncation_defect: float | None = None
    centered: bool = False

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if not np.all(np.isfinite(values)):
            raise ValueError("path values must be finite")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def index_of(self, t: float) -> int:
        i = int(np.searchsorted(self.grid, t))
        for j in (i - 1, i, i + 1):
            if 0 <= j < len(self.grid) and abs(self.grid[j] - t) <= 1e-12:
                return j
        raise GridMismatchError(f"time {t} is not a grid point")

    def value_at(self, t: float) -> float:
        return float(self.values[self.index_of(t)])


def path_to_csv(path: SamplePath) -> str:
    """One path as CSV text with columns t, value (17 significant digits)."""
    lines = ["t,value"]
    for t, v in zip(path.grid, path.values):
        lines.append(f"{format(t, '.17g')},{format(v, '.17g')}")
    return "\n".join(lines) + "\n"


def make_grid(interval, points: int = DEFAULT_GRID_POINTS, scale: str = "t",
              rho: VarianceFunction | None = None) -> np.ndarray:
    """Sampling grid over [a, b]: uniform in t, or uniform in rho mass.

    The rho scale equalizes increment variances across cells.
    """
    iv = Interval.coerce(interval)
    if points < 2:
        raise BadGridError("grid needs at least 2 points")
    if scale == "t":
        return np.linspace(iv.a, iv.b, points)
    if scale == "rho":
        if rho is None:
            raise BadGridError("rho-scale grid requires the variance function")
        masses = np.linspace(0.0, rho.total_mass, points)
        grid = np.array([rho_inverse(rho, v) for v in masses])
        grid[0], grid[-1] = iv.a, iv.b
        return grid
    raise BadGridError(f"unknown grid scale {scale!r}")


def _validate_grid(grid: np.ndarray, interval: Interval) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise BadGridError("grid must be a 1-d array with at least 2 points")
    if np.any(np.diff(grid) <= 0):
        raise BadGridError("grid must be strictly increasing")
    if grid[0] != interval.a or grid[-1] != interval.b:
        raise BadGridError(
            f"grid must span [{interval.a}, {interval.b}], "
            f"got [{grid[0]}, {grid[-1]}]"
        )
    return grid


def _increment_scales(spec: YehSpec, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dlam = np.diff(spec.lam(grid))
    drho = np.diff(spec.rho(grid))
    if np.any(drho <= 0):
        raise NegativeVarianceError(
            "variance increment not positive; rho must be strictly increasing"
        )
    return dlam, np.sqrt(drho)


def sample_increments(spec: YehSpec, grid, stream: GaussianStream) -> SamplePath:
    """Exact-in-distribution sampling at the grid points.

    X(a) = lambda(a); each increment is an independent draw from
    Normal(dlambda, drho) over its cell.
    """
    grid = _validate_grid(grid, spec.interval)
    dlam, sigma = _increment_scales(spec, grid)
    z = stream.normals(len(grid) - 1)
    start = spec.lam(spec.interval.a)
    values = np.concatenate([[start], start + np.cumsum(dlam + sigma * z)])
    return SamplePath(grid, values, "increments",
                      seed=stream.seed, stream_index=stream.index)


def sample_series(spec: YehSpec, basis: BasisFamily, truncation: int, grid,
                  stream: GaussianStream) -> SamplePath:
    """Truncated random-series sampling.

    Values are lambda(t) + sum over n < truncation of (running rho-integral of
    phi_n up to t) * xi_n, with xi_n consumed from the stream in index order.
    The reported truncation defect is the largest variance shortfall
    rho(t) - sum of squared running integrals over the grid.
    """
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    if basis.rho != spec.rho:
        raise ValueError("basis must be built on the spec's variance function")
    grid = _validate_grid(grid, spec.interval)
    xi = stream.normals(truncation)
    amatrix = basis.antiderivative_matrix(truncation, grid)
    values = spec.lam(grid) + xi @ amatrix
    defect = float(np.max(spec.rho(grid) - np.sum(amatrix**2, axis=0)))
    return SamplePath(grid, values, "series",
                      seed=stream.seed, stream_index=stream.index,
                      truncation=truncation, truncation_defect=max(0.0, defect))


def center(path: SamplePath, lam: MeanFunction) -> SamplePath:
    """Subtract the drift pointwise; centering with a zero drift is the identity."""
    return replace(path, values=path.values - lam(path.grid), centered=True)


@dataclass(frozen=True)
class EmpiricalMoments:
    """Sample first and second moments at a pair of grid times."""

    mean_s: float
    mean_t: float
    second_moment_st: float
    se_mean_s: float
    se_mean_t: float
    se_second_moment: float
    count: int


def empirical_moments(paths: list[SamplePath], s: float, t: float) -> EmpiricalMoments:
    """Sample estimates of E[X(s)], E[X(t)], E[X(s)X(t)] with standard errors."""
    if len(paths) < 2:
        raise ValueError("need at least 2 paths")
    grid = paths[0].grid
    for p in paths[1:]:
        if p.grid.shape != grid.shape or not np.array_equal(p.grid, grid):
            raise GridMismatchError("paths do not share a common grid")
    i, j = paths[0].index_of(s), paths[0].index_of(t)
    xs = np.array([p.values[i] for p in paths])
    xt = np.array([p.values[j] for p in paths])
    prod = xs * xt
    m = len(paths)
    return EmpiricalMoments(
        mean_s=float(xs.mean()),
        mean_t=float(xt.mean()),
        second_moment_st=float(prod.mean()),
        se_mean_s=float(xs.std(ddof=1) / np.sqrt(m)),
        se_mean_t=float(xt.std(ddof=1) / np.sqrt(m)),
        se_second_moment=float(prod.std(ddof=1) / np.sqrt(m)),
        count=m,
    )


def increment_value_matrix(spec: YehSpec, grid, seed: int, count: int,
                           first_index: int = 0) -> np.ndarray:
    """Batched increment sampling: row k is the value array of stream index
    first_index + k (identical to sample_increments with that stream)."""
    grid = _validate_grid(grid, spec.interval)
    dlam, sigma = _increment_scales(spec, grid)
    z = normal_matrix(seed, count, len(grid) - 1, first_index)
    start = spec.lam(spec.interval.a)
    values = np.empty((count, len(grid)))
    values[:, 0] = start
    np.cumsum(dlam + sigma * z, axis=1, out=values[:, 1:])
    values[:, 1:] += start
    return values


def iter_increment_paths(spec: YehSpec, grid, seed: int, count: int,
                         first_index: int = 0,
                         chunk: int = 8192) -> Iterator[tuple[int, np.ndarray]]:
    """Stream (start_index, value_matrix) chunks to bound memory."""
    done = 0
    while done < count:
        n = min(chunk, count - done)
        yield done, increment_value_matrix(spec, grid, seed, n, first_index + done)
        done += n


def series_value_matrix(spec: YehSpec, basis: BasisFamily, truncation: int, grid,
                        seed: int, count: int, first_index: int = 0) -> np.ndarray:
    """Batched series sampling: row k matches sample_series at stream index
    first_index + k, bit for bit."""
    grid = _validate_grid(grid, spec.interval)
    xi = normal_matrix(seed, count, truncation, first_index)
    amatrix = basis.antiderivative_matrix(truncation, grid)
    drift = spec.lam(grid)
    out = np.empty((count, len(grid)))
    for k in range(count):  # row-wise products: same rounding as sample_series
        out[k] = drift + xi[k] @ amatrix
    return out
