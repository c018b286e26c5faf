"""JSON run configuration: parsing, validation, and the run manifest.

Schema (all sections optional, defaults shown):

    {
      "interval": [0.0, 1.0],
      "lambda":   {"kind": "zero"},
      "rho":      {"kind": "identity"},
      "integrand": {"kind": "indicator", "lo": a, "hi": midpoint},
      "mc":       {"paths": 2000, "seed": 12345},
      "grid":     {"points": 1025, "scale": "t"},
      "series":   {"N": 256, "family": "cosine"},
      "quadrature": {"resolution": 16384},
      "debug":    {"reuse_streams": false}
    }

Function specs: lambda kinds zero | linear(slope, intercept) |
piecewise/table(knots, values) | cantor(depth); rho kinds identity |
power(exponent) | piecewise/table(knots, values); integrand kinds
step(partition, values) | indicator(lo, hi) | poly(coeffs) | basis(index).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .funcspace import BasisFamily, Integrand, StepFunction
from .process import DEFAULT_GRID_POINTS, DEFAULT_TRUNCATION
from .stieltjes import DEFAULT_RESOLUTION, Interval, MeanFunction, VarianceFunction

TOOL_VERSION = "0.1.0"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _require(cond: bool, field: str, message: str):
    if not cond:
        raise ConfigError(f"{field}: {message}")


def mean_function_from_spec(spec: dict, interval) -> MeanFunction:
    kind = spec.get("kind", "zero")
    try:
        if kind == "zero":
            return MeanFunction.zero(interval)
        if kind == "linear":
            return MeanFunction.linear(interval, spec.get("slope", 1.0),
                                       spec.get("intercept", 0.0))
        if kind in ("piecewise", "table"):
            _require("knots" in spec and "values" in spec, "lambda",
                     "piecewise mean function needs knots and values")
            ctor = MeanFunction.piecewise if kind == "piecewise" else MeanFunction.table
            return ctor(spec["knots"], spec["values"])
        if kind == "cantor":
            return MeanFunction.cantor(interval, int(spec.get("depth", 64)))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"lambda: {exc}") from exc
    raise ConfigError(f"lambda: unknown kind {kind!r}")


def variance_function_from_spec(spec: dict, interval) -> VarianceFunction:
    kind = spec.get("kind", "identity")
    try:
        if kind == "identity":
            return VarianceFunction.identity(interval)
        if kind == "power":
            return VarianceFunction.power(interval, spec.get("exponent", 2.0))
        if kind in ("piecewise", "table"):
            _require("knots" in spec and "values" in spec, "rho",
                     "piecewise variance function needs knots and values")
            ctor = (VarianceFunction.piecewise if kind == "piecewise"
                    else VarianceFunction.table)
            return ctor(spec["knots"], spec["values"])
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"rho: {exc}") from exc
    raise ConfigError(f"rho: unknown kind {kind!r}")


def integrand_from_spec(spec: dict, interval, basis: BasisFamily) -> Integrand:
    kind = spec.get("kind", "indicator")
    iv = Interval.coerce(interval)
    try:
        if kind == "step":
            _require("partition" in spec and "values" in spec, "integrand",
                     "step integrand needs partition and values")
            return Integrand.from_step(StepFunction(tuple(spec["partition"]),
                                                    tuple(spec["values"])))
        if kind == "indicator":
            lo = float(spec.get("lo", iv.a))
            hi = float(spec.get("hi", 0.5 * (iv.a + iv.b)))
            return Integrand.from_step(StepFunction.indicator(lo, hi, iv))
        if kind == "poly":
            coeffs = [float(c) for c in spec.get("coeffs", [0.0, 1.0])]
            poly = np.polynomial.Polynomial(coeffs)
            crit = [iv.a, iv.b] + [float(r.real) for r in poly.deriv().roots()
                                   if abs(r.imag) < 1e-12 and iv.a < r.real < iv.b]
            fn = lambda t: poly(np.asarray(t, dtype=float))
            return Integrand.from_function(fn, bv_breaks=tuple(sorted(set(crit))))
        if kind == "basis":
            return basis.member(int(spec.get("index", 0)))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"integrand: {exc}") from exc
    raise ConfigError(f"integrand: unknown kind {kind!r}")


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run configuration with defaults applied."""

    interval: Interval
    lam: MeanFunction
    rho: VarianceFunction
    integrand: Integrand
    paths: int
    seed: int
    grid_points: int
    grid_scale: str
    truncation: int
    family: str
    resolution: int
    reuse_streams: bool
    normalized: dict

    @property
    def basis(self) -> BasisFamily:
        return BasisFamily(self.rho, self.family)

    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.normalized).encode()).hexdigest()

    def manifest(self) -> "RunManifest":
        return RunManifest(
            config_hash=self.config_hash(),
            seed=self.seed,
            paths=self.paths,
            grid_points=self.grid_points,
            truncation=self.truncation,
            resolution=self.resolution,
            version=TOOL_VERSION,
        )


def parse_config(raw: dict, overrides: dict | None = None) -> RunConfig:
    """Validate a config dict, apply defaults and CLI/env overrides."""
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    known = {"interval", "lambda", "rho", "integrand", "mc", "grid", "series",
             "quadrature", "debug"}
    for key in raw:
        _require(key in known, key, "unknown configuration section")
    overrides = overrides or {}

    interval_spec = raw.get("interval", [0.0, 1.0])
    _require(isinstance(interval_spec, (list, tuple)) and len(interval_spec) == 2,
             "interval", "must be a pair [a, b]")
    try:
        interval = Interval(float(interval_spec[0]), float(interval_spec[1]))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"interval: {exc}") from exc

    lam = mean_function_from_spec(raw.get("lambda", {}), interval)
    rho = variance_function_from_spec(raw.get("rho", {}), interval)

    mc = raw.get("mc", {})
    paths = int(overrides.get("paths", mc.get("paths", 2000)))
    _require(paths >= 2, "mc.paths", "must be at least 2")
    seed = int(overrides.get("seed", mc.get("seed", 12345)))
    _require(0 <= seed < 2**64, "mc.seed", "must fit in 64 bits")

    grid = raw.get("grid", {})
    grid_points = int(overrides.get("grid", grid.get("points", DEFAULT_GRID_POINTS)))
    _require(grid_points >= 2, "grid.points", "must be at least 2")
    grid_scale = grid.get("scale", "t")
    _require(grid_scale in ("t", "rho"), "grid.scale", "must be 't' or 'rho'")

    series = raw.get("series", {})
    truncation = int(overrides.get("truncation", series.get("N", DEFAULT_TRUNCATION)))
    _require(truncation >= 1, "series.N", "truncation must be >= 1")
    family = series.get("family", "cosine")
    _require(family in ("cosine", "haar"), "series.family",
             "must be 'cosine' or 'haar'")

    resolution = int(raw.get("quadrature", {}).get("resolution", DEFAULT_RESOLUTION))
    _require(resolution >= 1, "quadrature.resolution", "must be >= 1")

    reuse = bool(raw.get("debug", {}).get("reuse_streams", False))

    basis = BasisFamily(rho, family)
    integrand = integrand_from_spec(raw.get("integrand", {}), interval, basis)

    normalized = {
        "interval": [interval.a, interval.b],
        "lambda": raw.get("lambda", {"kind": "zero"}),
        "rho": raw.get("rho", {"kind": "identity"}),
        "integrand": raw.get("integrand", {"kind": "indicator"}),
        "mc": {"paths": paths, "seed": seed},
        "grid": {"points": grid_points, "scale": grid_scale},
        "series": {"N": truncation, "family": family},
        "quadrature": {"resolution": resolution},
        "debug": {"reuse_streams": reuse},
    }
    return RunConfig(
        interval=interval, lam=lam, rho=rho, integrand=integrand,
        paths=paths, seed=seed, grid_points=grid_points, grid_scale=grid_scale,
        truncation=truncation, family=family, resolution=resolution,
        reuse_streams=reuse, normalized=normalized,
    )


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a run byte for byte."""

    config_hash: str
    seed: int
    paths: int
    grid_points: int
    truncation: int
    resolution: int
    version: str

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "paths": self.paths,
            "grid_points": self.grid_points,
            "truncation": self.truncation,
            "resolution": self.resolution,
            "version": self.version,
        }

    def hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()
