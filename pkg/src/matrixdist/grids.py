"""Random grids {x_n} x {y_m}: Bernoulli, symmetric, locally finite, stationary."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.special import ndtr, ndtri

from . import _rng
from .errors import ParameterError, UnsupportedSpaceError
from .spaces_kernels import MeasureSpaceSpec

GRID_KINDS = ("bernoulli", "symmetric", "locally-finite", "stationary")


@dataclass(frozen=True, eq=False)
class GridSample:
    xs: np.ndarray
    ys: np.ndarray
    grid_kind: str
    seed: int
    space_x: MeasureSpaceSpec
    space_y: MeasureSpaceSpec
    replica: int = 0
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.xs)

    @property
    def m(self) -> int:
        return len(self.ys)

    def manifest(self) -> dict[str, Any]:
        return {
            "grid_kind": self.grid_kind,
            "seed": self.seed,
            "replica": self.replica,
            "n": self.n,
            "m": self.m,
            "space_x": self.space_x.space_id,
            "space_y": self.space_y.space_id,
            "params": dict(self.params),
        }


def _check_size(*sizes):
    for s in sizes:
        if int(s) != s or s < 1:
            raise ParameterError(f"grid sizes must be positive integers, got {s!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def sample_bernoulli_grid(space_x: MeasureSpaceSpec, space_y: MeasureSpaceSpec,
                          n: int, m: int, seed: int, replica: int = 0) -> GridSample:
    _check_size(n, m)
    xs = _frozen(space_x.sample(n, seed, "x", replica))
    ys = _frozen(space_y.sample(m, seed, "y", replica))
    return GridSample(xs, ys, "bernoulli", seed, space_x, space_y, replica)


def sample_symmetric_grid(space: MeasureSpaceSpec, n: int, seed: int,
                          replica: int = 0) -> GridSample:
    _check_size(n)
    xs = _frozen(space.sample(n, seed, "x", replica))
    return GridSample(xs, xs, "symmetric", seed, space, space, replica)


def _stratified(space: MeasureSpaceSpec, n: int, seed: int, label: str, replica: int,
                jitter: float | None) -> np.ndarray:
    if not space.has_quantile:
        raise UnsupportedSpaceError(
            f"{space.space_id} has no canonical one-dimensional stratification")
    if jitter is None:
        u = _rng.uniforms(seed, label, n, replica)
    else:
        if not 0.0 <= jitter < 1.0:
            raise ParameterError("jitter must lie in [0, 1)")
        u = np.full(n, float(jitter))
    return space.quantile((np.arange(n) + u) / n)


def sample_locally_finite_grid(space_x: MeasureSpaceSpec, space_y: MeasureSpaceSpec,
                               n: int, m: int, seed: int, replica: int = 0,
                               jitter: float | None = None) -> GridSample:
    """One point per equal-mass stratum in each variable.

    ``jitter`` pins the within-stratum offset (0.5 gives stratum midpoints);
    by default every offset is an independent uniform draw.
    """
    _check_size(n, m)
    xs = _frozen(_stratified(space_x, n, seed, "lf-x", replica, jitter))
    ys = _frozen(_stratified(space_y, m, seed, "lf-y", replica, jitter))
    params = {} if jitter is None else {"jitter": float(jitter)}
    return GridSample(xs, ys, "locally-finite", seed, space_x, space_y, replica, params)


def _ar1(n: int, rho: float, seed: int, label: str, replica: int) -> np.ndarray:
    # stationary N(0,1) AR(1) chain, returned on the probability scale
    eps = ndtri(_rng.uniforms(seed, label, n, replica))
    z = np.empty(n)
    z[0] = eps[0]
    scale = np.sqrt(1.0 - rho * rho)
    for t in range(1, n):
        z[t] = rho * z[t - 1] + scale * eps[t]
    return ndtr(z)


def sample_stationary_grid(space_x: MeasureSpaceSpec, space_y: MeasureSpaceSpec,
                           n: int, m: int, seed: int, rho: float = 0.5,
                           replica: int = 0) -> GridSample:
    """Grid built from stationary AR(1) sequences mapped through the space quantile.

    Each coordinate has the space's marginal law, but consecutive points are
    correlated with latent correlation ``rho``.
    """
    _check_size(n, m)
    if not -1.0 < rho < 1.0:
        raise ParameterError("rho must lie in (-1, 1)")
    for sp in (space_x, space_y):
        if not sp.has_quantile:
            raise UnsupportedSpaceError(f"{sp.space_id} has no quantile map")
    xs = _frozen(space_x.quantile(_ar1(n, rho, seed, "st-x", replica)))
    ys = _frozen(space_y.quantile(_ar1(m, rho, seed, "st-y", replica)))
    return GridSample(xs, ys, "stationary", seed, space_x, space_y, replica,
                      {"rho": float(rho)})


def sample_grid(kind: str, space_x: MeasureSpaceSpec, space_y: MeasureSpaceSpec,
                n: int, m: int, seed: int, replica: int = 0, **params) -> GridSample:
    """Dispatch on ``kind``; ``symmetric`` requires matching spaces and n == m."""
    if kind == "bernoulli":
        return sample_bernoulli_grid(space_x, space_y, n, m, seed, replica)
    if kind == "symmetric":
        if space_x != space_y:
            raise ParameterError("symmetric grids need identical spaces")
        if n != m:
            raise ParameterError("symmetric grids are square")
        return sample_symmetric_grid(space_x, n, seed, replica)
    if kind == "locally-finite":
        return sample_locally_finite_grid(space_x, space_y, n, m, seed, replica,
                                          jitter=params.get("jitter"))
    if kind == "stationary":
        return sample_stationary_grid(space_x, space_y, n, m, seed,
                                      rho=params.get("rho", 0.5), replica=replica)
    raise ParameterError(f"unknown grid kind {kind!r}")
