"""Standard probability spaces, built-in kernels, and the empirical purity test.

Points of the one-dimensional spaces are floats; points of ``sphere2-uniform``
are unit vectors in R^3 (arrays of shape ``(3,)``, or ``(n, 3)`` for samples).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Any

import numpy as np

from . import _rng
from .errors import DomainError, ParameterError, UnsupportedSpaceError

SPACE_IDS = (
    "unit-interval-lebesgue",
    "circle-uniform",
    "half-line-cauchy",
    "sphere2-uniform",
)
KERNEL_IDS = (
    "add-mod1",
    "interval-euclid",
    "circle-metric",
    "sphere-geodesic",
    "halfline-cauchy-euclid",
    "project-x",
    "custom-tabulated",
)
INTEGRABILITY = ("bounded", "L2", "L1-only")

_ATOL = 1e-9


@dataclass(frozen=True)
class MeasureSpaceSpec:
    space_id: str
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.space_id not in SPACE_IDS:
            raise ParameterError(f"unknown space {self.space_id!r}")
        if self.space_id == "circle-uniform" and self.circumference <= 0:
            raise ParameterError("circumference must be positive")

    def __hash__(self):
        return hash((self.space_id, tuple(sorted(self.params.items()))))

    @property
    def circumference(self) -> float:
        return float(self.params.get("circumference", 1.0))

    @property
    def dim(self) -> int:
        return 3 if self.space_id == "sphere2-uniform" else 1

    @property
    def has_quantile(self) -> bool:
        return self.space_id != "sphere2-uniform"

    def quantile(self, p: np.ndarray) -> np.ndarray:
        """Map probabilities in [0, 1) to points; the measure is the pushforward of Lebesgue."""
        p = np.asarray(p, dtype=float)
        if self.space_id == "unit-interval-lebesgue":
            return p.copy()
        if self.space_id == "circle-uniform":
            return p * self.circumference
        if self.space_id == "half-line-cauchy":
            # |C| for standard Cauchy C has CDF (2/pi) arctan(t)
            return np.tan(0.5 * np.pi * p)
        raise UnsupportedSpaceError(f"{self.space_id} has no one-dimensional quantile map")

    def cdf(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.space_id == "unit-interval-lebesgue":
            return np.clip(t, 0.0, 1.0)
        if self.space_id == "circle-uniform":
            return np.clip(t / self.circumference, 0.0, 1.0)
        if self.space_id == "half-line-cauchy":
            return np.where(t <= 0, 0.0, 2.0 / np.pi * np.arctan(np.maximum(t, 0.0)))
        raise UnsupportedSpaceError(f"{self.space_id} has no one-dimensional cdf")

    def sample(self, n: int, seed: int, label: str = "x", replica: int = 0) -> np.ndarray:
        """Draw ``n`` i.i.d. points from the stream keyed by (seed, replica, label)."""
        if n < 1:
            raise ParameterError("sample size must be at least 1")
        if self.space_id == "sphere2-uniform":
            u = _rng.uniforms(seed, label, (n, 2), replica)
            return sphere_points(u[:, 0], u[:, 1])
        return self.quantile(_rng.uniforms(seed, label, n, replica))

    def contains(self, points) -> bool:
        pts = np.asarray(points, dtype=float)
        if self.space_id == "sphere2-uniform":
            if pts.shape[-1:] != (3,):
                return False
            return bool(np.all(np.abs(np.linalg.norm(pts, axis=-1) - 1.0) <= 1e-9))
        if not np.all(np.isfinite(pts)):
            return False
        if self.space_id == "unit-interval-lebesgue":
            return bool(np.all((pts >= 0.0) & (pts <= 1.0)))
        if self.space_id == "circle-uniform":
            return bool(np.all((pts >= 0.0) & (pts < self.circumference)))
        return bool(np.all(pts >= 0.0))

    def to_dict(self) -> dict[str, Any]:
        return {"space_id": self.space_id, "params": dict(self.params)}


def sphere_points(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Uniform points on S^2 from two uniforms (Archimedes' hat-box map)."""
    z = 1.0 - 2.0 * np.asarray(u, dtype=float)
    phi = 2.0 * np.pi * np.asarray(v, dtype=float)
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def space(space_id: str, **params) -> MeasureSpaceSpec:
    return MeasureSpaceSpec(space_id, {k: float(v) for k, v in params.items()})


UNIT = MeasureSpaceSpec("unit-interval-lebesgue")


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A measurable function of two variables together with its metadata."""

    kernel_id: str
    space_x: MeasureSpaceSpec
    space_y: MeasureSpaceSpec
    symmetric: bool
    is_metric: bool
    integrability: str = "bounded"
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kernel_id not in KERNEL_IDS:
            raise ParameterError(f"unknown kernel {self.kernel_id!r}")
        if self.is_metric and not self.symmetric:
            raise ParameterError("a metric kernel must be symmetric")
        if self.integrability not in INTEGRABILITY:
            raise ParameterError(f"unknown integrability class {self.integrability!r}")
        if self.kernel_id == "custom-tabulated" and self.table is None:
            raise ParameterError("custom-tabulated kernels need a table")

    def pairwise(self, xs, ys) -> np.ndarray:
        """Evaluate on every pair (xs[i], ys[j]); no domain checks."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        kid = self.kernel_id
        if kid == "sphere-geodesic":
            return _geodesic(xs[:, None, :], ys[None, :, :])
        x = xs[:, None]
        y = ys[None, :]
        if kid == "add-mod1":
            return np.mod(x + y, 1.0)
        if kid in ("interval-euclid", "halfline-cauchy-euclid"):
            return np.abs(x - y)
        if kid == "circle-metric":
            return _arc(x, y, self.space_x.circumference)
        if kid == "project-x":
            return np.broadcast_to(x, (xs.shape[0], ys.shape[0])).copy()
        return _bilinear(self.table, x, y)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kernel_id": self.kernel_id,
            "space_x": self.space_x.to_dict(),
            "space_y": self.space_y.to_dict(),
            "symmetric": self.symmetric,
            "is_metric": self.is_metric,
            "integrability": self.integrability,
        }


def _arc(x, y, circumference):
    d = np.abs(x - y)
    return np.minimum(d, circumference - d)


def _geodesic(a, b):
    # atan2 of |a x b| and a.b is exact at a == b and symmetric in its arguments
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    dot = np.sum(a * b, axis=-1)
    return np.arctan2(cross, dot)


def _bilinear(table: np.ndarray, x, y):
    nx, ny = table.shape
    x, y = np.broadcast_arrays(x, y)
    gx = np.clip(x, 0.0, 1.0) * (nx - 1)
    gy = np.clip(y, 0.0, 1.0) * (ny - 1)
    i = np.clip(np.floor(gx).astype(int), 0, max(nx - 2, 0))
    j = np.clip(np.floor(gy).astype(int), 0, max(ny - 2, 0))
    tx = gx - i if nx > 1 else np.zeros_like(gx)
    ty = gy - j if ny > 1 else np.zeros_like(gy)
    i1 = np.minimum(i + 1, nx - 1)
    j1 = np.minimum(j + 1, ny - 1)
    return (
        table[i, j] * (1 - tx) * (1 - ty)
        + table[i1, j] * tx * (1 - ty)
        + table[i, j1] * (1 - tx) * ty
        + table[i1, j1] * tx * ty
    )


def make_kernel(kernel_id: str, *, circumference: float = 1.0, table=None,
                metric: bool = False) -> KernelSpec:
    """Build one of the catalog kernels by its stable identifier.

    ``table`` (an array or a path to a CSV file) is only used for
    ``custom-tabulated``; its entries are the kernel values on the uniform node
    grid ``i/(N-1)`` of the unit square. ``metric`` marks a tabulated kernel as
    a metric, which requires a symmetric table with zero diagonal.
    """
    unit = UNIT
    if kernel_id == "add-mod1":
        return KernelSpec(kernel_id, unit, unit, symmetric=True, is_metric=False)
    if kernel_id == "interval-euclid":
        return KernelSpec(kernel_id, unit, unit, symmetric=True, is_metric=True)
    if kernel_id == "circle-metric":
        circ = space("circle-uniform", circumference=circumference)
        return KernelSpec(kernel_id, circ, circ, symmetric=True, is_metric=True)
    if kernel_id == "sphere-geodesic":
        sph = MeasureSpaceSpec("sphere2-uniform")
        return KernelSpec(kernel_id, sph, sph, symmetric=True, is_metric=True)
    if kernel_id == "halfline-cauchy-euclid":
        half = MeasureSpaceSpec("half-line-cauchy")
        return KernelSpec(kernel_id, half, half, symmetric=True, is_metric=True,
                          integrability="L1-only")
    if kernel_id == "project-x":
        return KernelSpec(kernel_id, unit, unit, symmetric=False, is_metric=False)
    if kernel_id == "custom-tabulated":
        if table is None:
            raise ParameterError("custom-tabulated kernels need a table")
        if isinstance(table, (str, Path)):
            try:
                table = np.loadtxt(table, delimiter=",", ndmin=2)
            except OSError as exc:
                raise ParameterError(f"cannot read table: {exc}") from None
        table = np.array(table, dtype=float, ndmin=2)
        if not np.all(np.isfinite(table)):
            raise ParameterError("table entries must be finite")
        sym = table.shape[0] == table.shape[1] and np.array_equal(table, table.T)
        if metric and not (sym and np.all(np.diag(table) == 0) and np.all(table >= 0)):
            raise ParameterError("a metric table must be symmetric, nonnegative, with zero diagonal")
        return KernelSpec(kernel_id, unit, unit, symmetric=sym, is_metric=metric,
                          table=table)
    raise ParameterError(f"unknown kernel {kernel_id!r}")


def kernel_eval(kernel: KernelSpec, x, y) -> float:
    """Evaluate the kernel at one pair of points, checking both belong to its spaces."""
    if not kernel.space_x.contains(x):
        raise DomainError(f"{x!r} is not a point of {kernel.space_x.space_id}")
    if not kernel.space_y.contains(y):
        raise DomainError(f"{y!r} is not a point of {kernel.space_y.space_id}")
    xs = np.asarray(x, dtype=float)[None, ...]
    ys = np.asarray(y, dtype=float)[None, ...]
    return float(kernel.pairwise(xs, ys)[0, 0])


@dataclass
class PurityReport:
    min_row_separation: float
    min_col_separation: float
    n_probe: int
    m_probe: int
    verdict: str
    threshold: float

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


def _probe_points(sp: MeasureSpaceSpec, n: int) -> np.ndarray:
    # well-separated probes: stratum midpoints, or a Fibonacci lattice on the sphere
    if sp.has_quantile:
        return sp.quantile((np.arange(n) + 0.5) / n)
    golden = (1 + 5 ** 0.5) / 2
    i = np.arange(n)
    return sphere_points((i + 0.5) / n, np.mod(i / golden, 1.0))


def _min_l1_separation(values: np.ndarray) -> float:
    # values[a, :] is the restriction at probe a, sampled at the evaluation points
    best = np.inf
    for a, b in combinations(range(values.shape[0]), 2):
        best = min(best, float(np.mean(np.abs(values[a] - values[b]))))
    return best


def purity_check(kernel: KernelSpec, n_probe: int = 32, m_probe: int = 512,
                 threshold: float = 0.01, seed: int = 0) -> PurityReport:
    """Look for coinciding restrictions f(x, .) or f(., y) among probe values.

    Estimated L1 separations below ``threshold`` give ``not-pure``, separations
    of at least ``2 * threshold`` in both variables give ``pure``, and anything
    in between is ``inconclusive``.
    """
    if n_probe < 2 or m_probe < 1:
        raise ParameterError("need n_probe >= 2 and m_probe >= 1")
    if not threshold > 0:
        raise ParameterError("threshold must be positive")
    px = _probe_points(kernel.space_x, n_probe)
    py = _probe_points(kernel.space_y, n_probe)
    ex = kernel.space_x.sample(m_probe, seed, "purity-x")
    ey = kernel.space_y.sample(m_probe, seed, "purity-y")
    rows = _min_l1_separation(kernel.pairwise(px, ey))
    cols = _min_l1_separation(kernel.pairwise(ex, py).T)
    sep = min(rows, cols)
    if sep < threshold:
        verdict = "not-pure"
    elif sep >= 2 * threshold:
        verdict = "pure"
    else:
        verdict = "inconclusive"
    return PurityReport(rows, cols, n_probe, m_probe, verdict, threshold)
