"""Sample matrices, empirical matrix distributions, and tests on them.

A matrix distribution is the law of ``||f(x_n, y_m)||`` over random grids.
Here it is represented by ``R`` independent replicas of a ``k x k`` fragment;
comparisons use permutation-invariant features of leading minors.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import _rng
from .energy import permutation_test
from .errors import DomainError, ParameterError
from .grids import GridSample, sample_grid
from .spaces_kernels import KernelSpec

ALDOUS_F3: dict[str, Callable] = {
    "lambda": lambda xi, eta, lam: lam,
    "add-mod1": lambda xi, eta, lam: np.mod(xi + eta, 1.0),
    "xi": lambda xi, eta, lam: xi,
}


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    values: np.ndarray
    kernel_id: str
    grid_kind: str
    seed: int
    symmetric: bool
    replica: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def manifest(self) -> dict[str, Any]:
        n, m = self.values.shape
        return {
            "kernel_id": self.kernel_id,
            "grid_kind": self.grid_kind,
            "seed": self.seed,
            "n": n,
            "m": m,
            "symmetric": self.symmetric,
        }


@dataclass(frozen=True, eq=False)
class EmpiricalMatrixDistribution:
    matrices: tuple[SampleMatrix, ...]
    kernel_id: str
    grid_kind: str
    base_seed: int

    def __post_init__(self):
        if not self.matrices:
            raise ParameterError("a matrix distribution needs at least one replica")
        k = self.matrices[0].values.shape[0]
        if any(mat.values.shape != (k, k) for mat in self.matrices):
            raise ParameterError("all replicas must be square of the same order")

    @property
    def order(self) -> int:
        return self.matrices[0].values.shape[0]

    @property
    def replicas(self) -> int:
        return len(self.matrices)

    def stack(self) -> np.ndarray:
        return np.stack([mat.values for mat in self.matrices])

    def manifest(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "replicas": self.replicas,
            "base_seed": self.base_seed,
            "kernel_id": self.kernel_id,
            "grid_kind": self.grid_kind,
        }


@dataclass
class ComparisonReport:
    statistic: float
    p_value: float
    decision: str
    alpha: float
    permutations: int
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class InvarianceReport:
    group: str
    statistic: float
    p_value: float
    decision: str
    alpha: float
    permutations: int
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


def evaluate_matrix(kernel: KernelSpec, grid: GridSample) -> SampleMatrix:
    if grid.space_x != kernel.space_x or grid.space_y != kernel.space_y:
        raise DomainError(
            f"grid spaces ({grid.space_x.space_id}, {grid.space_y.space_id}) do not match "
            f"kernel {kernel.kernel_id} ({kernel.space_x.space_id}, {kernel.space_y.space_id})")
    values = kernel.pairwise(grid.xs, grid.ys)
    sym = grid.grid_kind == "symmetric" and kernel.symmetric
    if sym:
        # enforce exact symmetry and the metric zero diagonal against rounding
        values = np.triu(values) + np.triu(values, 1).T
        if kernel.is_metric:
            np.fill_diagonal(values, 0.0)
    values.setflags(write=False)
    return SampleMatrix(values, kernel.kernel_id, grid.grid_kind, grid.seed, sym, grid.replica)


def _map(fn, items, threads):
    if threads is None or threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def sample_matrix_distribution(kernel: KernelSpec, grid_kind: str, k: int, R: int,
                               seed: int, threads: int | None = None,
                               **grid_params) -> EmpiricalMatrixDistribution:
    """R independent k x k fragments; replica r draws from stream (seed, r)."""
    if k < 1 or R < 1:
        raise ParameterError("need k >= 1 and R >= 1")

    def one(r):
        grid = sample_grid(grid_kind, kernel.space_x, kernel.space_y, k, k, seed,
                           replica=r, **grid_params)
        return evaluate_matrix(kernel, grid)

    mats = _map(one, range(R), threads)
    return EmpiricalMatrixDistribution(tuple(mats), kernel.kernel_id, grid_kind, seed)


def minor_features(values: np.ndarray, q: int) -> np.ndarray:
    """Sorted entries of the leading q x q minor, then its sorted row sums."""
    minor = np.asarray(values, dtype=float)[:q, :q]
    entries = np.sort(minor, axis=None)
    # sorting within rows first makes each sum independent of column order
    rowsums = np.sort(np.sort(minor, axis=1).sum(axis=1))
    return np.concatenate([entries, rowsums])


def minor_statistics(emp: EmpiricalMatrixDistribution, q: int) -> np.ndarray:
    """Feature vectors of shape ``(R, q*q + q)``."""
    if q < 1 or q > emp.order:
        raise ParameterError(f"minor order q={q} must lie in [1, {emp.order}]")
    return np.stack([minor_features(mat.values, q) for mat in emp.matrices])


def _decide(p_value: float, alpha: float) -> str:
    return "reject" if p_value <= alpha else "accept"


def _features_test(fa, fb, alpha, B, seed):
    if B < 99:
        raise ParameterError("at least 99 permutations are required")
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must lie in (0, 1)")
    if np.ptp(fa, axis=0).max() == 0 and np.ptp(fb, axis=0).max() == 0:
        # both clouds are single points
        if np.array_equal(fa[0], fb[0]):
            return 0.0, 1.0
    return permutation_test(fa, fb, B, _rng.stream(seed, "energy-permutations"))


def compare_distributions(emp_a: EmpiricalMatrixDistribution,
                          emp_b: EmpiricalMatrixDistribution, q: int,
                          alpha: float = 0.05, B: int = 999,
                          seed: int = 0) -> ComparisonReport:
    """Energy-distance test of equality in law for the q x q minor features."""
    if emp_a.order < q or emp_b.order < q:
        raise ParameterError("q exceeds the order of a distribution")
    fa = minor_statistics(emp_a, q)
    fb = minor_statistics(emp_b, q)
    stat, p = _features_test(fa, fb, alpha, B, seed)
    params = {"q": q, "seed": seed, "a": emp_a.manifest(), "b": emp_b.manifest()}
    return ComparisonReport(stat, p, _decide(p, alpha), alpha, B, params)


def permute_replicas(emp: EmpiricalMatrixDistribution, group: str,
                     seed: int) -> EmpiricalMatrixDistribution:
    """Apply an independent random permutation to every replica."""
    if group not in ("full", "diag"):
        raise ParameterError(f"unknown group {group!r}")
    if group == "diag" and not all(
            np.array_equal(mat.values, mat.values.T) for mat in emp.matrices):
        raise ParameterError("the diagonal group needs symmetric matrices")
    k = emp.order
    out = []
    for r, mat in enumerate(emp.matrices):
        rng = _rng.stream(seed, "invariance", r)
        rows = rng.permutation(k)
        cols = rows if group == "diag" else rng.permutation(k)
        vals = mat.values[np.ix_(rows, cols)]
        vals.setflags(write=False)
        out.append(SampleMatrix(vals, mat.kernel_id, mat.grid_kind, mat.seed,
                                mat.symmetric, mat.replica))
    return EmpiricalMatrixDistribution(tuple(out), emp.kernel_id, emp.grid_kind, emp.base_seed)


def invariance_check(emp: EmpiricalMatrixDistribution, group: str = "full",
                     alpha: float = 0.05, B: int = 999, seed: int = 0,
                     q: int | None = None) -> InvarianceReport:
    """Compare a distribution with its randomly row/column-permuted copy.

    ``q`` defaults to half the order; at ``q == order`` the features are
    permutation invariant and the statistic is exactly zero.
    """
    if q is None:
        q = max(1, emp.order // 2)
    permuted = permute_replicas(emp, group, seed)
    rep = compare_distributions(emp, permuted, q, alpha, B, seed)
    params = {"q": q, "seed": seed, "distribution": emp.manifest()}
    return InvarianceReport(group, rep.statistic, rep.p_value, rep.decision, alpha, B, params)


def aldous_sample(f3: Callable | str, n: int, m: int, seed: int,
                  symmetric: bool = False, replica: int = 0) -> SampleMatrix:
    """Matrix ``f3(xi_i, eta_j, lambda_ij)`` with independent uniform inputs.

    In the symmetric case ``eta`` is ``xi`` and ``lambda`` is a symmetric array
    whose diagonal is drawn once per index.
    """
    name = f3 if isinstance(f3, str) else getattr(f3, "__name__", "custom")
    if isinstance(f3, str):
        if f3 not in ALDOUS_F3:
            raise ParameterError(f"unknown three-variable kernel {f3!r}")
        f3 = ALDOUS_F3[f3]
    if n < 1 or m < 1:
        raise ParameterError("need n, m >= 1")
    if symmetric and n != m:
        raise ParameterError("symmetric Aldous arrays are square")
    xi = _rng.uniforms(seed, "aldous-xi", n, replica)
    if symmetric:
        eta = xi
        lam = _rng.uniforms(seed, "aldous-lambda", (n, n), replica)
        lam = np.triu(lam) + np.triu(lam, 1).T
    else:
        eta = _rng.uniforms(seed, "aldous-eta", m, replica)
        lam = _rng.uniforms(seed, "aldous-lambda", (n, m), replica)
    values = np.asarray(f3(xi[:, None], eta[None, :], lam), dtype=float)
    values = np.array(np.broadcast_to(values, (n, m)))
    values.setflags(write=False)
    return SampleMatrix(values, f"aldous:{name}", "aldous", seed, symmetric, replica)


def aldous_distribution(f3: Callable | str, k: int, R: int, seed: int,
                        symmetric: bool = False,
                        threads: int | None = None) -> EmpiricalMatrixDistribution:
    mats = _map(lambda r: aldous_sample(f3, k, k, seed, symmetric, r), range(R), threads)
    return EmpiricalMatrixDistribution(tuple(mats), mats[0].kernel_id, "aldous", seed)


def random_graph_matrix(p: float, n: int, seed: int, replica: int = 0) -> SampleMatrix:
    """Symmetric {1, 2} distance matrix of a random graph with edge probability p."""
    if not 0.0 < p < 1.0:
        raise ParameterError("edge probability must lie in (0, 1)")
    if n < 1:
        raise ParameterError("need n >= 1")
    u = _rng.uniforms(seed, "graph", (n, n), replica)
    upper = np.triu(np.where(u < p, 1.0, 2.0), 1)
    values = upper + upper.T
    values.setflags(write=False)
    return SampleMatrix(values, "random-graph", "symmetric", seed, True, replica)


def compare_grid_types(kernel: KernelSpec, kinds: tuple[str, str], k: int, R: int,
                       q: int, alpha: float = 0.05, B: int = 999, seed: int = 0,
                       threads: int | None = None,
                       grid_params: tuple[dict, dict] | None = None) -> ComparisonReport:
    """Exploratory: are matrix fragments from two grid constructions equal in law?"""
    if len(kinds) != 2:
        raise ParameterError("exactly two grid kinds are compared")
    grid_params = grid_params or ({}, {})
    seed_a, seed_b, seed_test = _rng.derive_seeds(seed, 3)
    emp_a = sample_matrix_distribution(kernel, kinds[0], k, R, seed_a, threads, **grid_params[0])
    emp_b = sample_matrix_distribution(kernel, kinds[1], k, R, seed_b, threads, **grid_params[1])
    rep = compare_distributions(emp_a, emp_b, q, alpha, B, seed_test)
    rep.params.update({"kinds": list(kinds), "grid_params": [dict(g) for g in grid_params],
                       "k": k, "R": R, "seed": seed, "kernel": kernel.to_dict()})
    return rep


def triangle_violations(values, rtol: float = 4 * np.finfo(float).eps) -> int:
    """Count ordered triples (i, j, k) with ``d[i,k] > d[i,j] + d[j,k]``.

    ``rtol`` absorbs the rounding of the three stored distances; with
    coordinates far from zero a true metric can exceed the sum by an ulp.
    """
    d = np.asarray(values.values if isinstance(values, SampleMatrix) else values, dtype=float)
    count = 0
    for j in range(d.shape[0]):
        bound = (d[:, j][:, None] + d[j, :][None, :]) * (1.0 + rtol)
        count += int(np.count_nonzero(d > bound))
    return count
