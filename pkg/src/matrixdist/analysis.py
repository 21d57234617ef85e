"""mm-entropy of sampled metric triples and spectra of distance-matrix fragments."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DegenerateSpectrumError, ParameterError
from .grids import sample_symmetric_grid
from .matdist import SampleMatrix, evaluate_matrix, random_graph_matrix
from .spaces_kernels import KernelSpec

NORMALIZATIONS = ("none", "by-n", "by-sqrt-n")


def _square_values(M) -> np.ndarray:
    v = np.asarray(M.values if isinstance(M, SampleMatrix) else M, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ParameterError("need a square matrix")
    return v


def _require_symmetric(v: np.ndarray):
    if not np.array_equal(v, v.T):
        raise ParameterError("matrix is not symmetric")


def mm_entropy(M, epsilon: float) -> int:
    """Greedy estimate of the number of epsilon-balls covering mass > 1 - epsilon.

    Every point carries mass 1/n. The center whose closed ball covers the most
    uncovered points is taken first; among equal gains the ball whose new points
    are closest to its center wins, so the count does not depend on labels
    unless both keys tie exactly.
    """
    v = _square_values(M)
    _require_symmetric(v)
    if np.any(np.diag(v) != 0):
        raise ParameterError("distance matrix must have zero diagonal")
    if not 0.0 < epsilon < 1.0:
        raise ParameterError("epsilon must lie in (0, 1)")
    n = v.shape[0]
    balls = (v <= epsilon).astype(np.float64)
    spread = v * balls
    uncovered = np.ones(n)
    need = (1.0 - epsilon) * n
    covered = 0
    centers = 0
    while covered <= need:
        gain = balls @ uncovered
        best = np.flatnonzero(gain == gain.max())
        if len(best) > 1:
            cost = spread[best] @ uncovered
            best = best[cost == cost.min()]
        c = int(best[0])
        newly = balls[c] * uncovered
        covered += int(newly.sum())
        uncovered -= newly
        centers += 1
    return centers


@dataclass
class EntropyProfile:
    epsilons: list[float]
    H: list[int]
    n: int
    diverging: bool
    by_n: dict[int, list[int]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "epsilons": self.epsilons,
            "H": self.H,
            "n": self.n,
            "diverging": self.diverging,
            "by_n": {str(k): v for k, v in self.by_n.items()},
        }

    def rows(self):
        """(epsilon, n, H) triples in a stable order."""
        for n, hs in sorted(self.by_n.items()):
            for eps, h in zip(self.epsilons, hs):
                yield eps, n, h


def _source_matrix(source, n, seed, replica, p):
    if isinstance(source, str):
        if source != "random-graph":
            raise ParameterError(f"unknown matrix source {source!r}")
        return random_graph_matrix(p, n, seed, replica)
    if not source.is_metric:
        raise ParameterError(f"{source.kernel_id} is not a metric kernel")
    return evaluate_matrix(source, sample_symmetric_grid(source.space_x, n, seed, replica))


def entropy_profile(source: KernelSpec | str, epsilons, n_list, seed: int,
                    p: float = 0.5) -> EntropyProfile:
    """mm-entropy at every epsilon for symmetric grids of each size in ``n_list``.

    ``source`` is a metric kernel or ``"random-graph"`` (edge probability
    ``p``). The profile is flagged ``diverging`` when H at the smallest epsilon
    more than doubles from the smallest to the largest n.
    """
    eps = [float(e) for e in epsilons]
    if not eps or any(b > a for a, b in zip(eps, eps[1:])):
        raise ParameterError("epsilons must be nonempty and sorted descending")
    sizes = sorted(int(n) for n in n_list)
    if not sizes:
        raise ParameterError("need at least one sample size")
    by_n = {}
    for idx, n in enumerate(sizes):
        mat = _source_matrix(source, n, seed, idx, p)
        by_n[n] = [mm_entropy(mat, e) for e in eps]
    diverging = by_n[sizes[-1]][-1] > 2 * by_n[sizes[0]][-1]
    return EntropyProfile(eps, by_n[sizes[-1]], sizes[-1], bool(diverging), by_n)


@dataclass
class SpectrumSummary:
    eigenvalues: np.ndarray
    normalization: str
    n: int
    seed: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"eigenvalues": self.eigenvalues.tolist(), "normalization": self.normalization,
                "n": self.n, "seed": self.seed}


def spectrum(M, normalization: str = "by-n") -> SpectrumSummary:
    """Eigenvalues of a symmetric matrix, scaled and sorted descending."""
    if normalization not in NORMALIZATIONS:
        raise ParameterError(f"unknown normalization {normalization!r}")
    v = _square_values(M)
    _require_symmetric(v)
    n = v.shape[0]
    ev = np.linalg.eigvalsh(v)[::-1]
    if normalization == "by-n":
        ev = ev / n
    elif normalization == "by-sqrt-n":
        ev = ev / np.sqrt(n)
    seed = M.seed if isinstance(M, SampleMatrix) else None
    return SpectrumSummary(np.ascontiguousarray(ev), normalization, n, seed)


def semicircle_cdf(x) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    return 0.5 + x * np.sqrt(4.0 - x * x) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi


def semicircle_quantile(p, iterations: int = 60) -> np.ndarray:
    """Invert the semicircle CDF on [-2, 2] by vectorised bisection."""
    p = np.asarray(p, dtype=float)
    lo = np.full(p.shape, -2.0)
    hi = np.full(p.shape, 2.0)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = semicircle_cdf(mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def semicircle_distance(spec: SpectrumSummary) -> float:
    """Wasserstein-1 distance of the standardized bulk to the semicircle law.

    The largest eigenvalue is dropped, the rest are centered and scaled to unit
    variance, then matched against semicircle quantiles at (i + 1/2)/n.
    """
    ev = np.sort(np.asarray(spec.eigenvalues, dtype=float))[::-1]
    if len(ev) < 2:
        raise ParameterError("need at least two eigenvalues")
    bulk = np.sort(ev[1:])
    centered = bulk - bulk.mean()
    sd = np.sqrt(np.mean(centered ** 2))
    if not sd > 1e-12 * max(1.0, np.abs(bulk).max()):
        raise DegenerateSpectrumError("spectrum has zero variance after dropping the top eigenvalue")
    z = centered / sd
    q = semicircle_quantile((np.arange(len(z)) + 0.5) / len(z))
    return float(np.mean(np.abs(z - q)))


def spectral_dispersion(kernel: KernelSpec, n: int, R: int, seed: int,
                        same_seed: bool = False, threads: int | None = None) -> dict[str, Any]:
    """Spread of lambda_max / n across R independent symmetric grids.

    ``same_seed`` reuses replica stream 0 for every replica (a test hook).
    """
    if not kernel.is_metric:
        raise ParameterError(f"{kernel.kernel_id} is not a metric kernel")
    if R < 2:
        raise ParameterError("need at least two replicas")

    def top(r):
        grid = sample_symmetric_grid(kernel.space_x, n, seed, 0 if same_seed else r)
        return float(spectrum(evaluate_matrix(kernel, grid), "by-n").eigenvalues[0])

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tops = list(pool.map(top, range(R)))
    else:
        tops = [top(r) for r in range(R)]
    arr = np.array(tops)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1))
    return {
        "kernel_id": kernel.kernel_id,
        "n": n,
        "replicas": R,
        "seed": seed,
        "mean": mean,
        "std": std,
        "cv": std / mean if mean != 0 else float("nan"),
        "top_eigenvalues": tops,
    }
