"""Exact inversion of additive matrices and windowed averages over one matrix."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import stats

from .errors import ParameterError
from .matdist import SampleMatrix
from .spaces_kernels import MeasureSpaceSpec


def circular_distance(a, b) -> np.ndarray:
    """Distance on R/Z."""
    d = np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), 1.0)
    return np.minimum(d, 1.0 - d)


@dataclass
class RecoveryResult:
    x_hat: np.ndarray
    y_hat: np.ndarray
    residual_max: float
    gauge: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "x_hat": self.x_hat.tolist(),
            "y_hat": self.y_hat.tolist(),
            "residual_max": self.residual_max,
            "gauge": self.gauge,
        }


def _values(M) -> np.ndarray:
    return np.asarray(M.values if isinstance(M, SampleMatrix) else M, dtype=float)


def recover_additive(M) -> RecoveryResult:
    """Solve ``M[i, j] = x_i + y_j (mod 1)`` with the gauge ``x_0 = 0``.

    The coordinates are determined up to the rotation ``(x + c, y - c)``; the
    reported ``gauge`` is ``M[0, 0]``, which is what ``x_hat[0]`` would be in
    the opposite gauge ``y_0 = 0``. Non-additive input is not an error, it
    shows up as a large ``residual_max``.
    """
    v = _values(M)
    if v.ndim != 2 or min(v.shape) < 1:
        raise ParameterError("need a nonempty matrix")
    y_hat = np.mod(v[0, :], 1.0)
    x_hat = np.mod(v[:, 0] - y_hat[0], 1.0)
    x_hat[0] = 0.0
    fit = np.mod(x_hat[:, None] + y_hat[None, :], 1.0)
    residual = float(circular_distance(v, fit).max())
    return RecoveryResult(x_hat, y_hat, residual, float(v[0, 0]))


def validate_recovery(result: RecoveryResult, expected_space: MeasureSpaceSpec,
                      alpha: float = 0.01) -> dict[str, Any]:
    """KS uniformity of the recovered coordinates.

    ``x_hat[0]`` is pinned by the gauge and excluded; fewer than one free
    coordinate gives the vacuous p-value 1.
    """
    if expected_space.space_id != "unit-interval-lebesgue":
        raise ParameterError("only the unit interval is supported for validation")

    def ks(sample):
        if len(sample) < 1:
            return 1.0
        return float(stats.kstest(sample, "uniform").pvalue)

    p_x = ks(np.asarray(result.x_hat)[1:])
    p_y = ks(np.asarray(result.y_hat))
    return {
        "p_value_x": p_x,
        "p_value_y": p_y,
        "alpha": alpha,
        "passed": bool(p_x >= alpha and p_y >= alpha),
        "residual_max": result.residual_max,
    }


@dataclass
class FolnerTrace:
    window_sizes: list[int]
    averages: list[float]
    statistic_id: str

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


_MOMENT = re.compile(r"^entry-moment-(\d+(?:\.\d+)?)$")


def window_statistic(statistic_id: str, cap: float = 1.0):
    """Return ``phi(block) -> float`` averaging a bounded statistic over a block."""
    m = _MOMENT.match(statistic_id)
    if m:
        power = float(m.group(1))
        if power <= 0:
            raise ParameterError("moment order must be positive")
        return lambda block: float(np.mean(np.minimum(np.abs(block), cap) ** power))
    if statistic_id == "entry-cos":
        return lambda block: float(np.mean(np.cos(2.0 * np.pi * block)))
    if statistic_id == "pattern-product":
        def pattern(block):
            if block.shape[0] < 2:
                raise ParameterError("pattern-product needs windows of size >= 2")
            h = np.minimum(np.abs(block), cap)
            return float(np.mean(h[:-1, :] * h[1:, :]))
        return pattern
    raise ParameterError(f"unknown window statistic {statistic_id!r}")


def folner_average(M, statistic_id: str, window_sizes, cap: float = 1.0) -> FolnerTrace:
    """Average a window statistic over the growing leading blocks ``M[:s, :s]``."""
    v = _values(M)
    sizes = [int(s) for s in window_sizes]
    if not sizes:
        raise ParameterError("need at least one window size")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ParameterError("window sizes must be strictly increasing")
    if sizes[0] < 1 or sizes[-1] > min(v.shape):
        raise ParameterError(f"window sizes must lie in [1, {min(v.shape)}]")
    if not cap > 0:
        raise ParameterError("cap must be positive")
    phi = window_statistic(statistic_id, cap)
    return FolnerTrace(sizes, [phi(v[:s, :s]) for s in sizes], statistic_id)
