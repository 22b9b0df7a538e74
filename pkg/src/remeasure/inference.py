"""Inverse-variance weighted least-squares fusion of cached measurements.

Every measurement i contributes its strategy A_i and noisy answers y_i with
per-row variance s_i^2 = 2 b_i^2. Fusion solves the weighted normal
equations

    P x = r,   P = sum_i A_i^T A_i / s_i^2,   r = sum_i A_i^T y_i / s_i^2

so the estimate minimizes sum_i ||(A_i x - y_i) / s_i||^2. The precision
matrix P is data-independent, which lets expected RMSE of any workload row w
be reported without spending budget: sqrt(w P^-1 w^T). Fusing one more
measurement strictly increases P, so every workload row's expected RMSE
strictly drops.

Estimates are not clamped: negative cell estimates are reported as-is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_solve

from .domain import LinearQuery, QueryDomain
from .errors import DomainMismatchError, RankDeficientError
from .mechanism import Measurement

# Cholesky pivots (squared diagonal of L) below this are treated as singular.
PIVOT_TOLERANCE = 1e-10


def _spd_solve(precision: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        lower = np.linalg.cholesky(precision)
    except np.linalg.LinAlgError:
        raise RankDeficientError("combined strategy is rank-deficient") from None
    if (np.diag(lower) ** 2 <= PIVOT_TOLERANCE).any():
        raise RankDeficientError("precision matrix is numerically singular")
    return cho_solve((lower, True), rhs)


@dataclass(eq=False)
class EstimateSet:
    """Fused cell estimates with covariance-derived per-bin error.

    ``previous_bin_estimates`` / ``previous_bin_rmse`` hold the state from
    before the latest remeasure, when there is one.
    """

    domain: QueryDomain
    cell_estimates: np.ndarray
    precision: np.ndarray
    covariance: np.ndarray
    bin_estimates: dict[str, np.ndarray]
    bin_rmse: dict[str, np.ndarray]
    previous_bin_estimates: dict[str, np.ndarray] | None = None
    previous_bin_rmse: dict[str, np.ndarray] | None = None

    def expected_rmse(self, query: LinearQuery | np.ndarray) -> float:
        return expected_rmse(self.precision, query)


def fuse(measurements: Sequence[Measurement], previous: EstimateSet | None = None) -> EstimateSet:
    """Fuse all measurements of one query into a consistent estimate.

    Measurements are weighted as the inverse of their per-row noise variance.
    Raises RankDeficientError when the stacked strategy cannot identify every
    cell, and DomainMismatchError when measurements mix query domains.
    """
    if not measurements:
        raise RankDeficientError("cannot fuse an empty measurement list")
    domain = measurements[0].strategy.domain
    n = domain.cell_count
    precision = np.zeros((n, n))
    rhs = np.zeros(n)
    for m in measurements:
        if m.strategy.domain != domain:
            raise DomainMismatchError("measurements span different query domains")
        a = m.strategy.matrix
        w = 1.0 / m.row_variance
        precision += w * (a.T @ a)
        rhs += w * (a.T @ m.noisy_answers)
    cells = _spd_solve(precision, rhs)
    covariance = _spd_solve(precision, np.eye(n))

    bin_estimates: dict[str, np.ndarray] = {}
    bin_rmse: dict[str, np.ndarray] = {}
    for axis, attr in enumerate(domain.attributes):
        sel = domain.marginal_selector(axis)
        bin_estimates[attr.name] = sel @ cells
        bin_var = np.einsum("bc,cd,bd->b", sel, covariance, sel)
        bin_rmse[attr.name] = np.sqrt(bin_var)

    return EstimateSet(
        domain=domain,
        cell_estimates=cells,
        precision=precision,
        covariance=covariance,
        bin_estimates=bin_estimates,
        bin_rmse=bin_rmse,
        previous_bin_estimates=None if previous is None else {k: v.copy() for k, v in previous.bin_estimates.items()},
        previous_bin_rmse=None if previous is None else {k: v.copy() for k, v in previous.bin_rmse.items()},
    )


def expected_rmse(precision: np.ndarray, query: LinearQuery | np.ndarray) -> float:
    """Standard deviation of the fused estimate of one workload row.

    Data-independent: derived purely from the precision matrix.
    """
    w = query.weights if isinstance(query, LinearQuery) else np.asarray(query, dtype=float)
    if w.shape != (precision.shape[0],):
        raise DomainMismatchError("workload row length must match precision dimension")
    z = _spd_solve(precision, w)
    return float(np.sqrt(w @ z))


def remeasure_error_curve(initial_eps: float, step_eps: float, steps: int) -> np.ndarray:
    """Per-cell expected RMSE after the initial measurement plus k remeasures.

    Under the identity strategy (sensitivity 1) precision adds across
    measurements, so entry k is sqrt(2 / (initial_eps^2 + k step_eps^2)).
    """
    if not (initial_eps > 0 and step_eps > 0):
        raise ValueError("epsilons must be positive")
    if steps < 0:
        raise ValueError("steps must be non-negative")
    k = np.arange(steps + 1)
    return np.sqrt(2.0 / (initial_eps**2 + k * step_eps**2))
