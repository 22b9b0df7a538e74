"""Strategy matrices and Laplace-mechanism measurement.

A strategy is the set of linear queries actually answered with noise. Each
measurement adds iid Laplace(0, b) noise per strategy row with

    b = sensitivity(strategy) / epsilon

where sensitivity is the maximum column L1 norm of the strategy matrix, so
per-row noise variance is 2 b^2 and the release satisfies epsilon-DP under
add/remove-one-record adjacency. Noise is sampled by inverse CDF from a
seeded 64-bit generator so sessions and benchmarks replay exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import DataVector, QueryDomain
from .errors import DomainMismatchError, InvalidStrategyError

IDENTITY = "identity"
IDENTITY_PLUS_MARGINS = "identity-plus-margins"


@dataclass(eq=False)
class Strategy:
    """Strategy queries as a (rows x cells) matrix over one query domain."""

    domain: QueryDomain
    matrix: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[1] != self.domain.cell_count:
            raise InvalidStrategyError("strategy columns must match domain cell count")
        if self.matrix.shape[0] == 0:
            raise InvalidStrategyError("strategy matrix is empty")

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]


@dataclass(eq=False)
class Measurement:
    """One DP interaction: noisy strategy answers plus the noise bookkeeping."""

    strategy: Strategy
    noisy_answers: np.ndarray
    epsilon: float
    noise_scale: float  # Laplace scale b, shared by every row
    seed: object = None
    index: int = 0

    def __post_init__(self):
        self.noisy_answers = np.asarray(self.noisy_answers, dtype=float)
        if self.noisy_answers.shape != (self.strategy.rows,):
            raise InvalidStrategyError("one noisy answer per strategy row required")
        if not self.epsilon > 0:
            raise InvalidStrategyError("epsilon must be positive")
        if not self.noise_scale > 0:
            raise InvalidStrategyError("noise scale must be positive")

    @property
    def row_variance(self) -> float:
        return 2.0 * self.noise_scale**2


def sensitivity(strategy: Strategy) -> float:
    """L1 sensitivity: max over columns of the sum of absolute row weights."""
    sens = float(np.abs(strategy.matrix).sum(axis=0).max())
    if sens <= 0:
        raise InvalidStrategyError("strategy has zero sensitivity")
    return sens


def build_strategy(domain: QueryDomain, family: str = IDENTITY) -> Strategy:
    """Construct a built-in strategy family over `domain`.

    identity: one indicator row per cell. identity-plus-margins: identity
    rows plus one bin-marginal indicator row per bin of each attribute.
    """
    n = domain.cell_count
    if family == IDENTITY:
        return Strategy(domain, np.eye(n), name=IDENTITY)
    if family == IDENTITY_PLUS_MARGINS:
        blocks = [np.eye(n)]
        for axis in range(len(domain.attributes)):
            blocks.append(domain.marginal_selector(axis))
        return Strategy(domain, np.vstack(blocks), name=IDENTITY_PLUS_MARGINS)
    raise InvalidStrategyError(f"unknown strategy family {family!r}")


def laplace_noise(rng: np.random.Generator, scale: float, size: int) -> np.ndarray:
    """Inverse-CDF Laplace(0, scale) draws from an explicit generator."""
    u = rng.random(size) - 0.5
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def measure(
    true_counts: DataVector,
    strategy: Strategy,
    epsilon: float,
    seed,
    index: int = 0,
) -> Measurement:
    """Answer every strategy row over the true counts under epsilon-DP.

    Deterministic given `seed`; `seed` may be an int, a tuple of ints, a
    SeedSequence, or a Generator (consumed in place).
    """
    if not epsilon > 0:
        raise InvalidStrategyError("epsilon must be positive")
    if strategy.domain != true_counts.domain:
        raise DomainMismatchError("strategy and counts use different domains")
    b = sensitivity(strategy) / epsilon
    rng = _generator(seed)
    exact = strategy.matrix @ true_counts.counts
    noisy = exact + laplace_noise(rng, b, strategy.rows)
    return Measurement(
        strategy=strategy,
        noisy_answers=noisy,
        epsilon=float(epsilon),
        noise_scale=b,
        seed=seed if not isinstance(seed, np.random.Generator) else None,
        index=index,
    )
