"""Rational-agent simulation: benchmarks and loss decomposition.

The data-generating model (DGM) is a finite set of dataset versions, a prior
over them, one query per analysis question, and the session budget
parameters. A rational agent knows the DGM, observes every noisy
measurement, Bayesian-updates the prior over versions in log space, and
reports optimally: posterior-weighted yes-probabilities for binary
questions, and central posterior quantiles of the version answers for
quantitative ones (proper scoring makes both optimal).

Benchmarks are expected per-block payoffs under different information and
allocation assumptions:

  lower_bound          fixed reports from the dataset size alone
  r_prior              best fixed reports from the prior (resampled answers)
  r_posterior_zero     Bayesian agent, initial measurements only
  r_posterior_rand     Bayesian agent, randomly allocated remeasures
  r_posterior_ex_ante  best fixed allocation chosen before seeing estimates
  r_posterior_same     Bayesian agent replaying observed allocations
  upper_bound          the full per-query budget spent on every query

All Monte Carlo draws derive from per-trial RNG streams keyed by
(seed, trial index), so results are reproducible regardless of execution
order, and every benchmark shares one set of trials (common random numbers).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .domain import (
    Dataset,
    GREATER_THAN,
    LinearQuery,
    QueryDomain,
    Question,
    Schema,
    evaluate,
    selection_weights,
    vectorize,
)
from .errors import ConfigError
from .mechanism import Measurement, build_strategy, sensitivity
from .scoring import DEFAULT_ALPHA, DEFAULT_QUESTION_MAX, BinaryReport, IntervalReport
from .session import SessionConfig

RAND_MULTINOMIAL = "multinomial"
RAND_COMPOSITIONS = "compositions"


@dataclass(eq=False)
class DGM:
    """Known joint distribution over dataset versions and DP noise."""

    versions: list[Dataset]
    questions: list[Question]
    config: SessionConfig = field(default_factory=SessionConfig)
    prior: np.ndarray | None = None
    per_question_max: float = DEFAULT_QUESTION_MAX

    def __post_init__(self):
        if len(self.versions) < 2:
            raise ConfigError("a DGM needs at least two dataset versions")
        schema = self.versions[0].schema
        if any(v.schema != schema for v in self.versions):
            raise ConfigError("all versions must share one schema")
        if self.prior is None:
            self.prior = np.full(len(self.versions), 1.0 / len(self.versions))
        else:
            self.prior = np.asarray(self.prior, dtype=float)
            if self.prior.shape != (len(self.versions),):
                raise ConfigError("prior length must match version count")
            if (self.prior < 0).any() or not math.isclose(self.prior.sum(), 1.0, rel_tol=1e-9):
                raise ConfigError("prior must be a probability vector")


@dataclass(frozen=True)
class AllocationStrategy:
    """Remeasures per query; the full-budget-per-query strategy used for the
    upper bound deliberately violates the click budget and is flagged."""

    remeasures_per_query: tuple[int, ...]
    out_of_budget: bool = False

    def __post_init__(self):
        if any(r < 0 for r in self.remeasures_per_query):
            raise ConfigError("remeasure counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.remeasures_per_query)


@dataclass(frozen=True)
class BenchmarkValue:
    dollars: float
    std_err: float


@dataclass(eq=False)
class BenchmarkReport:
    lower_bound: BenchmarkValue
    r_prior: BenchmarkValue
    r_posterior_zero: BenchmarkValue
    r_posterior_rand: BenchmarkValue
    r_posterior_ex_ante: BenchmarkValue
    upper_bound: BenchmarkValue
    r_posterior_same: BenchmarkValue | None = None
    ex_ante_allocation: tuple[int, ...] = ()
    trials: int = 0
    seed: int = 0
    rand_mode: str = RAND_MULTINOMIAL

    ORDER = (
        "lower_bound",
        "r_prior",
        "r_posterior_zero",
        "r_posterior_rand",
        "r_posterior_ex_ante",
        "upper_bound",
    )

    def entries(self) -> list[tuple[str, BenchmarkValue]]:
        out = [(name, getattr(self, name)) for name in self.ORDER]
        if self.r_posterior_same is not None:
            out.insert(5, ("r_posterior_same", self.r_posterior_same))
        return out

    def ordering_violations(self, tolerance_std_errs: float = 2.0) -> list[str]:
        """Chain checks lower_bound <= ... <= upper_bound within tolerance."""
        problems = []
        chain = [(name, getattr(self, name)) for name in self.ORDER]
        for (name_a, a), (name_b, b) in zip(chain, chain[1:]):
            slack = tolerance_std_errs * math.hypot(a.std_err, b.std_err)
            if a.dollars - b.dollars > slack:
                problems.append(f"{name_a} (${a.dollars:.3f}) exceeds {name_b} (${b.dollars:.3f})")
        return problems

    def to_dict(self) -> dict:
        return {
            "benchmarks": [
                {"benchmark": name, "dollars": v.dollars, "stdErr": v.std_err}
                for name, v in self.entries()
            ],
            "exAnteAllocation": list(self.ex_ante_allocation),
            "trials": self.trials,
            "seed": self.seed,
            "randMode": self.rand_mode,
        }


@dataclass(eq=False)
class LossReport:
    observed_payoff: float
    total_loss: float
    reporting_loss: float
    allocation_loss_overall: float
    allocation_loss_separated: float
    allocation_loss_separated_full_budget: float

    def to_dict(self) -> dict:
        return {
            "observedPayoff": self.observed_payoff,
            "totalLoss": self.total_loss,
            "reportingLoss": self.reporting_loss,
            "allocationLossOverall": self.allocation_loss_overall,
            "allocationLossSeparated": self.allocation_loss_separated,
            "allocationLossSeparatedFullBudget": self.allocation_loss_separated_full_budget,
        }


# -- compiled model --------------------------------------------------------


@dataclass(eq=False)
class _CompiledQuery:
    domain: QueryDomain
    matrix: np.ndarray          # strategy rows x cells
    rows: int
    b_initial: float            # Laplace scale of the initial measurement
    b_step: float               # Laplace scale of each remeasure
    exact_answers: np.ndarray   # versions x rows: strategy applied to each version


@dataclass(eq=False)
class _Compiled:
    queries: list[_CompiledQuery]
    answer_values: np.ndarray   # questions x versions
    answer_yes: np.ndarray      # questions x versions (binary questions only)
    prior: np.ndarray
    log_prior: np.ndarray
    total_remeasures: int
    dataset_size: int


def _compile(dgm: DGM) -> _Compiled:
    cached = getattr(dgm, "_compiled", None)
    if cached is not None:
        return cached
    queries = []
    n_v = len(dgm.versions)
    n_q = len(dgm.questions)
    answer_values = np.zeros((n_q, n_v))
    answer_yes = np.zeros((n_q, n_v), dtype=bool)
    for qi, question in enumerate(dgm.questions):
        domain = question.functional.domain
        strategy = build_strategy(domain, dgm.config.strategy_family)
        sens = sensitivity(strategy)
        exact = np.zeros((n_v, strategy.rows))
        for vi, version in enumerate(dgm.versions):
            counts = vectorize(version, domain)
            exact[vi] = strategy.matrix @ counts.counts
            answer_values[qi, vi] = float(question.functional.weights @ counts.counts)
            if question.kind == "binary":
                answer_yes[qi, vi] = bool(evaluate(question, counts))
        queries.append(
            _CompiledQuery(
                domain=domain,
                matrix=strategy.matrix,
                rows=strategy.rows,
                b_initial=sens / dgm.config.initial_epsilon_per_query,
                b_step=sens / dgm.config.epsilon_per_remeasure,
                exact_answers=exact,
            )
        )
    compiled = _Compiled(
        queries=queries,
        answer_values=answer_values,
        answer_yes=answer_yes,
        prior=dgm.prior,
        log_prior=np.log(np.maximum(dgm.prior, 1e-300)),
        total_remeasures=dgm.config.total_remeasures,
        dataset_size=dgm.versions[0].size,
    )
    dgm._compiled = compiled
    return compiled


# -- fixed (measurement-free) reports ---------------------------------------


def _discrete_uniform_quantile(n: int, beta: float) -> int:
    """Nearest-rank quantile of the discrete uniform distribution on {0..n}."""
    rank = math.ceil(beta * (n + 1))
    return int(min(max(rank - 1, 0), n))


def lower_bound_report(questions: Sequence[Question], dataset_size: int) -> list:
    """Fixed reports using only the dataset size: a discrete uniform belief
    over possible counts {0..size}."""
    n = dataset_size
    reports = []
    for question in questions:
        if question.kind == "quantitative":
            reports.append(
                IntervalReport(
                    lower=_discrete_uniform_quantile(n, DEFAULT_ALPHA / 2),
                    upper=_discrete_uniform_quantile(n, 1 - DEFAULT_ALPHA / 2),
                )
            )
        else:
            t = question.threshold
            if question.direction == GREATER_THAN:
                satisfying = max(0, min(n - t, n + 1))
            else:
                satisfying = max(0, min(t + 1, n + 1))
            reports.append(BinaryReport(p_yes=satisfying / (n + 1)))
    return reports


def _nearest_rank(sorted_draws: np.ndarray, beta: float) -> float:
    rank = max(1, math.ceil(beta * len(sorted_draws)))
    return float(sorted_draws[rank - 1])


def r_prior_report(dgm: DGM, draws: int = 10_000, seed: int = 0) -> list:
    """Best fixed reports from the prior: resample the version answers with
    replacement and report quantiles / yes-proportions of the draws."""
    compiled = _compile(dgm)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 1))))
    reports = []
    for qi, question in enumerate(dgm.questions):
        idx = rng.choice(len(dgm.versions), size=draws, p=compiled.prior)
        if question.kind == "quantitative":
            sample = np.sort(compiled.answer_values[qi][idx])
            reports.append(
                IntervalReport(
                    lower=_nearest_rank(sample, DEFAULT_ALPHA / 2),
                    upper=_nearest_rank(sample, 1 - DEFAULT_ALPHA / 2),
                )
            )
        else:
            reports.append(BinaryReport(p_yes=float(compiled.answer_yes[qi][idx].mean())))
    return reports


# -- posterior and optimal reporting ----------------------------------------


def posterior(dgm: DGM, measurements_by_query: Mapping[int, Sequence[Measurement]]) -> np.ndarray:
    """Posterior over versions given observed measurements, in log space.

    Each strategy row contributes a Laplace likelihood term; with no
    measurements the posterior equals the prior.
    """
    compiled = _compile(dgm)
    log_post = compiled.log_prior.copy()
    for qi, measurements in measurements_by_query.items():
        exact = compiled.queries[qi].exact_answers
        for m in measurements:
            residual = m.noisy_answers[None, :] - exact
            log_post += -np.abs(residual).sum(axis=1) / m.noise_scale
            log_post += -m.strategy.rows * math.log(2.0 * m.noise_scale)
    log_post -= log_post.max()
    post = np.exp(log_post)
    return post / post.sum()


def _weighted_quantile(values: np.ndarray, weights: np.ndarray, beta: float) -> float:
    order = np.argsort(values)
    cum = np.cumsum(weights[order])
    idx = int(np.argmax(cum >= beta - 1e-12))
    return float(values[order][idx])


def optimal_report(post: np.ndarray, dgm: DGM, question_index: int):
    """The expected-score-minimizing report under a posterior over versions."""
    compiled = _compile(dgm)
    question = dgm.questions[question_index]
    if question.kind == "binary":
        p = float(post @ compiled.answer_yes[question_index].astype(float))
        return BinaryReport(p_yes=min(max(p, 0.0), 1.0))
    values = compiled.answer_values[question_index]
    return IntervalReport(
        lower=_weighted_quantile(values, post, DEFAULT_ALPHA / 2),
        upper=_weighted_quantile(values, post, 1 - DEFAULT_ALPHA / 2),
    )


# -- Monte Carlo engine ------------------------------------------------------


@dataclass(eq=False)
class _TrialBank:
    """Per-trial draws shared by every benchmark (common random numbers).

    ``noise`` holds standard Laplace draws for measurement slots 0..R per
    query; slot 0 is the initial measurement, slots 1..R the remeasures. Any
    allocation uses a prefix of the slots, so payoff differences across
    allocations are never driven by fresh noise.
    """

    version_draws: np.ndarray            # (trials,)
    noise: list[np.ndarray]              # per query: (trials, R + 1, rows)
    rand_choices: np.ndarray             # (trials, R) query index per random click
    composition_draws: np.ndarray        # (trials,) uniforms for composition mode


def _build_bank(compiled: _Compiled, trials: int, seed: int) -> _TrialBank:
    total = compiled.total_remeasures
    children = np.random.SeedSequence((seed, 0)).spawn(trials)
    version_draws = np.empty(trials, dtype=np.int64)
    noise = [np.empty((trials, total + 1, cq.rows)) for cq in compiled.queries]
    rand_choices = np.empty((trials, total), dtype=np.int64)
    composition_draws = np.empty(trials)
    cum_prior = np.cumsum(compiled.prior)
    cum_prior[-1] = 1.0
    n_queries = len(compiled.queries)
    for t, child in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(child))
        version_draws[t] = min(
            int(np.searchsorted(cum_prior, rng.random(), side="right")), len(cum_prior) - 1
        )
        for qi, cq in enumerate(compiled.queries):
            u = rng.random((total + 1, cq.rows)) - 0.5
            noise[qi][t] = -np.sign(u) * np.log1p(-2.0 * np.abs(u))
        if total:
            rand_choices[t] = rng.integers(0, n_queries, size=total)
        composition_draws[t] = rng.random()
    return _TrialBank(version_draws, noise, rand_choices, composition_draws)


def _loglik_tables(compiled: _Compiled, bank: _TrialBank) -> list[np.ndarray]:
    """Per query, cumulative log-likelihood table (R + 1, trials, versions).

    Entry m covers the initial measurement plus the first m remeasures.
    Version-independent constants are dropped; they cancel when normalizing.
    """
    total = compiled.total_remeasures
    trials = len(bank.version_draws)
    n_v = len(compiled.prior)
    tables = []
    for qi, cq in enumerate(compiled.queries):
        truth_rows = cq.exact_answers[bank.version_draws]          # (T, rows)
        diff = truth_rows[:, None, :] - cq.exact_answers[None, :, :]  # (T, V, rows)
        table = np.empty((total + 1, trials, n_v))
        acc = np.zeros((trials, n_v))
        for slot in range(total + 1):
            b = cq.b_initial if slot == 0 else cq.b_step
            residual = diff + b * bank.noise[qi][:, slot][:, None, :]
            acc = acc - np.abs(residual).sum(axis=2) / b
            table[slot] = acc
        tables.append(table)
    return tables


def _interval_scores(lower, upper, truth, alpha=DEFAULT_ALPHA):
    under = np.maximum(lower - truth, 0.0)
    over = np.maximum(truth - upper, 0.0)
    return (upper - lower) + (2.0 / alpha) * (under + over)


def _payoff_from_scores(scores, constant, per_question_max):
    return np.clip((constant - scores) / constant, 0.0, 1.0) * per_question_max


def _alloc_payoffs(
    dgm: DGM,
    compiled: _Compiled,
    tables: list[np.ndarray],
    bank: _TrialBank,
    alloc: Sequence[int],
    idx=None,
) -> np.ndarray:
    """Per-trial block payoffs under one fixed remeasure allocation."""
    sel = slice(None) if idx is None else idx
    loglik = compiled.log_prior[None, :] + sum(
        tables[qi][alloc[qi]][sel] for qi in range(len(compiled.queries))
    )
    loglik -= loglik.max(axis=1, keepdims=True)
    post = np.exp(loglik)
    post /= post.sum(axis=1, keepdims=True)
    vt = bank.version_draws[sel]
    payoffs = np.zeros(post.shape[0])
    for qi, question in enumerate(dgm.questions):
        if question.kind == "binary":
            yes = compiled.answer_yes[qi].astype(float)
            p = post @ yes
            scores = 2.0 * (p - yes[vt]) ** 2
        else:
            values = compiled.answer_values[qi]
            order = np.argsort(values)
            cum = np.cumsum(post[:, order], axis=1)
            li = np.argmax(cum >= DEFAULT_ALPHA / 2 - 1e-12, axis=1)
            ui = np.argmax(cum >= 1 - DEFAULT_ALPHA / 2 - 1e-12, axis=1)
            lower = values[order][li]
            upper = values[order][ui]
            scores = _interval_scores(lower, upper, values[vt])
        payoffs += _payoff_from_scores(scores, question.constant, dgm.per_question_max)
    return payoffs


def _fixed_report_payoffs(dgm: DGM, compiled: _Compiled, reports: Sequence, bank: _TrialBank) -> np.ndarray:
    vt = bank.version_draws
    payoffs = np.zeros(len(vt))
    for qi, (question, report) in enumerate(zip(dgm.questions, reports)):
        if question.kind == "binary":
            truth = compiled.answer_yes[qi][vt].astype(float)
            scores = (report.p_yes - truth) ** 2 + ((1 - report.p_yes) - (1 - truth)) ** 2
        else:
            scores = _interval_scores(report.lower, report.upper, compiled.answer_values[qi][vt])
        payoffs += _payoff_from_scores(scores, question.constant, dgm.per_question_max)
    return payoffs


def _mean_stderr(payoffs: np.ndarray) -> BenchmarkValue:
    mean = float(payoffs.mean())
    if len(payoffs) < 2:
        return BenchmarkValue(mean, 0.0)
    return BenchmarkValue(mean, float(payoffs.std(ddof=1) / math.sqrt(len(payoffs))))


def compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """All non-negative integer vectors of length `parts` summing to `total`."""
    out = []
    for dividers in itertools.combinations(range(total + parts - 1), parts - 1):
        counts = []
        prev = -1
        for d in (*dividers, total + parts - 1):
            counts.append(d - prev - 1)
            prev = d
        out.append(tuple(counts))
    return out


def _check_allocation(alloc: Sequence[int], compiled: _Compiled, out_of_budget: bool = False) -> tuple[int, ...]:
    alloc = tuple(int(a) for a in alloc)
    if len(alloc) != len(compiled.queries):
        raise ConfigError("allocation length must equal query count")
    if any(a < 0 for a in alloc):
        raise ConfigError("allocation entries must be non-negative")
    if any(a > compiled.total_remeasures for a in alloc):
        raise ConfigError("allocation entry exceeds the per-query slot limit")
    if not out_of_budget and sum(alloc) > compiled.total_remeasures:
        raise ConfigError(
            f"allocation spends {sum(alloc)} remeasures, budget is {compiled.total_remeasures}"
        )
    return alloc


def expected_payoff(dgm: DGM, allocation, trials: int, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo expected per-block payoff of one allocation, with its
    standard error."""
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    compiled = _compile(dgm)
    if isinstance(allocation, AllocationStrategy):
        alloc = _check_allocation(allocation.remeasures_per_query, compiled, allocation.out_of_budget)
    else:
        alloc = _check_allocation(allocation, compiled)
    bank = _build_bank(compiled, trials, seed)
    tables = _loglik_tables(compiled, bank)
    value = _mean_stderr(_alloc_payoffs(dgm, compiled, tables, bank, alloc))
    return value.dollars, value.std_err


def _rand_allocation_payoffs(dgm, compiled, tables, bank, mode: str) -> np.ndarray:
    trials = len(bank.version_draws)
    n_queries = len(compiled.queries)
    if compiled.total_remeasures == 0:
        return _alloc_payoffs(dgm, compiled, tables, bank, (0,) * n_queries)
    if mode == RAND_MULTINOMIAL:
        allocs = np.zeros((trials, n_queries), dtype=np.int64)
        for qi in range(n_queries):
            allocs[:, qi] = (bank.rand_choices == qi).sum(axis=1)
    elif mode == RAND_COMPOSITIONS:
        comps = np.array(compositions(compiled.total_remeasures, n_queries))
        picks = np.minimum(
            (bank.composition_draws * len(comps)).astype(np.int64), len(comps) - 1
        )
        allocs = comps[picks]
    else:
        raise ConfigError(f"unknown random-allocation mode {mode!r}")
    payoffs = np.empty(trials)
    unique_allocs, inverse = np.unique(allocs, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    for ai, alloc in enumerate(unique_allocs):
        idx = np.nonzero(inverse == ai)[0]
        payoffs[idx] = _alloc_payoffs(dgm, compiled, tables, bank, tuple(alloc), idx=idx)
    return payoffs


def benchmarks(
    dgm: DGM,
    trials: int,
    seed: int = 0,
    observed_allocations: Sequence[Sequence[int]] | None = None,
    observed_measurements: Sequence[Mapping[int, Sequence[Measurement]]] | None = None,
    rand_mode: str = RAND_MULTINOMIAL,
) -> BenchmarkReport:
    """Compute all rational-agent benchmarks on shared Monte Carlo trials.

    ``observed_allocations`` (one entry per observed block) enables the
    same-allocation benchmark. When ``observed_measurements`` is also given
    (aligned with the allocations), the same-allocation benchmark conditions
    on those actual noisy measurements instead of simulating fresh ones.
    """
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    compiled = _compile(dgm)
    n_queries = len(compiled.queries)
    total = compiled.total_remeasures

    bank = _build_bank(compiled, trials, seed)
    tables = _loglik_tables(compiled, bank)

    lower = _mean_stderr(
        _fixed_report_payoffs(dgm, compiled, lower_bound_report(dgm.questions, compiled.dataset_size), bank)
    )
    prior_reports = r_prior_report(dgm, seed=seed)
    prior_value = _mean_stderr(_fixed_report_payoffs(dgm, compiled, prior_reports, bank))
    zero = _mean_stderr(_alloc_payoffs(dgm, compiled, tables, bank, (0,) * n_queries))
    rand = _mean_stderr(_rand_allocation_payoffs(dgm, compiled, tables, bank, rand_mode))

    best_alloc = (0,) * n_queries
    best_payoffs = None
    for candidate in compositions(total, n_queries):
        payoffs = _alloc_payoffs(dgm, compiled, tables, bank, candidate)
        if best_payoffs is None or payoffs.mean() > best_payoffs.mean():
            best_payoffs = payoffs
            best_alloc = candidate
    ex_ante = _mean_stderr(best_payoffs)

    upper = _mean_stderr(
        _alloc_payoffs(dgm, compiled, tables, bank, (total,) * n_queries)
    )

    same = None
    if observed_allocations is not None:
        checked = [_check_allocation(a, compiled) for a in observed_allocations]
        if observed_measurements is not None:
            if len(observed_measurements) != len(checked):
                raise ConfigError("observed measurements must align with observed allocations")
            block_payoffs = []
            for block in observed_measurements:
                post = posterior(dgm, block)
                reports = [optimal_report(post, dgm, qi) for qi in range(len(dgm.questions))]
                expected = 0.0
                for vi in range(len(dgm.versions)):
                    block_value = 0.0
                    for qi, (question, report) in enumerate(zip(dgm.questions, reports)):
                        if question.kind == "binary":
                            truth = float(compiled.answer_yes[qi, vi])
                            score = (report.p_yes - truth) ** 2 + ((1 - report.p_yes) - (1 - truth)) ** 2
                        else:
                            score = float(
                                _interval_scores(report.lower, report.upper, compiled.answer_values[qi, vi])
                            )
                        block_value += float(
                            _payoff_from_scores(np.asarray(score), question.constant, dgm.per_question_max)
                        )
                    expected += post[vi] * block_value
                block_payoffs.append(expected)
            values = np.asarray(block_payoffs)
            same = BenchmarkValue(
                float(values.mean()),
                float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0,
            )
        else:
            per_trial = np.zeros(trials)
            for alloc in checked:
                per_trial += _alloc_payoffs(dgm, compiled, tables, bank, alloc)
            per_trial /= len(checked)
            same = _mean_stderr(per_trial)

    return BenchmarkReport(
        lower_bound=lower,
        r_prior=prior_value,
        r_posterior_zero=zero,
        r_posterior_rand=rand,
        r_posterior_ex_ante=ex_ante,
        upper_bound=upper,
        r_posterior_same=same,
        ex_ante_allocation=best_alloc,
        trials=trials,
        seed=seed,
        rand_mode=rand_mode,
    )


def losses(observed_payoff: float, report: BenchmarkReport) -> LossReport:
    """Decompose the shortfall from the upper bound into reporting loss and
    allocation loss, on the scale of the total possible payoff increase."""
    if report.r_posterior_same is None:
        raise ConfigError("loss decomposition needs the same-allocation benchmark")
    upper = report.upper_bound.dollars
    lower = report.lower_bound.dollars
    span = upper - lower
    if span <= 0:
        raise ConfigError("degenerate benchmarks: upper bound does not exceed lower bound")
    same = report.r_posterior_same.dollars
    zero_span = upper - report.r_posterior_zero.dollars
    rand_span = upper - report.r_posterior_rand.dollars
    return LossReport(
        observed_payoff=observed_payoff,
        total_loss=(upper - observed_payoff) / span,
        reporting_loss=(same - observed_payoff) / span,
        allocation_loss_overall=(upper - same) / span,
        allocation_loss_separated=(upper - same) / zero_span if zero_span > 0 else 0.0,
        allocation_loss_separated_full_budget=(upper - same) / rand_span if rand_span > 0 else 0.0,
    )


# -- paradigm comparison ------------------------------------------------------


@dataclass(frozen=True)
class ParadigmPoint:
    """Expected single-cell RMSE when an initial epsilon x is followed up
    with k times x, either wasted (fresh re-measure) or fused (remeasure)."""

    initial_eps: float
    multiple: float
    fresh_rmse_analytic: float
    fresh_rmse_monte_carlo: float
    fused_rmse_analytic: float
    fused_rmse_monte_carlo: float

    @property
    def ratio_analytic(self) -> float:
        return self.fused_rmse_analytic / self.fresh_rmse_analytic

    def to_dict(self) -> dict:
        return {
            "initialEps": self.initial_eps,
            "k": self.multiple,
            "rmseMoAnalytic": self.fresh_rmse_analytic,
            "rmseMoMonteCarlo": self.fresh_rmse_monte_carlo,
            "rmseMorAnalytic": self.fused_rmse_analytic,
            "rmseMorMonteCarlo": self.fused_rmse_monte_carlo,
            "ratioAnalytic": self.ratio_analytic,
        }


def compare_paradigms(
    initial_eps_values: Sequence[float],
    followup_multiples: Sequence[float],
    trials: int = 100_000,
    seed: int = 0,
) -> list[ParadigmPoint]:
    """Fresh-measurement vs fused-remeasurement error for a single cell.

    Both spend x + kx of budget in total. The fresh path answers with only
    the kx measurement (initial x wasted): rmse = sqrt(2)/(kx). The fused
    path inverse-variance-weights both: rmse = sqrt(2/(x^2 + (kx)^2)). The
    Monte Carlo columns share noise draws between the paradigms.
    """
    if any(x <= 0 for x in initial_eps_values) or any(k <= 0 for k in followup_multiples):
        raise ConfigError("epsilons and multiples must be positive")
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    points = []
    for i, x in enumerate(initial_eps_values):
        for j, k in enumerate(followup_multiples):
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, i, j))))
            u0 = rng.random(trials) - 0.5
            z0 = -np.sign(u0) * np.log1p(-2.0 * np.abs(u0))
            u1 = rng.random(trials) - 0.5
            z1 = -np.sign(u1) * np.log1p(-2.0 * np.abs(u1))
            b0 = 1.0 / x
            b1 = 1.0 / (k * x)
            fresh_err = b1 * z1
            w0, w1 = x**2, (k * x) ** 2
            fused_err = (w0 * b0 * z0 + w1 * b1 * z1) / (w0 + w1)
            points.append(
                ParadigmPoint(
                    initial_eps=float(x),
                    multiple=float(k),
                    fresh_rmse_analytic=math.sqrt(2.0) / (k * x),
                    fresh_rmse_monte_carlo=float(np.sqrt(np.mean(fresh_err**2))),
                    fused_rmse_analytic=math.sqrt(2.0 / (x**2 + (k * x) ** 2)),
                    fused_rmse_monte_carlo=float(np.sqrt(np.mean(fused_err**2))),
                )
            )
    return points


# -- DGM configuration --------------------------------------------------------


def dgm_from_config(config: dict) -> DGM:
    """Build a DGM from its JSON description (schema, versions, questions)."""
    try:
        schema = Schema.from_config(config["schema"])
        versions = [
            Dataset(schema=schema, records=np.asarray(v["records"], dtype=np.int64))
            for v in config["versions"]
        ]
        questions = []
        for q in config["questions"]:
            domain = QueryDomain(tuple(schema.attribute(name) for name in q["attributes"]))
            weights = selection_weights(domain, q.get("select", {}))
            questions.append(
                Question(
                    qid=str(q["id"]),
                    kind=q["kind"],
                    functional=LinearQuery(domain, weights),
                    value_style=q.get("valueStyle", "single-value"),
                    threshold=q.get("threshold"),
                    direction=q.get("direction"),
                    constant=float(q.get("constant", 1.0)),
                )
            )
        session = SessionConfig.from_dict(config.get("session", {}))
        prior = np.asarray(config["prior"], dtype=float) if "prior" in config else None
        return DGM(
            versions=versions,
            questions=questions,
            config=session,
            prior=prior,
            per_question_max=float(config.get("perQuestionMax", DEFAULT_QUESTION_MAX)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad DGM config: {exc}") from None


def load_dgm(path) -> DGM:
    with open(path, "r", encoding="utf-8") as handle:
        return dgm_from_config(json.load(handle))
