"""The measure/observe/remeasure session state machine.

A session owns the private dataset reference, a cache of every DP
measurement taken per query, the fused estimates derived from that cache,
and the remeasure budget ledger. The budget is denominated in remeasure
clicks with a fixed epsilon per click; initial per-query measurements spend
their own epsilon and never draw from the click budget. Epsilon composes
sequentially (plain summation) across queries and remeasures.

Measurement seeds derive from (master seed, running seed index), and every
operation is appended to an event log, so a session replays bit-for-bit
from its seed plus the log. True counts never leave the session: the
external view carries only noisy estimates and error values.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field

from .domain import Dataset, DataVector, QueryDomain, vectorize
from .errors import BudgetExhaustedError, ConfigError, UnknownQueryError
from .inference import EstimateSet, fuse
from .mechanism import IDENTITY, Strategy, build_strategy, measure


@dataclass(frozen=True)
class SessionConfig:
    total_remeasures: int = 6
    epsilon_per_remeasure: float = 0.3
    initial_epsilon_per_query: float = 0.3
    seed: int = 0
    strategy_family: str = IDENTITY

    def __post_init__(self):
        if self.total_remeasures < 0:
            raise ConfigError("total remeasures must be non-negative")
        if not self.epsilon_per_remeasure > 0:
            raise ConfigError("epsilon per remeasure must be positive")
        if not self.initial_epsilon_per_query > 0:
            raise ConfigError("initial epsilon per query must be positive")

    def to_dict(self) -> dict:
        return {
            "totalRemeasures": self.total_remeasures,
            "epsilonPerRemeasure": self.epsilon_per_remeasure,
            "initialEpsilonPerQuery": self.initial_epsilon_per_query,
            "seed": self.seed,
            "strategyFamily": self.strategy_family,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        try:
            return cls(
                total_remeasures=int(data.get("totalRemeasures", 6)),
                epsilon_per_remeasure=float(data.get("epsilonPerRemeasure", 0.3)),
                initial_epsilon_per_query=float(data.get("initialEpsilonPerQuery", 0.3)),
                seed=int(data.get("seed", 0)),
                strategy_family=str(data.get("strategyFamily", IDENTITY)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad session config: {exc}") from None


@dataclass
class BudgetLedger:
    """Remeasure-click budget plus cumulative epsilon accounting."""

    total_remeasures: int
    epsilon_per_remeasure: float
    initial_epsilon_per_query: float
    spent_remeasures: dict[str, int] = field(default_factory=dict)
    query_count: int = 0

    @property
    def used(self) -> int:
        return sum(self.spent_remeasures.values())

    @property
    def remaining(self) -> int:
        return self.total_remeasures - self.used

    @property
    def total_epsilon_spent(self) -> float:
        return self.query_count * self.initial_epsilon_per_query + self.used * self.epsilon_per_remeasure

    def record_query(self, query_id: str) -> None:
        self.spent_remeasures[query_id] = 0
        self.query_count += 1

    def charge_remeasure(self, query_id: str) -> None:
        if self.used >= self.total_remeasures:
            raise BudgetExhaustedError(
                f"remeasure budget exhausted ({self.used}/{self.total_remeasures})"
            )
        self.spent_remeasures[query_id] += 1

    def snapshot(self) -> dict:
        return {
            "used": self.used,
            "total": self.total_remeasures,
            "perQuery": dict(self.spent_remeasures),
            "totalEpsilonSpent": self.total_epsilon_spent,
            "epsilonPerRemeasure": self.epsilon_per_remeasure,
            "initialEpsilonPerQuery": self.initial_epsilon_per_query,
        }


@dataclass(eq=False)
class QueryState:
    query_id: str
    attributes: tuple[str, ...]
    filter_bins: dict[str, list[str]] | None
    domain: QueryDomain
    true_counts: DataVector  # private; never serialized
    strategy: Strategy
    cache: list = field(default_factory=list)
    estimates: EstimateSet | None = None


class Session:
    """One analyst session over one dataset.

    Mutations (add_query, remeasure) are serialized by a lock; reads take
    the same lock briefly so views are consistent snapshots.
    """

    def __init__(self, dataset: Dataset, config: SessionConfig | None = None):
        self.dataset = dataset
        self.config = config or SessionConfig()
        self.ledger = BudgetLedger(
            total_remeasures=self.config.total_remeasures,
            epsilon_per_remeasure=self.config.epsilon_per_remeasure,
            initial_epsilon_per_query=self.config.initial_epsilon_per_query,
        )
        self._queries: dict[str, QueryState] = {}
        self._order: list[str] = []
        self._seed_index = 0
        self._events: list[dict] = []
        self._lock = threading.Lock()
        self._log_event("create-session", epsilon=0.0, args={"config": self.config.to_dict()})

    # -- internal helpers -------------------------------------------------

    def _log_event(self, op: str, query_id: str | None = None, epsilon: float = 0.0,
                   seed_index: int | None = None, args: dict | None = None) -> None:
        event = {"ts": time.time(), "op": op, "epsilon": epsilon}
        if query_id is not None:
            event["queryId"] = query_id
        if seed_index is not None:
            event["seedIndex"] = seed_index
        if args:
            event["args"] = args
        self._events.append(event)

    def _next_seed(self) -> tuple[int, tuple[int, int]]:
        index = self._seed_index
        self._seed_index += 1
        return index, (self.config.seed, index)

    def _measure_into(self, state: QueryState, epsilon: float) -> int:
        index, seed = self._next_seed()
        m = measure(state.true_counts, state.strategy, epsilon, seed, index=len(state.cache))
        state.cache.append(m)
        state.estimates = fuse(state.cache, previous=state.estimates)
        return index

    # -- operations --------------------------------------------------------

    def add_query(self, attributes, filter_bins: dict[str, list[str]] | None = None) -> tuple[str, EstimateSet]:
        """Register a query and take its initial measurement."""
        with self._lock:
            domain = QueryDomain(tuple(self.dataset.schema.attribute(a) for a in attributes))
            counts = vectorize(self.dataset, domain, filter_bins)
            strategy = build_strategy(domain, self.config.strategy_family)
            query_id = f"q{len(self._order) + 1}"
            state = QueryState(
                query_id=query_id,
                attributes=tuple(attributes),
                filter_bins=filter_bins,
                domain=domain,
                true_counts=counts,
                strategy=strategy,
            )
            seed_index = self._measure_into(state, self.config.initial_epsilon_per_query)
            self._queries[query_id] = state
            self._order.append(query_id)
            self.ledger.record_query(query_id)
            self._log_event(
                "add-query",
                query_id=query_id,
                epsilon=self.config.initial_epsilon_per_query,
                seed_index=seed_index,
                args={"attributes": list(attributes), "filter": filter_bins},
            )
            return query_id, state.estimates

    def remeasure(self, query_id: str) -> EstimateSet:
        """Spend one remeasure click on a query and re-fuse its cache.

        Refuses with BudgetExhaustedError (no measurement, no spend) once the
        click budget is gone.
        """
        with self._lock:
            state = self._queries.get(query_id)
            if state is None:
                raise UnknownQueryError(f"unknown query {query_id!r}")
            self.ledger.charge_remeasure(query_id)  # raises before any measurement
            seed_index = self._measure_into(state, self.config.epsilon_per_remeasure)
            self._log_event(
                "remeasure",
                query_id=query_id,
                epsilon=self.config.epsilon_per_remeasure,
                seed_index=seed_index,
            )
            return state.estimates

    def budget_status(self) -> dict:
        with self._lock:
            return self.ledger.snapshot()

    def estimates(self, query_id: str) -> EstimateSet:
        with self._lock:
            state = self._queries.get(query_id)
            if state is None:
                raise UnknownQueryError(f"unknown query {query_id!r}")
            return state.estimates

    def query_ids(self) -> list[str]:
        with self._lock:
            return list(self._order)

    # -- external representation -------------------------------------------

    def view(self) -> dict:
        """JSON-safe snapshot carrying only noisy estimates; no true counts,
        raw records, or noise seeds."""
        with self._lock:
            queries = []
            for query_id in self._order:
                state = self._queries[query_id]
                est = state.estimates
                entry = {
                    "queryId": query_id,
                    "attributes": list(state.attributes),
                    "filter": state.filter_bins,
                    "remeasuresUsed": self.ledger.spent_remeasures[query_id],
                    "bins": {a.name: list(a.bins) for a in state.domain.attributes},
                    "binEstimates": {k: v.tolist() for k, v in est.bin_estimates.items()},
                    "binRmse": {k: v.tolist() for k, v in est.bin_rmse.items()},
                    "previousBinEstimates": None
                    if est.previous_bin_estimates is None
                    else {k: v.tolist() for k, v in est.previous_bin_estimates.items()},
                    "previousBinRmse": None
                    if est.previous_bin_rmse is None
                    else {k: v.tolist() for k, v in est.previous_bin_rmse.items()},
                    "cellEstimates": est.cell_estimates.tolist(),
                    "cellCovariance": est.covariance.tolist(),
                }
                queries.append(entry)
            return {"budget": self.ledger.snapshot(), "queries": queries}

    def events(self) -> list[dict]:
        with self._lock:
            return [dict(e) for e in self._events]

    # -- replay --------------------------------------------------------------

    @classmethod
    def replay(cls, dataset: Dataset, events: list[dict]) -> "Session":
        """Rebuild a session bit-for-bit from its event log."""
        if not events or events[0]["op"] != "create-session":
            raise ConfigError("event log must start with create-session")
        config = SessionConfig.from_dict(events[0]["args"]["config"])
        session = cls(dataset, config)
        for event in events[1:]:
            if event["op"] == "add-query":
                args = event["args"]
                session.add_query(args["attributes"], args.get("filter"))
            elif event["op"] == "remeasure":
                session.remeasure(event["queryId"])
            else:
                raise ConfigError(f"unknown event op {event['op']!r}")
        return session


def write_event_log(path, events: list[dict]) -> None:
    """One JSON object per line, in operation order."""
    with open(path, "w", encoding="utf-8") as handle:
        for event in events:
            handle.write(json.dumps(event) + "\n")


def read_event_log(path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]
