"""Operator entry points.

Subcommands: ingest a CSV into the dataset registry, serve the HTTP API,
run the rational-agent benchmarks, reproduce the fresh-vs-fused paradigm
error comparison, and score report files. Every run with identical flags
and seed produces identical output bytes. Exit codes: 0 success, 1
invariant violation, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import agent
from .domain import Schema, ingest as ingest_csv
from .errors import ConfigError, EngineError
from .registry import DatasetRegistry
from .scoring import (
    BinaryReport,
    IntervalReport,
    PayoffConfig,
    score_question,
)
from .session import SessionConfig


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c, "") for c in columns})


def _emit_rows(rows: list[dict], columns: list[str], out: str | None, fmt: str) -> None:
    if out is None:
        if fmt == "csv":
            writer = csv.DictWriter(sys.stdout, fieldnames=columns)
            writer.writeheader()
            for row in rows:
                writer.writerow({c: row.get(c, "") for c in columns})
        else:
            json.dump(rows, sys.stdout, indent=2)
            sys.stdout.write("\n")
        return
    path = Path(out)
    if fmt == "csv":
        _write_csv(path, rows, columns)
    else:
        _write_json(path, rows)


# -- subcommands ---------------------------------------------------------------


def _cmd_ingest(args) -> int:
    with open(args.schema, "r", encoding="utf-8") as handle:
        schema = Schema.from_config(json.load(handle))
    dataset = ingest_csv(args.csv, schema)
    registry = DatasetRegistry(args.registry)
    content_hash = registry.register(args.id, dataset)
    _log(f"registered {args.id!r}: {dataset.size} records, hash {content_hash[:12]}")
    print(content_hash)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    registry = DatasetRegistry(args.registry)
    config = SessionConfig(
        total_remeasures=args.total_remeasures,
        epsilon_per_remeasure=args.epsilon_per_remeasure,
        initial_epsilon_per_query=args.initial_epsilon,
        seed=args.seed,
    )
    app = create_app(registry, config)
    _log(f"serving datasets {registry.ids()} on {args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _read_allocations(path, dgm: agent.DGM) -> tuple[list[tuple[int, ...]], list[float]]:
    """Observed-allocation CSV {blockId, queryId, remeasures[, payoff]}."""
    question_ids = [q.qid for q in dgm.questions]
    blocks: dict[str, dict[str, int]] = {}
    payoffs: dict[str, float] = {}
    order: list[str] = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            block_id = row["blockId"]
            if row["queryId"] not in question_ids:
                raise ConfigError(
                    f"allocations block {block_id!r}: unknown query {row['queryId']!r}"
                )
            if block_id not in blocks:
                blocks[block_id] = {}
                order.append(block_id)
            blocks[block_id][row["queryId"]] = int(row["remeasures"])
            if row.get("payoff"):
                payoffs[block_id] = float(row["payoff"])
    allocations = []
    for block_id in order:
        allocations.append(tuple(blocks[block_id].get(qid, 0) for qid in question_ids))
    observed = [payoffs[b] for b in order if b in payoffs]
    return allocations, observed


def _cmd_agent_benchmark(args) -> int:
    dgm = agent.load_dgm(args.dgm)
    observed_allocations = None
    observed_payoffs: list[float] = []
    if args.allocations:
        observed_allocations, observed_payoffs = _read_allocations(args.allocations, dgm)
    report = agent.benchmarks(
        dgm,
        trials=args.trials,
        seed=args.seed,
        observed_allocations=observed_allocations,
        rand_mode=args.rand_mode,
    )

    rows = [
        {"benchmark": name, "dollars": round(v.dollars, 6), "stdErr": round(v.std_err, 6)}
        for name, v in report.entries()
    ]
    out_dir = Path(args.out) if args.out else Path(".")
    _write_json(out_dir / "benchmarks.json", report.to_dict())
    _write_csv(out_dir / "benchmarks.csv", rows, ["benchmark", "dollars", "stdErr"])
    for row in rows:
        _log(f"{row['benchmark']:>22}: ${row['dollars']:.3f} +- {row['stdErr']:.3f}")

    if observed_payoffs and report.r_posterior_same is not None:
        mean_payoff = sum(observed_payoffs) / len(observed_payoffs)
        loss = agent.losses(mean_payoff, report)
        _write_json(out_dir / "losses.json", loss.to_dict())
        _log(f"losses written for observed payoff ${mean_payoff:.3f}")

    violations = report.ordering_violations()
    if violations:
        for violation in violations:
            _log(f"ordering violation: {violation}")
        return 1
    return 0


def _cmd_compare_paradigms(args) -> int:
    eps_values = [float(x) for x in args.initial_eps.split(",")]
    multiples = [float(k) for k in args.k_list.split(",")]
    points = agent.compare_paradigms(eps_values, multiples, trials=args.trials, seed=args.seed)
    rows = [{k: round(v, 6) for k, v in p.to_dict().items()} for p in points]
    columns = [
        "initialEps",
        "k",
        "rmseMoAnalytic",
        "rmseMoMonteCarlo",
        "rmseMorAnalytic",
        "rmseMorMonteCarlo",
        "ratioAnalytic",
    ]
    _emit_rows(rows, columns, args.out, args.format)
    worse = [p for p in points if p.fused_rmse_analytic >= p.fresh_rmse_analytic]
    if worse:
        _log("invariant violation: fused error not below fresh error")
        return 1
    return 0


def _parse_report(row: dict):
    if "pYes" in row and row["pYes"] is not None:
        return BinaryReport(p_yes=float(row["pYes"]))
    return IntervalReport(lower=float(row["lower"]), upper=float(row["upper"]))


def _cmd_score(args) -> int:
    with open(args.config, "r", encoding="utf-8") as handle:
        config = PayoffConfig.from_config(json.load(handle))
    with open(args.reports, "r", encoding="utf-8") as handle:
        report_rows = json.load(handle)
    with open(args.truths, "r", encoding="utf-8") as handle:
        truth_rows = json.load(handle)

    scoring_by_id = {q.qid: q for q in config.questions}
    truths = {(r.get("blockId", "block-1"), r["questionId"]): r["truth"] for r in truth_rows}

    mismatches = []
    results = []
    block_totals: dict[str, float] = {}
    for row in report_rows:
        block_id = row.get("blockId", "block-1")
        question_id = row["questionId"]
        scoring = scoring_by_id.get(question_id)
        if scoring is None:
            mismatches.append(f"block {block_id}: unknown question {question_id!r}")
            continue
        key = (block_id, question_id)
        if key not in truths:
            mismatches.append(f"block {block_id}: no truth for question {question_id!r}")
            continue
        try:
            report = _parse_report(row)
            truth = truths[key]
            if scoring.kind == "binary" and isinstance(truth, str):
                truth = truth.lower() in ("yes", "true", "1")
            payoff = score_question(report, truth, scoring, config.per_question_max)
        except (EngineError, KeyError, ValueError) as exc:
            mismatches.append(f"block {block_id}, question {question_id}: {exc}")
            continue
        results.append({"blockId": block_id, "questionId": question_id, "dollars": round(payoff, 6)})
        block_totals[block_id] = block_totals.get(block_id, 0.0) + payoff

    for block_id in sorted(block_totals):
        results.append({"blockId": block_id, "questionId": "TOTAL", "dollars": round(block_totals[block_id], 6)})
    _emit_rows(results, ["blockId", "questionId", "dollars"], args.out, args.format)

    if mismatches:
        for m in mismatches:
            _log(f"score error: {m}")
        return 2
    return 0


# -- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="remeasure", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="register a CSV dataset")
    p_ingest.add_argument("--csv", required=True)
    p_ingest.add_argument("--schema", required=True, help="schema config JSON")
    p_ingest.add_argument("--registry", required=True)
    p_ingest.add_argument("--id", required=True, help="dataset id")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_serve = sub.add_parser("serve", help="serve the session API")
    p_serve.add_argument("--registry", default=os.environ.get("REMEASURE_REGISTRY", "registry"))
    p_serve.add_argument("--host", default=os.environ.get("REMEASURE_HOST", "127.0.0.1"))
    p_serve.add_argument("--port", type=int, default=int(os.environ.get("REMEASURE_PORT", "8000")))
    p_serve.add_argument("--total-remeasures", type=int, default=6)
    p_serve.add_argument("--epsilon-per-remeasure", type=float, default=0.3)
    p_serve.add_argument("--initial-epsilon", type=float, default=0.3)
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.set_defaults(func=_cmd_serve)

    p_bench = sub.add_parser("agent-benchmark", help="run rational-agent benchmarks")
    p_bench.add_argument("--dgm", required=True, help="DGM config JSON")
    p_bench.add_argument("--trials", type=int, default=10_000)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--allocations", help="observed allocations CSV")
    p_bench.add_argument("--rand-mode", choices=[agent.RAND_MULTINOMIAL, agent.RAND_COMPOSITIONS],
                         default=agent.RAND_MULTINOMIAL)
    p_bench.add_argument("--out", help="output directory", default=None)
    p_bench.set_defaults(func=_cmd_agent_benchmark)

    p_compare = sub.add_parser("compare-paradigms", help="fresh vs fused error tables")
    p_compare.add_argument("--initial-eps", default="0.1,0.3,0.5")
    p_compare.add_argument("--k-list", default="2,3,4,5")
    p_compare.add_argument("--trials", type=int, default=100_000)
    p_compare.add_argument("--seed", type=int, default=0)
    p_compare.add_argument("--out", default=None)
    p_compare.add_argument("--format", choices=["json", "csv"], default="json")
    p_compare.set_defaults(func=_cmd_compare_paradigms)

    p_score = sub.add_parser("score", help="score report files into payoffs")
    p_score.add_argument("--reports", required=True)
    p_score.add_argument("--truths", required=True)
    p_score.add_argument("--config", required=True, help="scoring config JSON")
    p_score.add_argument("--out", default=None)
    p_score.add_argument("--format", choices=["json", "csv"], default="json")
    p_score.set_defaults(func=_cmd_score)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        _log(f"error ({exc.code}): {exc}")
        return 2
    except FileNotFoundError as exc:
        _log(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
