"""Proper scoring rules and their normalization to dollar payoffs.

Quantitative answers are elicited as central intervals and scored with the
interval score (lower is better):

    S(l, u; x) = (u - l) + (2/a)(l - x) 1{x < l} + (2/a)(x - u) 1{x > u}

which is minimized in expectation by reporting the a/2 and 1-a/2 quantiles
of one's belief. Binary answers are probabilities scored with the quadratic
(Brier) rule over both outcomes, S(p; yes) = 2 (p - 1{yes})^2, ranging 0..2.

Scores normalize to payoffs via (c - score)/c against a per-question
constant c, clamped to [0, 1], times the per-question maximum (default
$2.50, so a four-question block tops out at $10).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError, KindMismatchError

DEFAULT_ALPHA = 0.05
DEFAULT_QUESTION_MAX = 2.50
BINARY_CONSTANT = 2.0


@dataclass(frozen=True)
class IntervalReport:
    """A central interval [lower, upper] at miscoverage level alpha."""

    lower: float
    upper: float
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if self.lower > self.upper:
            raise ConfigError("interval lower bound exceeds upper bound")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must be in (0, 1)")


@dataclass(frozen=True)
class BinaryReport:
    """Probability assigned to 'yes'; the 'no' probability is implied."""

    p_yes: float

    def __post_init__(self):
        if not 0.0 <= self.p_yes <= 1.0:
            raise ConfigError("p_yes must be within [0, 1]")


@dataclass(frozen=True)
class QuestionScoring:
    qid: str
    kind: str  # "quantitative" | "binary"
    constant: float

    def __post_init__(self):
        if self.kind not in ("quantitative", "binary"):
            raise ConfigError(f"unknown question kind {self.kind!r}")
        if not self.constant > 0:
            raise ConfigError("normalization constant must be positive")


@dataclass(frozen=True)
class PayoffConfig:
    questions: tuple[QuestionScoring, ...]
    per_question_max: float = DEFAULT_QUESTION_MAX

    def __post_init__(self):
        if not self.per_question_max > 0:
            raise ConfigError("per-question maximum must be positive")

    @classmethod
    def from_config(cls, config: dict) -> "PayoffConfig":
        try:
            questions = tuple(
                QuestionScoring(qid=str(q["id"]), kind=q["kind"], constant=float(q["constant"]))
                for q in config["questions"]
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad scoring config: {exc}") from None
        return cls(questions=questions, per_question_max=float(config.get("perQuestionMax", DEFAULT_QUESTION_MAX)))


def interval_score(report: IntervalReport, truth: float) -> float:
    """Interval score: width plus 2/alpha-weighted distance when uncovered."""
    score = report.upper - report.lower
    if truth < report.lower:
        score += (2.0 / report.alpha) * (report.lower - truth)
    elif truth > report.upper:
        score += (2.0 / report.alpha) * (truth - report.upper)
    return score


def brier_score(report: BinaryReport, truth_yes: bool) -> float:
    """Quadratic score over both outcomes, in [0, 2]."""
    target = 1.0 if truth_yes else 0.0
    return (report.p_yes - target) ** 2 + ((1.0 - report.p_yes) - (1.0 - target)) ** 2


def normalize_to_payoff(score: float, constant: float, per_question_max: float = DEFAULT_QUESTION_MAX) -> float:
    """Map a raw score to dollars: clamp((c - score)/c, 0, 1) * max."""
    if not constant > 0:
        raise ConfigError("normalization constant must be positive")
    normalized = (constant - score) / constant
    return min(max(normalized, 0.0), 1.0) * per_question_max


@dataclass(frozen=True)
class BlockScore:
    per_question: dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return sum(self.per_question.values())


def score_question(report, truth, scoring: QuestionScoring, per_question_max: float = DEFAULT_QUESTION_MAX) -> float:
    """Dollars earned on one question; report kind must match the question."""
    if scoring.kind == "quantitative":
        if not isinstance(report, IntervalReport):
            raise KindMismatchError(f"question {scoring.qid!r} expects an interval report")
        raw = interval_score(report, float(truth))
    else:
        if not isinstance(report, BinaryReport):
            raise KindMismatchError(f"question {scoring.qid!r} expects a binary report")
        raw = brier_score(report, bool(truth))
    return normalize_to_payoff(raw, scoring.constant, per_question_max)


def score_block(reports, truths, config: PayoffConfig) -> BlockScore:
    """Score one block of answers against ground truths.

    ``reports`` and ``truths`` are sequences aligned with config.questions.
    """
    if not (len(reports) == len(truths) == len(config.questions)):
        raise ConfigError("reports, truths, and question config lengths differ")
    per_question = {}
    for report, truth, scoring in zip(reports, truths, config.questions):
        per_question[scoring.qid] = score_question(report, truth, scoring, config.per_question_max)
    return BlockScore(per_question=per_question)
