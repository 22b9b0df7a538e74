import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from remeasure.errors import ConfigError, KindMismatchError
from remeasure.scoring import (
    BINARY_CONSTANT,
    BinaryReport,
    IntervalReport,
    PayoffConfig,
    QuestionScoring,
    brier_score,
    interval_score,
    normalize_to_payoff,
    score_block,
)


class TestIntervalScore:
    def test_covered_interval_scores_width(self):
        assert interval_score(IntervalReport(10, 20), 15) == 10

    def test_overshoot_penalty(self):
        assert interval_score(IntervalReport(10, 20, alpha=0.05), 25) == pytest.approx(10 + 40 * 5)

    def test_undershoot_penalty_is_symmetric(self):
        assert interval_score(IntervalReport(10, 20, alpha=0.05), 5) == pytest.approx(210.0)

    def test_inverted_interval_rejected(self):
        with pytest.raises(ConfigError):
            IntervalReport(20, 10)

    @given(
        lower=st.floats(-100, 100),
        width=st.floats(0, 50),
        extra=st.floats(0.1, 40),
    )
    @settings(max_examples=200, deadline=None)
    def test_widening_a_covering_interval_worsens_score(self, lower, width, extra):
        truth = lower + width / 2
        narrow = IntervalReport(lower, lower + width)
        wide = IntervalReport(lower - extra, lower + width + extra)
        assert interval_score(wide, truth) > interval_score(narrow, truth)

    def test_quantile_interval_is_optimal(self):
        # brute force over candidate endpoint grids on random discrete beliefs
        rng = np.random.default_rng(21)
        alpha = 0.05
        for _ in range(50):
            support = np.sort(rng.choice(np.arange(0, 300), size=rng.integers(3, 8), replace=False))
            probs = rng.dirichlet(np.ones(len(support)))
            cum = np.cumsum(probs)
            lower = support[int(np.argmax(cum >= alpha / 2 - 1e-12))]
            upper = support[int(np.argmax(cum >= 1 - alpha / 2 - 1e-12))]

            def expected(l, u):
                return sum(
                    p * interval_score(IntervalReport(l, u, alpha), x)
                    for p, x in zip(probs, support)
                )

            best = expected(lower, upper)
            candidates = np.unique(np.concatenate([support, support - 0.5, support + 0.5]))
            for l in candidates:
                for u in candidates:
                    if l <= u:
                        assert best <= expected(l, u) + 1e-9


class TestBrierScore:
    def test_perfect_yes(self):
        assert brier_score(BinaryReport(1.0), True) == 0.0

    def test_worst_case_matches_binary_constant(self):
        assert brier_score(BinaryReport(0.0), True) == BINARY_CONSTANT

    def test_hedged_report(self):
        assert brier_score(BinaryReport(0.5), True) == pytest.approx(0.5)
        assert brier_score(BinaryReport(0.5), False) == pytest.approx(0.5)

    def test_equals_two_times_squared_error(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            p = float(rng.random())
            truth = bool(rng.integers(2))
            assert brier_score(BinaryReport(p), truth) == pytest.approx(
                2 * (p - (1.0 if truth else 0.0)) ** 2
            )

    def test_probability_bounds(self):
        with pytest.raises(ConfigError):
            BinaryReport(1.2)

    def test_truthful_report_minimizes_expected_score(self):
        # analytic quadratic optimum verified on a 101-point grid
        grid = np.linspace(0, 1, 101)
        for belief in (0.0, 0.17, 0.5, 0.83, 1.0):
            def expected(p):
                return belief * brier_score(BinaryReport(p), True) + (1 - belief) * brier_score(
                    BinaryReport(p), False
                )

            best = expected(belief)
            assert all(best <= expected(p) + 1e-12 for p in grid)


class TestNormalizeToPayoff:
    def test_binary_constant_pays_max_at_zero_score(self):
        assert normalize_to_payoff(0.0, BINARY_CONSTANT) == pytest.approx(2.50)

    def test_large_interval_score_clamps_to_zero(self):
        # constant 75.00 with score 210 normalizes negative, clamped to $0
        assert normalize_to_payoff(210.0, 75.00) == 0.0

    def test_half_constant_half_pay(self):
        assert normalize_to_payoff(1.0, 2.0) == pytest.approx(1.25)

    @given(score=st.floats(0, 1000), constant=st.floats(0.1, 500))
    @settings(max_examples=200, deadline=None)
    def test_payoff_bounds(self, score, constant):
        payoff = normalize_to_payoff(score, constant)
        assert 0.0 <= payoff <= 2.50


def _block_config():
    return PayoffConfig(
        questions=(
            QuestionScoring("q1", "quantitative", 75.00),
            QuestionScoring("q2", "binary", 2.00),
            QuestionScoring("q3", "quantitative", 217.69),
            QuestionScoring("q4", "quantitative", 56.8),
        )
    )


class TestScoreBlock:
    def test_four_perfect_answers_pay_ten(self):
        reports = [
            IntervalReport(100, 100),
            BinaryReport(1.0),
            IntervalReport(40, 40),
            IntervalReport(7, 7),
        ]
        truths = [100, True, 40, 7]
        block = score_block(reports, truths, _block_config())
        assert block.total == pytest.approx(10.0)

    def test_all_worst_answers_pay_zero(self):
        reports = [
            IntervalReport(0, 0),
            BinaryReport(0.0),
            IntervalReport(0, 0),
            IntervalReport(0, 0),
        ]
        truths = [10_000, True, 10_000, 10_000]
        block = score_block(reports, truths, _block_config())
        assert block.total == 0.0

    def test_mixed_block_sums_per_question(self):
        reports = [
            IntervalReport(90, 110),
            BinaryReport(0.5),
            IntervalReport(40, 40),
            IntervalReport(0, 0),
        ]
        truths = [100, True, 40, 10_000]
        block = score_block(reports, truths, _block_config())
        assert block.total == pytest.approx(sum(block.per_question.values()))
        assert block.per_question["q1"] == pytest.approx((75.0 - 20.0) / 75.0 * 2.5)
        assert block.per_question["q2"] == pytest.approx((2.0 - 0.5) / 2.0 * 2.5)
        assert block.per_question["q3"] == pytest.approx(2.5)
        assert block.per_question["q4"] == 0.0

    def test_kind_mismatch_rejected(self):
        reports = [BinaryReport(1.0)] * 4
        truths = [1, True, 1, 1]
        with pytest.raises(KindMismatchError):
            score_block(reports, truths, _block_config())

    def test_length_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            score_block([IntervalReport(0, 1)], [1, 2], _block_config())

    def test_config_round_trip(self):
        config = PayoffConfig.from_config(
            {
                "questions": [
                    {"id": "q1", "kind": "quantitative", "constant": 75.0},
                    {"id": "q2", "kind": "binary", "constant": 2.0},
                ],
                "perQuestionMax": 2.5,
            }
        )
        assert config.questions[0].constant == 75.0
        assert config.per_question_max == 2.5
