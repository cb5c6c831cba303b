import math

import numpy as np
import pytest

from stvsim import (
    BallotError,
    Candidate,
    ElectionFile,
    ElectionMeta,
    FormalityRules,
    Group,
    MarkSheet,
    SimConfig,
    SimError,
    UniformDigitModel,
    formality_rate_report,
    partition_by_preference,
    preference_position_histogram,
    run_sweep,
    truncation_stats,
    write_report,
)
from stvsim.synth import marks_for_ranking, truncation_ladder_election


@pytest.fixture(scope="module")
def small_election():
    # 6 candidates over two groups; a mix of ATL and BTL ballots
    meta = ElectionMeta(
        "small", 1,
        (Group("A", "Alpha"), Group("B", "Beta")),
        (
            Candidate("a1", "", "A", 1), Candidate("a2", "", "A", 2), Candidate("a3", "", "A", 3),
            Candidate("b1", "", "B", 1), Candidate("b2", "", "B", 2), Candidate("b3", "", "B", 3),
        ),
    )
    sheets = (
        MarkSheet({"A": "1"}, {}, 300),
        MarkSheet({"B": "1", "A": "2"}, {}, 260),
        MarkSheet({}, marks_for_ranking(["b1", "b2", "b3", "a1", "a2", "a3"]), 200),
        MarkSheet({}, {"a1": "1"}, 40),  # informal at the default 6-pref rule
    )
    return ElectionFile(meta, sheets)


class TestRunSweep:
    def test_baseline_winner_has_frequency_one(self, small_election):
        config = SimConfig(base_seed=7, runs_per_point=5, model="digit", rates=())
        report = run_sweep(small_election, config)
        (point,) = report.points
        assert point.rate == 0.0
        assert point.no_result_runs == 0
        assert len(point.winner_sets) == 1
        ((winners, runs),) = point.winner_sets.items()
        assert runs == 5
        assert point.candidate_frequency(winners[0]) == 1.0

    def test_grid_shape(self, small_election):
        config = SimConfig(base_seed=7, runs_per_point=2, model="digit",
                           rates=(0.0, 1.0), btl_required_grid=(6, 1))
        report = run_sweep(small_election, config)
        assert len(report.points) == 4  # 2 rates x 2 variants
        assert [(p.rate, p.btl_required) for p in report.points] == [
            (0.0, 6), (1.0, 6), (0.0, 1), (1.0, 1)]

    def test_frequencies_sum_to_one(self, small_election):
        config = SimConfig(base_seed=3, runs_per_point=40, model="digit", rates=(0.3,))
        report = run_sweep(small_election, config)
        for p in report.points:
            total = sum(p.winner_set_frequencies.values()) + p.no_result_frequency
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_all_informal_runs_recorded_not_resampled(self, small_election):
        # truncation at rate 1 kills every ballot: every run is a no-result
        config = SimConfig(base_seed=1, runs_per_point=10, model="truncation", rates=(1.0,))
        report = run_sweep(small_election, config)
        point = report.point(1.0)
        assert point.no_result_runs == 10
        assert point.winner_sets == {}

    def test_reproducible_and_schedule_independent(self, small_election):
        config = dict(base_seed=11, runs_per_point=12, model="digit", rates=(0.02,))
        serial = run_sweep(small_election, SimConfig(**config, jobs=1))
        parallel = run_sweep(small_election, SimConfig(**config, jobs=3))
        import json

        assert json.dumps(serial.to_json_dict(), sort_keys=True) == json.dumps(
            parallel.to_json_dict(), sort_keys=True
        )
        for a, b in zip(serial.points, parallel.points):
            assert np.array_equal(a.formal_runs_per_ballot, b.formal_runs_per_ballot)
            assert np.array_equal(a.atl_formal_by_run, b.atl_formal_by_run)

    def test_atl_formality_dominates_btl(self, small_election):
        config = SimConfig(base_seed=5, runs_per_point=60, model="digit", rates=(0.01, 0.05))
        report = run_sweep(small_election, config)
        for rate in (0.01, 0.05):
            p = report.point(rate)
            diff = p.atl_formal_by_run / p.atl_ballots - p.btl_formal_by_run / p.btl_ballots
            sigma = diff.std(ddof=1) / math.sqrt(len(diff))
            assert diff.mean() > 3 * sigma

    def test_matched_rules_close_the_formality_gap(self, small_election):
        # with 1 required preference each way and single-digit ranks, the two
        # styles' single-preference ballots survive at the same rate
        meta = small_election.meta
        sheets = (MarkSheet({"A": "1"}, {}, 500), MarkSheet({}, {"b1": "1"}, 500))
        election = ElectionFile(meta, sheets)
        config = SimConfig(base_seed=9, runs_per_point=400, model="digit",
                           rates=(0.05,), btl_required_grid=(1,))
        p = run_sweep(election, config).point(0.05)
        diff = p.atl_formal_by_run / p.atl_ballots - p.btl_formal_by_run / p.btl_ballots
        sigma = max(diff.std(ddof=1) / math.sqrt(len(diff)), 1e-9)
        assert abs(diff.mean()) < 3 * sigma

    def test_bias_fixture_flips_at_two_percent(self):
        from stvsim.synth import formality_bias_election

        election = formality_bias_election()
        config = SimConfig(base_seed=18, runs_per_point=60, model="digit", rates=(0.02,))
        report = run_sweep(election, config)
        baseline_set = next(iter(report.point(0.0).winner_sets))
        flipped = report.point(0.02)
        changed = sum(
            runs for winners, runs in flipped.winner_sets.items() if winners != baseline_set
        )
        assert changed / flipped.runs > 0.95

    def test_confusion_family_uses_matrix_point(self, small_election):
        from stvsim import BUNDLED_CONFUSION_TABLE, load_confusion_table

        table = load_confusion_table(BUNDLED_CONFUSION_TABLE)
        config = SimConfig(base_seed=2, runs_per_point=3, model="confusion", confusion=table)
        report = run_sweep(small_election, config)
        assert len(report.points) == 2
        assert report.points[0].rate == 0.0
        assert report.points[1].rate == pytest.approx(table.mean_change_rate)

    def test_validation(self, small_election):
        with pytest.raises(SimError):
            SimConfig(base_seed=1, runs_per_point=0)
        with pytest.raises(SimError):
            SimConfig(base_seed=1, model="confusion")
        with pytest.raises(SimError):
            SimConfig(base_seed=1, rates=(1.5,))


class TestFormalityRateReport:
    def test_zero_rate_gives_rate_one(self, small_election):
        report = formality_rate_report(small_election, UniformDigitModel(0.0), 20, base_seed=4)
        formal = report.style_codes >= 0
        assert np.all(report.rates[formal] == 1.0)

    def test_single_digit_atl_matches_analytic(self):
        meta = ElectionMeta(
            "one", 1, (Group("A", ""), Group("B", "")),
            (Candidate("a1", "", "A", 1), Candidate("b1", "", "B", 1)),
        )
        election = ElectionFile(meta, (MarkSheet({"A": "1"}, {}, 4000),))
        eps = 0.1
        report = formality_rate_report(election, UniformDigitModel(eps), 50, base_seed=8)
        p = 1 - 0.9 * eps
        observed = report.rates[report.style_codes == 0]
        sigma = math.sqrt(p * (1 - p) / (50 * len(observed)))
        assert abs(observed.mean() - p) < 3 * sigma

    def test_six_pref_btl_bounded_by_enumeration(self, small_election):
        # every single-digit error breaks a 1..6 ranking, so the formality
        # rate sits between (1-0.9e)^6 and (1-0.9e)^6 plus the mass of
        # multi-error events
        from oracles import enumerate_single_digit_errors
        from stvsim import interpret_marks

        digits = "123456"
        formal_single_errors = 0
        for pos, repl, mutated in enumerate_single_digit_errors(digits):
            marks = {f"c{i+1}": mutated[i] for i in range(6)}
            ranking = interpret_marks({b: int(m) for b, m in marks.items()})
            if len(ranking) >= 6:
                formal_single_errors += 1
        assert formal_single_errors == 0

        eps = 0.02
        q = 1 - 0.9 * eps
        runs = 400
        report = formality_rate_report(small_election, UniformDigitModel(eps), runs, base_seed=13)
        btl = report.rates[report.style_codes == 1]
        lower = q**6
        upper = q**6 + (1 - q**6 - 6 * 0.9 * eps * q**5)  # + P(>= 2 effective errors)
        n = runs * len(btl)
        sigma = math.sqrt(lower * (1 - lower) / n)
        assert btl.mean() >= lower - 3 * sigma
        assert btl.mean() <= upper + 3 * sigma


class TestTruncationStats:
    def test_zero_rate_preserves_counts(self, small_election):
        stats = truncation_stats(small_election, UniformDigitModel(0.0), 5, base_seed=1)
        assert stats == {1: 1.0, 2: 2.0, 6: 6.0}

    def test_ten_pref_ballots_keep_almost_ten(self):
        election = truncation_ladder_election(long_ballots=1, short_ballots=1500)
        stats = truncation_stats(election, UniformDigitModel(0.01), 120, base_seed=6)
        assert abs(stats[10] - 10) <= 1.0  # "almost 10": within one preference

    def test_sixty_pref_ballots_lose_heavily(self):
        election = truncation_ladder_election(long_ballots=1500, short_ballots=1)
        stats = truncation_stats(election, UniformDigitModel(0.01), 120, base_seed=6)
        assert stats[60] < 45  # severe truncation, unlike the 10-pref bucket


class TestPartition:
    def test_partition_cells(self, small_election):
        table = partition_by_preference(small_election, "a1", "b1")
        # ATL: 300 prefer A(a1), 260 prefer B(b1); BTL: 200 prefer b1
        assert table.atl == (300, 260, 0)
        assert table.btl == (0, 200, 0)
        assert table.total == 760  # equals the number of formal ballots

    def test_neither_cell(self, small_election):
        meta = small_election.meta
        sheets = (MarkSheet({"A": "1"}, {}, 5),)
        election = ElectionFile(meta, sheets)
        table = partition_by_preference(election, "b1", "b2")  # same group: neither
        assert table.atl == (0, 0, 5)

    def test_distinct_candidates_required(self, small_election):
        with pytest.raises(BallotError):
            partition_by_preference(small_election, "a1", "a1")


class TestHistograms:
    def test_known_rank_multiset(self, small_election):
        meta = small_election.meta
        sheets = (
            MarkSheet({}, {"b1": "1"}, 1),
            MarkSheet({}, {"b1": "1", "b2": "2"}, 1),
            MarkSheet({}, {"b2": "1", "b1": "2"}, 1),
            MarkSheet({}, marks_for_ranking(["b3", "b2", "a1", "a2", "b1", "a3"]), 1),
        )
        election = ElectionFile(meta, sheets)
        rules = FormalityRules(btl_required_prefs=1)
        hist = preference_position_histogram(election, "b1", rules)
        assert hist["BTL"] == {1: 2, 2: 1, 5: 1}
        assert hist["ATL"] == {}

    def test_never_ranked_is_empty(self, small_election):
        meta = small_election.meta
        election = ElectionFile(meta, (MarkSheet({"A": "1"}, {}, 3),))
        hist = preference_position_histogram(election, "b1")
        assert hist == {"ATL": {}, "BTL": {}}

    def test_atl_uses_group_rank(self, small_election):
        hist = preference_position_histogram(small_election, "b2")
        assert hist["ATL"] == {1: 260}  # group B ranked first on 260 ballots
        assert hist["BTL"] == {2: 200}


class TestReportSerialisation:
    def test_write_report_is_deterministic(self, small_election, tmp_path):
        config = SimConfig(base_seed=21, runs_per_point=8, model="digit", rates=(0.05,))
        report = run_sweep(small_election, config)
        d1, d2 = tmp_path / "r1", tmp_path / "r2"
        names1 = write_report(report, d1, ballot_rates=True)
        names2 = write_report(run_sweep(small_election, config), d2, ballot_rates=True)
        assert names1 == names2
        for name in names1:
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_csv_headers(self, small_election, tmp_path):
        config = SimConfig(base_seed=21, runs_per_point=2, model="digit", rates=())
        write_report(run_sweep(small_election, config), tmp_path)
        assert (tmp_path / "winners.csv").read_text().splitlines()[0] == \
            "model,rate,btl_required,candidate,wins,frequency"
        assert (tmp_path / "report.json").exists()
