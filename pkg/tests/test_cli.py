import json

import pytest

from stvsim import ElectionFile, read_election_file, write_election_file
from stvsim.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from stvsim.synth import formality_bias_election


@pytest.fixture
def election_path(tmp_path):
    path = tmp_path / "bias.stv"
    write_election_file(formality_bias_election(atl_votes=60, btl_votes=40), path)
    return str(path)


@pytest.fixture
def meta_path(tmp_path):
    election = formality_bias_election()
    path = tmp_path / "meta.stv"
    write_election_file(ElectionFile(election.meta, ()), path)
    return str(path)


def write_csv(tmp_path, rows, header="Preferences"):
    path = tmp_path / "prefs.csv"
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")
    return str(path)


class TestIngest:
    def test_five_rows_make_five_ballots(self, tmp_path, meta_path, capsys):
        # boxes: A,B then a1,a2,a3,b1,b2,b3
        rows = ['"1,,,,,,,"', '"1,2,,,,,,"', '",,1,2,3,4,5,6"', '"1,,,,,,,"', '"/,,,,,,,"']
        csv_path = write_csv(tmp_path, rows)
        out = tmp_path / "out.stv"
        code = main(["ingest", "--csv", csv_path, "--meta", meta_path, "--out", str(out)])
        assert code == EXIT_OK
        election = read_election_file(out)
        assert election.total_ballots == 5
        assert len(election.sheets) == 3  # rows 1, 4, 5 merge

    def test_malformed_row_reported_not_fatal(self, tmp_path, meta_path):
        rows = ['"1,,,,,,,"', '"1,2"', '"1,2,,,,,,"', '",1,,,,,,"', '"2,1,,,,,,"']
        csv_path = write_csv(tmp_path, rows)
        out = tmp_path / "out.stv"
        assert main(["ingest", "--csv", csv_path, "--meta", meta_path, "--out", str(out)]) == EXIT_OK
        election = read_election_file(out)
        assert election.total_ballots == 4
        report = (tmp_path / "out.stv.parse-errors.txt").read_text()
        assert "row 3" in report

    def test_missing_meta_fails_without_output(self, tmp_path):
        csv_path = write_csv(tmp_path, ['"1,,,,,,,"'])
        out = tmp_path / "out.stv"
        code = main(["ingest", "--csv", csv_path, "--meta", str(tmp_path / "nope.stv"), "--out", str(out)])
        assert code == EXIT_DATA
        assert not out.exists()


class TestCount:
    def test_majority_winner_and_transcript(self, tmp_path, election_path, capsys):
        out = tmp_path / "count"
        code = main(["count", "--election", election_path, "--out", str(out)])
        assert code == EXIT_OK
        stdout = capsys.readouterr().out
        assert "a1" in stdout.splitlines()[0]
        assert (out / "winners.txt").read_text().strip() == "a1"
        transcript = (out / "transcript.txt").read_text()
        assert transcript.startswith("election\t")
        assert (out / "manifest.json").exists()

    def test_seat_override_to_invalid_is_usage_error(self, election_path):
        assert main(["count", "--election", election_path, "--seats", "6"]) == EXIT_USAGE

    def test_missing_file_is_data_error(self, tmp_path):
        assert main(["count", "--election", str(tmp_path / "none.stv")]) == EXIT_DATA


class TestSimulate:
    def test_baseline_only(self, tmp_path, election_path):
        out = tmp_path / "sim"
        code = main([
            "simulate", "--election", election_path, "--runs", "1", "--seed", "5",
            "--rates", "0", "--jobs", "1", "--out", str(out),
        ])
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert len(report["points"]) == 1
        assert report["points"][0]["rate"] == 0.0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["base_seed"] == 5
        assert manifest["command"] == "simulate"
        assert "inputs" in manifest and manifest["tool_version"]

    def test_invalid_rate_is_usage_error(self, tmp_path, election_path):
        code = main([
            "simulate", "--election", election_path, "--rates", "1.5",
            "--out", str(tmp_path / "x"),
        ])
        assert code == EXIT_USAGE

    def test_confusion_model_uses_bundled_table(self, tmp_path, election_path):
        out = tmp_path / "sim_conf"
        code = main([
            "simulate", "--election", election_path, "--model", "confusion",
            "--runs", "2", "--jobs", "1", "--out", str(out),
        ])
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        rates = [p["rate"] for p in report["points"]]
        assert rates[0] == 0.0
        assert 0.0084 <= rates[1] <= 0.0094  # the table's mean per-digit change rate

    def test_manifest_config_reproduces_run(self, tmp_path, election_path):
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        argv = ["simulate", "--election", election_path, "--runs", "4", "--seed", "9",
                "--rates", "0.02", "--jobs", "1", "--out", str(out1)]
        assert main(argv) == EXIT_OK
        manifest = json.loads((out1 / "manifest.json").read_text())
        config = dict(manifest["config"])
        config["out"] = str(out2)
        config_path = tmp_path / "replay.json"
        config_path.write_text(json.dumps(config))
        assert main(["simulate", "--config", str(config_path)]) == EXIT_OK
        assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()

    def test_flags_override_config_file(self, tmp_path, election_path):
        config_path = tmp_path / "conf.json"
        config_path.write_text(json.dumps({
            "election": election_path, "runs": 2, "seed": 1, "rates": "0",
            "jobs": 1, "out": str(tmp_path / "a")}))
        assert main(["simulate", "--config", str(config_path), "--out", str(tmp_path / "b")]) == EXIT_OK
        assert not (tmp_path / "a").exists()
        assert (tmp_path / "b" / "report.json").exists()

    def test_unknown_config_key_is_usage_error(self, tmp_path, election_path):
        config_path = tmp_path / "conf.json"
        config_path.write_text(json.dumps({"elections": election_path}))
        assert main(["simulate", "--config", str(config_path),
                     "--election", election_path, "--out", str(tmp_path / "x")]) == EXIT_USAGE


class TestAnalyze:
    def test_partition_stdout(self, election_path, capsys):
        assert main(["analyze", "partition", "--election", election_path,
                     "--a", "a1", "--b", "b1"]) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "style,prefers_a,prefers_b,neither"
        assert out[1] == "ATL,60,0,0"
        assert out[2] == "BTL,0,40,0"

    def test_partition_same_candidate_is_error(self, election_path):
        assert main(["analyze", "partition", "--election", election_path,
                     "--a", "a1", "--b", "a1"]) == EXIT_DATA

    def test_forensics_counts_duplicate_first_preference(self, tmp_path, meta_path, capsys):
        rows = ['",,1,1,,,,"']  # a1 and a2 both marked 1
        csv_path = write_csv(tmp_path, rows)
        out = tmp_path / "f.stv"
        main(["ingest", "--csv", csv_path, "--meta", meta_path, "--out", str(out)])
        capsys.readouterr()
        assert main(["analyze", "forensics", "--election", str(out), "--max-pref", "2"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "preference,repeated,skipped"
        assert lines[1] == "1,1,0"

    def test_histogram(self, election_path, capsys):
        assert main(["analyze", "histogram", "--election", election_path,
                     "--candidate", "b1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "BTL,1,40" in out


class TestEstimateRate:
    def test_audit_numbers(self, capsys):
        assert main(["estimate-rate", "--errors", "4", "--trials", "9060"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "0.04% (0.01%, 0.11%)"

    def test_colleague_numbers(self, capsys):
        assert main(["estimate-rate", "--errors", "3", "--trials", "2325"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "0.13% (0.03%, 0.38%)"

    def test_bad_counts_are_data_errors(self):
        assert main(["estimate-rate", "--errors", "5", "--trials", "4"]) == EXIT_DATA


class TestUsage:
    def test_no_command_is_usage_error(self):
        assert main([]) == EXIT_USAGE

    def test_unknown_flag_is_usage_error(self, election_path):
        assert main(["count", "--election", election_path, "--frobnicate"]) == EXIT_USAGE
