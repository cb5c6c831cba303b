import io

import pytest

from stvsim import (
    Candidate,
    ColumnMap,
    ElectionFile,
    ElectionMeta,
    Group,
    IngestError,
    MarkSheet,
    SchemaError,
    parse_preference_csv,
    read_election_file,
    write_election_file,
)


@pytest.fixture
def meta():
    return ElectionMeta(
        name="csv fixture",
        seats=1,
        groups=(Group("gA", "Alpha"), Group("gB", "Beta"), Group("gC", "Gamma")),
        candidates=(
            Candidate("a1", "Ann", "gA", 1),
            Candidate("b1", "Bob", "gB", 1),
            Candidate("c1", "Cam", "gC", 1),
        ),
    )


def parse(text, meta, column="Preferences", header=True):
    stream = io.BytesIO(text.encode("utf-8"))
    return parse_preference_csv(stream, meta, ColumnMap(column, header))


class TestCsvParsing:
    def test_positional_mapping(self, meta):
        result = parse('Preferences\n"1,,2,,,"\n', meta)
        assert not result.issues
        (sheet,) = result.election.sheets
        assert sheet.atl_marks == {"gA": "1", "gC": "2"}
        assert sheet.btl_marks == {}

    def test_tick_tokens_mean_first_preference(self, meta):
        # hand-built rows mirroring the published tick-mark convention
        result = parse('Preferences\n"/,,,,,"\n"*,,,,,"\n"1,,,,,"\n', meta)
        assert not result.issues
        (sheet,) = result.election.sheets
        assert sheet.atl_marks == {"gA": "1"}
        assert sheet.multiplicity == 3

    def test_identical_rows_merge(self, meta):
        result = parse('Preferences\n"1,2,,,,"\n"1,2,,,,"\n', meta)
        assert len(result.election.sheets) == 1
        assert result.election.sheets[0].multiplicity == 2
        assert result.election.total_ballots == 2

    def test_btl_columns_follow_atl(self, meta):
        result = parse('Preferences\n",,,1,2,3"\n', meta)
        (sheet,) = result.election.sheets
        assert sheet.atl_marks == {}
        assert sheet.btl_marks == {"a1": "1", "b1": "2", "c1": "3"}

    def test_wrong_token_count_rejects_row(self, meta):
        result = parse('Preferences\n"1,,2,,,"\n"1,2"\n"2,1,,,,"\n', meta)
        assert len(result.election.sheets) == 2
        assert len(result.issues) == 1
        assert result.issues[0].row == 3
        assert "tokens" in result.issues[0].reason

    def test_column_by_index_and_extra_columns(self, meta):
        result = parse('id,prefs\n7,"1,,,,,"\n', meta, column=1)
        assert result.election.total_ballots == 1

    def test_missing_column_is_hard_error(self, meta):
        with pytest.raises(IngestError):
            parse('Nope\n"1,,,,,"\n', meta)

    def test_non_numeric_tokens_are_unmarked(self, meta):
        result = parse('Preferences\n"1,x,?,,,"\n', meta)
        (sheet,) = result.election.sheets
        assert sheet.atl_marks == {"gA": "1"}

    def test_parse_from_path(self, meta, tmp_path):
        path = tmp_path / "prefs.csv"
        path.write_text('Preferences\n"1,,,,,"\n', encoding="utf-8")
        result = parse_preference_csv(str(path), meta, ColumnMap("Preferences"))
        assert result.election.total_ballots == 1

    def test_order_preserved_and_total_conserved(self, meta):
        rows = ['"1,,,,,"', '",1,,,,"', '"1,,,,,"', '",,1,,,"']
        result = parse("Preferences\n" + "\n".join(rows) + "\n", meta)
        assert [s.atl_marks for s in result.election.sheets] == [
            {"gA": "1"}, {"gB": "1"}, {"gC": "1"}]
        assert result.election.total_ballots == 4


class TestElectionFileRoundTrip:
    def test_meta_only_round_trips(self, meta, tmp_path):
        election = ElectionFile(meta, (), provenance="just the layout")
        path = tmp_path / "empty.stv"
        write_election_file(election, path)
        assert read_election_file(path) == election

    def test_sheets_round_trip_bit_exactly(self, meta, tmp_path):
        sheets = (
            MarkSheet({"gA": "1"}, {}, 3),
            MarkSheet({}, {"a1": "1", "b1": "2", "c1": "3"}, 1),
            MarkSheet({"gB": "1", "gC": "2"}, {"a1": "07"}, 5),  # leading zero preserved
            MarkSheet({"gC": "1"}, {}, 1),
            MarkSheet({}, {"c1": "1"}, 2),
        )
        election = ElectionFile(meta, sheets, provenance="five sheets")
        path = tmp_path / "five.stv"
        write_election_file(election, path)
        back = read_election_file(path)
        assert back == election
        # a second write is byte-identical: the writer is canonical
        path2 = tmp_path / "again.stv"
        write_election_file(back, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_unknown_candidate_in_sheet_is_schema_error(self, meta, tmp_path):
        path = tmp_path / "bad.stv"
        good = ElectionFile(meta, (MarkSheet({"gA": "1"}, {}),))
        write_election_file(good, path)
        text = path.read_text().replace("gA:1", "zz:1")
        path.write_text(text)
        with pytest.raises(SchemaError):
            read_election_file(path)

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "v9.stv"
        path.write_text("#stv-election v9\n")
        with pytest.raises(SchemaError) as err:
            read_election_file(path)
        assert "line 1" in str(err.value)

    def test_building_with_unknown_box_fails(self, meta):
        with pytest.raises(SchemaError):
            ElectionFile(meta, (MarkSheet({"nope": "1"}, {}),))

    def test_malformed_sheet_line_reports_line_number(self, meta, tmp_path):
        path = tmp_path / "bad2.stv"
        good = ElectionFile(meta, (MarkSheet({"gA": "1"}, {}),))
        write_election_file(good, path)
        path.write_text(path.read_text().replace("1\tgA:1\t", "one\tgA:1\t"))
        with pytest.raises(SchemaError) as err:
            read_election_file(path)
        assert "line" in str(err.value)
