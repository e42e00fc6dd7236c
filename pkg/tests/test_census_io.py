import pytest

from pbengine.census_io import census_to_csv, load_census_file, parse_census_csv
from pbengine.errors import VoteError
from pbengine.model import AXES

from .conftest import fixture_path


def test_four_ward_fixture_parses(census):
    assert census.wards() == [29, 35, 36, 49]
    groups = {(w, a) for (w, a, _) in census.counts}
    assert len(groups) == 16  # 4 wards x 4 axes
    for ward in census.wards():
        totals = {axis: sum(census.axis_counts(ward, axis).values()) for axis in AXES}
        assert len(set(totals.values())) == 1  # axes partition one population


def test_empty_file_is_parse_error(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(VoteError) as exc:
        load_census_file(str(path))
    assert exc.value.code == "parse-error"
    assert "header" in exc.value.message


def test_negative_count():
    with pytest.raises(VoteError) as exc:
        parse_census_csv("ward,axis,category,count\n49,race,white,-5\n")
    assert exc.value.code == "invalid-count"
    assert "line 2" in exc.value.message


def test_malformed_row_reports_line_number():
    text = "ward,axis,category,count\n49,race,white,10\n49,race\n"
    with pytest.raises(VoteError) as exc:
        parse_census_csv(text)
    assert exc.value.code == "parse-error"
    assert "line 3" in exc.value.message


def test_bad_header():
    with pytest.raises(VoteError) as exc:
        parse_census_csv("a,b,c,d\n1,race,x,5\n")
    assert exc.value.code == "parse-error"


def test_unknown_axis_rejected():
    with pytest.raises(VoteError) as exc:
        parse_census_csv("ward,axis,category,count\n49,shoe,white,10\n")
    assert exc.value.code == "parse-error"


def test_cross_axis_mismatch_is_warning_not_error():
    text = (
        "ward,axis,category,count\n"
        "49,race,white,10\n"
        "49,age,18-24,12\n"
    )
    census, warnings = parse_census_csv(text)
    assert census.counts[(49, "race", "white")] == 10
    assert len(warnings) == 1 and "ward 49" in warnings[0]


def test_csv_roundtrip(census):
    text = census_to_csv(census)
    again, warnings = parse_census_csv(text)
    assert warnings == []
    assert again == census
