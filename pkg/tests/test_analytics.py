import pytest

from pbengine.analytics import (
    DEFAULT_WARDS,
    allocation_strips,
    bin_index,
    demographic_matrix,
    quantize_bins,
    representation_gap,
)
from pbengine.errors import VoteError
from pbengine.model import CensusTable, DemographicProfile, VoteRecord, allocation_sum


def profiles(n, **fields):
    return [DemographicProfile(**fields) for _ in range(n)]


def small_census():
    counts = {}
    for ward in (29, 49):
        for cat, share in (("white", 10), ("black", 30), ("asian", 60)):
            counts[(ward, "race", cat)] = share
        counts[(ward, "age", "18-24")] = 100
    return CensusTable(counts=counts)


def test_counts_to_percent_normalization():
    census = small_census()
    matrix = demographic_matrix(census, {}, [29], "race", "percent")
    col = matrix.column(29, "census")
    by_row = dict(zip(matrix.rows, col))
    assert by_row["white"] == pytest.approx(10.0)
    assert by_row["black"] == pytest.approx(30.0)
    assert by_row["asian"] == pytest.approx(60.0)
    assert sum(v for v in col if v is not None) == pytest.approx(100.0, abs=0.1)


def test_zero_voters_percent_undefined():
    census = small_census()
    counts_matrix = demographic_matrix(census, {}, [29], "race", "counts")
    assert all(v == 0 for v in counts_matrix.column(29, "voters"))
    percent_matrix = demographic_matrix(census, {}, [29], "race", "percent")
    assert all(v is None for v in percent_matrix.column(29, "voters"))


def test_default_ward_set(census):
    matrix = demographic_matrix(census, {}, list(DEFAULT_WARDS), "race", "counts")
    assert {w for w, _ in matrix.columns} == set(DEFAULT_WARDS)
    assert len(matrix.columns) == 8  # 4 wards x (census, voters)


def test_undisclosed_has_its_own_row():
    census = small_census()
    voters = profiles(3, race="white") + profiles(2)  # 2 opt-outs
    matrix = demographic_matrix(census, {29: voters}, [29], "race", "counts")
    by_row = dict(zip(matrix.rows, matrix.column(29, "voters")))
    assert by_row["white"] == 3
    assert by_row["undisclosed"] == 2


def test_matrix_errors():
    census = small_census()
    with pytest.raises(VoteError) as exc:
        demographic_matrix(census, {}, [], "race", "counts")
    assert exc.value.code == "no-selection"
    with pytest.raises(VoteError) as exc:
        demographic_matrix(census, {}, [29], "shoe-size", "counts")
    assert exc.value.code == "invalid-axis"
    with pytest.raises(VoteError) as exc:
        demographic_matrix(census, {}, [29], "race", "sideways")
    assert exc.value.code == "invalid-mode"
    with pytest.raises(VoteError) as exc:
        demographic_matrix(census, {}, [7], "race", "counts")
    assert exc.value.code == "ward-not-found"


def test_census_column_conserves_population():
    census = small_census()
    matrix = demographic_matrix(census, {}, [29], "race", "counts")
    assert sum(matrix.column(29, "census")) == 100


def test_representation_gap():
    census = small_census()
    voters = profiles(1, race="white") + profiles(9, race="black")
    matrix = demographic_matrix(census, {29: voters}, [29], "race", "percent")
    gaps = representation_gap(matrix)
    assert gaps["white"] == pytest.approx(0.0)  # census 10% vs voters 10%
    assert gaps["asian"] == pytest.approx(60.0)  # census 60% vs voters 0%
    assert gaps["black"] == pytest.approx(-60.0)  # over-represented
    assert sum(gaps.values()) == pytest.approx(0.0, abs=0.2)


def test_representation_gap_requirements():
    census = small_census()
    counts_matrix = demographic_matrix(census, {}, [29], "race", "counts")
    with pytest.raises(VoteError):
        representation_gap(counts_matrix)
    empty = demographic_matrix(census, {}, [29], "race", "percent")
    with pytest.raises(VoteError) as exc:
        representation_gap(empty)
    assert exc.value.code == "insufficient-data"
    two_wards = demographic_matrix(census, {29: profiles(1)}, [29, 49], "race", "percent")
    with pytest.raises(VoteError):
        representation_gap(two_wards)


def test_bins_cover_and_assign():
    bins = quantize_bins([0.0, 10.0, 50.0], 5)
    assert len(bins) == 6
    assert all(bins[i] < bins[i + 1] for i in range(5))
    for v in (0.0, 10.0, 49.9, 50.0):
        assert 0 <= bin_index(v, bins) <= 4
    flat = quantize_bins([7.0, 7.0], 5)
    assert all(flat[i] < flat[i + 1] for i in range(5))
    assert bin_index(7.0, flat) == 0


def test_strips_fixture_category_map(ward49):
    vote = VoteRecord(
        ballot_ref="ward-49",
        ward_id=49,
        sorted_ids=tuple(ward49.project_ids()),
        amounts={"bike-lanes": 200_000, "curb-cuts": 300_000},
    )
    triples = allocation_strips(ward49, [vote])
    points = {(c, v): d for c, v, d in triples}
    assert points[("biking-and-transport", 0)] == 200_000
    assert points[("streets-and-sidewalks", 0)] == 300_000  # curb cuts roll up here
    assert points[("arts-and-culture", 0)] == 0


def test_strips_single_project_vote(ward49):
    vote = VoteRecord(
        ballot_ref="ward-49", ward_id=49, sorted_ids=(), amounts={"street-murals": 1_000_000}
    )
    triples = allocation_strips(ward49, [vote])
    nonzero = [t for t in triples if t[2] > 0]
    assert nonzero == [("arts-and-culture", 0, 1_000_000)]
    assert len(triples) == 5  # one point per category


def test_strip_points_sum_to_allocation(ward49):
    votes = [
        VoteRecord(
            ballot_ref="ward-49",
            ward_id=49,
            sorted_ids=(),
            amounts={"bike-lanes": 100_000 * (i + 1), "picnic-tables": 50_000},
        )
        for i in range(5)
    ]
    triples = allocation_strips(ward49, votes)
    per_voter = {}
    for _, voter, dollars in triples:
        per_voter[voter] = per_voter.get(voter, 0) + dollars
    assert sorted(per_voter.values()) == sorted(allocation_sum(v.amounts) for v in votes)


def test_strips_shuffle_is_fixed(ward49):
    votes = [
        VoteRecord(ballot_ref="ward-49", ward_id=49, sorted_ids=(), amounts={"bike-lanes": 1_000 * i})
        for i in range(1, 30)
    ]
    assert allocation_strips(ward49, votes) == allocation_strips(ward49, votes)
    order = [d for c, _, d in allocation_strips(ward49, votes) if c == "biking-and-transport"]
    assert order != sorted(order)  # de-identified: not in arrival order


def test_strips_no_votes(ward49):
    with pytest.raises(VoteError) as exc:
        allocation_strips(ward49, [])
    assert exc.value.code == "no-votes"
