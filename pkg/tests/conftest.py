import os

import pytest

from pbengine.census_io import load_census_file
from pbengine.model import Ballot, Project, VoteRecord
from pbengine.store import load_ballots_file

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


@pytest.fixture(scope="session")
def ballots():
    return load_ballots_file(fixture_path("ballots-4wards.json"))


@pytest.fixture(scope="session")
def ward49(ballots):
    return ballots["ward-49"]


@pytest.fixture(scope="session")
def census():
    table, warnings = load_census_file(fixture_path("census-4wards.csv"))
    assert warnings == []
    return table


def oracle_ballot() -> Ballot:
    """Tiny 3-project ballot matching the hand-traced greedy example:
    totals A=300 (cost 100), B=500 (cost 200), C=200 (cost 150)."""
    return Ballot(
        ward_id=1,
        projects=(
            Project(id="A", name="A", description="", cost_estimate=100, category="parks-and-environment"),
            Project(id="B", name="B", description="", cost_estimate=200, category="parks-and-environment"),
            Project(id="C", name="C", description="", cost_estimate=150, category="parks-and-environment"),
        ),
        budget_total=250,
        granularity=1,
    )


def oracle_votes() -> list[VoteRecord]:
    rows = [
        {"A": 250, "B": 0, "C": 0},
        {"A": 50, "B": 200, "C": 0},
        {"A": 0, "B": 250, "C": 0},
        {"A": 0, "B": 50, "C": 200},
    ]
    return [
        VoteRecord(ballot_ref="oracle", ward_id=1, sorted_ids=(), amounts=dict(r))
        for r in rows
    ]
