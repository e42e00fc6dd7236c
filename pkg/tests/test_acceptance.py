"""Acceptance suite: one test per release criterion, each printing a
pass/fail line. Run with `pytest tests/test_acceptance.py -s`.
"""

import json
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from pbengine import session as S
from pbengine.aggregate import equal_shares_detail, greedy_knapsack, rank_churn
from pbengine.analytics import allocation_strips, demographic_matrix
from pbengine.errors import VoteError
from pbengine.model import (
    AXES,
    Ballot,
    CensusTable,
    DemographicProfile,
    Project,
    VoteRecord,
    allocation_sum,
)
from pbengine.simulate import parse_config_text, sample_turnout, simulate_corpus
from pbengine.store import load_ballots_file, read_corpus_jsonl

from .conftest import fixture_path
from .oracles import greedy_reference, kendall_pairs, mes_reference


@contextmanager
def criterion(name: str):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL ({time.perf_counter() - started:.1f}s)")
        raise
    print(f"[ACCEPTANCE] {name}: PASS ({time.perf_counter() - started:.1f}s)")


# --- 1. budget-safety fuzz ----------------------------------------------------

AMOUNT_POOL = (0, 500, 1_000, 23_000, 48_000, 49_000, 250_000, 500_000, 999_000, 1_000_000, 1_001_000, -1_000)


def _random_session(ballots, ids, rng, length, check_each_step):
    ses = S.create_session("ward-49", ballots, clock=lambda: 0.0)
    clk = lambda: 1.0
    profile = DemographicProfile()
    for _ in range(length):
        # weighted toward allocation edits so sequences stay live for long
        # stretches instead of finalizing almost immediately
        choice = rng.randrange(16)
        try:
            if choice == 0:
                ses_ids = rng.sample(ids, rng.randint(0, len(ids)))
                S.submit_sort(ses, ses_ids, clock=clk)
            elif choice <= 6:
                S.set_allocation(ses, rng.choice(ids), rng.choice(AMOUNT_POOL), clock=clk)
            elif choice <= 8:
                S.fill_up(ses, rng.choice(ids), clock=clk)
            elif choice <= 10:
                S.clear(ses, rng.choice(ids), clock=clk)
            elif choice == 11:
                S.reveal_costs(ses, clock=clk)
            elif choice == 12:
                S.set_to_cost(ses, rng.choice(ids), clock=clk)
            elif choice == 13:
                S.advance_stage(ses, clock=clk)
            elif choice == 14:
                S.record_demographics(ses, profile, clock=clk)
            else:
                S.finalize(ses, clock=clk)
        except VoteError:
            pass
        if check_each_step:
            total = sum(ses.amounts.values())
            assert total <= 1_000_000
            assert all(a >= 0 and a % 1_000 == 0 for a in ses.amounts.values())
    return ses


def test_budget_safety_fuzz(ballots, ward49):
    with criterion("budget-safety fuzz (10,000 sequences)"):
        ids = list(ward49.project_ids())
        rng = random.Random(0xB4D6E7)
        started = time.perf_counter()
        for _ in range(10_000):
            _random_session(ballots, ids, rng, rng.randint(0, 200), check_each_step=True)
        elapsed = time.perf_counter() - started
        assert elapsed < 60.0, f"fuzz took {elapsed:.1f}s (limit 60s)"


# --- 2. event-log replay --------------------------------------------------------


def test_event_log_replay(ballots, ward49):
    with criterion("event-log replay (1,000 sessions, bit-exact)"):
        ids = list(ward49.project_ids())
        rng = random.Random(0x5EED)
        for _ in range(1_000):
            ses = _random_session(ballots, ids, rng, rng.randint(0, 60), check_each_step=False)
            replayed = S.replay(ses.event_log, ballots)
            original = json.dumps(S.session_state(ses), sort_keys=True)
            again = json.dumps(S.session_state(replayed), sort_keys=True)
            assert original == again


# --- 3. simulator statistics -----------------------------------------------------


def test_simulator_statistics(ballots, census):
    with criterion("simulator statistics (binomial mean, exact spend, rate bands)"):
        cell = CensusTable(counts={(1, "race", "x"): 10_000})
        n_seeds = 1_000
        counts = [sample_turnout(cell, 1, 0.02, seed)[("race", "x")] for seed in range(n_seeds)]
        mean = sum(counts) / n_seeds
        sigma = (10_000 * 0.02 * 0.98) ** 0.5
        tolerance = 3 * sigma / n_seeds**0.5
        assert abs(mean - 200.0) <= tolerance, f"mean {mean} outside 200 +/- {tolerance:.3f}"

        for name, band in (("sim-survey-band.txt", (0.01, 0.03)), ("sim-historic-band.txt", (0.0023, 0.0228))):
            with open(fixture_path(name), encoding="utf-8") as fh:
                config = parse_config_text(fh.read())
            config.validate()
            assert config.rate_band == band

        with open(fixture_path("sim-historic-band.txt"), encoding="utf-8") as fh:
            config = parse_config_text(fh.read())
        rows = simulate_corpus(ballots, census, config)
        assert rows, "historic-band simulation produced no voters"
        for _, _, record in rows:
            assert allocation_sum(record.amounts) == 1_000_000
            assert all(a % 1_000 == 0 for a in record.amounts.values())


# --- 4. aggregation oracles -------------------------------------------------------


def _oracle_instance(rng):
    n_projects = rng.randint(2, 5)
    n_voters = rng.randint(1, 4)
    projects = tuple(
        Project(
            id=f"p{i}",
            name=f"p{i}",
            description="",
            cost_estimate=rng.randint(1, 5),
            category="parks-and-environment",
        )
        for i in range(n_projects)
    )
    budget = rng.randint(1, 15)
    ballot = Ballot(ward_id=1, projects=projects, budget_total=budget, granularity=1)
    votes = []
    for _ in range(n_voters):
        left = budget
        amounts = {}
        order = [p.id for p in projects]
        rng.shuffle(order)
        for pid in order:
            amount = rng.randint(0, left)
            amounts[pid] = amount
            left -= amount
        votes.append(VoteRecord(ballot_ref="o", ward_id=1, sorted_ids=tuple(order), amounts=amounts))
    return ballot, votes


def test_aggregation_oracles():
    with criterion("aggregation oracles (>= 10,000 instances, zero mismatches)"):
        rng = random.Random(0x0AC1E)
        started = time.perf_counter()
        instances = 10_400
        for _ in range(instances):
            ballot, votes = _oracle_instance(rng)
            costs = {p.id: ballot.rounded_cost(p.id) for p in ballot.projects}
            totals = {pid: sum(v.amount(pid) for v in votes) for pid in ballot.project_ids()}
            assert greedy_knapsack(ballot, votes)[0] == greedy_reference(
                totals, costs, ballot.budget_total
            )
            approvers = {
                pid: [i for i, v in enumerate(votes) if v.amount(pid) >= costs[pid]]
                for pid in ballot.project_ids()
            }
            expect_funded, expect_charges = mes_reference(
                approvers, costs, ballot.budget_total, len(votes)
            )
            funded, charges = equal_shares_detail(ballot, votes)
            assert funded == expect_funded
            assert charges == expect_charges
        elapsed = time.perf_counter() - started
        assert elapsed < 300.0, f"oracle sweep took {elapsed:.1f}s (limit 5 min)"


# --- 5. rule invariants --------------------------------------------------------------


def test_rule_invariants():
    with criterion("rule invariants (1,000 corpora: feasibility, scaling, conservation)"):
        rng = random.Random(0x17A)
        for _ in range(1_000):
            ballot, votes = _oracle_instance(rng)
            funded_greedy, _ = greedy_knapsack(ballot, votes)
            assert sum(ballot.rounded_cost(p) for p in funded_greedy) <= ballot.budget_total
            scaled = [
                VoteRecord(
                    ballot_ref=v.ballot_ref,
                    ward_id=v.ward_id,
                    sorted_ids=v.sorted_ids,
                    amounts={k: a * 3 for k, a in v.amounts.items()},
                )
                for v in votes
            ]
            assert greedy_knapsack(ballot, scaled)[0] == funded_greedy
            funded_mes, charges = equal_shares_detail(ballot, votes)
            assert sum(ballot.rounded_cost(p) for p in funded_mes) <= ballot.budget_total
            assert sum(charges.values()) == sum(ballot.rounded_cost(p) for p in funded_mes)
            endowment = Fraction(ballot.budget_total, len(votes))
            assert all(c <= endowment for c in charges.values())


# --- 6. rank-churn pipeline -------------------------------------------------------------


def test_rank_churn_pipeline(ballots, ward49):
    with criterion("rank-churn pipeline (revision produces nonzero churn)"):
        ids = list(ward49.project_ids())
        descending = [200_000, 150_000, 140_000, 130_000, 120_000, 110_000, 100_000, 0]

        def scripted(revise: bool):
            ses = S.create_session("ward-49", ballots, clock=lambda: 0.0)
            S.submit_sort(ses, ids, clock=lambda: 1.0)
            for pid, amount in zip(ids, descending):
                S.set_allocation(ses, pid, amount, clock=lambda: 2.0)
            S.reveal_costs(ses, clock=lambda: 3.0)
            if revise:
                S.clear(ses, ids[0], clock=lambda: 4.0)
                S.fill_up(ses, ids[-1], clock=lambda: 5.0)
            return S.finalize(ses, clock=lambda: 6.0)

        unrevised = scripted(revise=False)
        assert rank_churn(unrevised) == 0

        revised = scripted(revise=True)
        churn = rank_churn(revised)
        position = {pid: i for i, pid in enumerate(revised.sorted_ids)}
        implied = sorted(
            revised.sorted_ids, key=lambda pid: (-revised.amounts[pid], position[pid])
        )
        oracle = kendall_pairs(list(revised.sorted_ids), implied)
        assert churn == oracle
        assert churn > 0


# --- 7. analytics conservation ---------------------------------------------------------------


def test_analytics_conservation(ballots, census):
    with criterion("analytics conservation (percent sums, strip sums, 1,000+ voters)"):
        with open(fixture_path("sim-historic-band.txt"), encoding="utf-8") as fh:
            config = parse_config_text(fh.read())
        rows = simulate_corpus(ballots, census, config)
        assert len(rows) >= 1_000

        profiles_by_ward = {}
        records_by_ref = {}
        for ref, profile, record in rows:
            profiles_by_ward.setdefault(record.ward_id, []).append(profile)
            records_by_ref.setdefault(ref, []).append(record)

        wards = sorted(profiles_by_ward)
        for axis in AXES:
            matrix = demographic_matrix(census, profiles_by_ward, wards, axis, "percent")
            for j in range(len(matrix.columns)):
                column = [row[j] for row in matrix.cells]
                assert all(v is not None for v in column)
                assert abs(sum(column) - 100.0) <= 0.1

        for ref, records in sorted(records_by_ref.items()):
            triples = allocation_strips(ballots[ref], records)
            per_voter = {}
            for _, voter, dollars in triples:
                per_voter[voter] = per_voter.get(voter, 0) + dollars
            assert sorted(per_voter.values()) == sorted(
                allocation_sum(r.amounts) for r in records
            )


# --- 8. end-to-end CLI -------------------------------------------------------------------------


def _run_pipeline(workdir) -> dict[str, bytes]:
    corpus = workdir / "corpus.jsonl"

    def cli(*args):
        result = subprocess.run(
            [sys.executable, "-m", "pbengine.cli", *args],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        return result

    cli(
        "simulate",
        "--ballot", fixture_path("ballots-4wards.json"),
        "--census", fixture_path("census-4wards.csv"),
        "--config", fixture_path("sim-historic-band.txt"),
        "--seed", "7",
        "--out", str(corpus),
    )
    cli(
        "aggregate",
        "--votes", str(corpus),
        "--ballot", fixture_path("ballots-4wards.json"),
        "--rules", "totals,approval,knapsack-greedy,equal-shares,borda",
        "--ward", "49",
        "--out", str(workdir / "aggregate.json"),
    )
    cli(
        "analytics",
        "--votes", str(corpus),
        "--census", fixture_path("census-4wards.csv"),
        "--wards", "29,35,36,49",
        "--axis", "race",
        "--mode", "percent",
        "--ballot", fixture_path("ballots-4wards.json"),
        "--out", str(workdir / "analytics.json"),
    )
    return {
        name: (workdir / name).read_bytes()
        for name in ("corpus.jsonl", "corpus.jsonl.summary.csv", "aggregate.json", "analytics.json")
    }


def test_end_to_end_cli(tmp_path):
    with criterion("end-to-end CLI (simulate -> aggregate -> analytics, byte-stable)"):
        started = time.perf_counter()
        run_a = tmp_path / "a"
        run_b = tmp_path / "b"
        run_a.mkdir()
        run_b.mkdir()
        bytes_a = _run_pipeline(run_a)
        bytes_b = _run_pipeline(run_b)
        elapsed = time.perf_counter() - started
        assert bytes_a == bytes_b, "pipeline outputs differ between runs"
        meta, votes = read_corpus_jsonl(str(run_a / "corpus.jsonl"))
        assert meta["seed"] == 7
        assert len(votes) >= 1_000
        agg_payload = json.loads(bytes_a["aggregate.json"])
        assert set(agg_payload["funded"]) == {"knapsack-greedy", "equal-shares"}
        assert elapsed < 30.0, f"pipeline took {elapsed:.1f}s (limit 30s, two runs)"
