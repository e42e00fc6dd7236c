import json

from pbengine.model import DemographicProfile, VoteRecord
from pbengine.store import CorpusStore


def test_profiles_stored_as_sorted_multiset(tmp_path):
    store = CorpusStore(str(tmp_path))
    arrivals = [
        DemographicProfile(race="white"),
        DemographicProfile(race="asian"),
        DemographicProfile(race="black"),
        DemographicProfile(race="asian"),
    ]
    for p in arrivals:
        store.add_profile(49, p)
    stored = [p.race for p in store.profiles(49)]
    assert stored == sorted(stored)  # arrival order is not recoverable
    assert sorted(stored) == sorted(p.race for p in arrivals)
    store.close()


def test_event_log_redacts_demographics(tmp_path):
    store = CorpusStore(str(tmp_path))
    store.append_event("sess-1", {"ts": 0.0, "op": "create_session", "args": {"ballot_ref": "b", "session_id": "sess-1"}})
    store.append_event(
        "sess-1",
        {"ts": 1.0, "op": "record_demographics", "args": {"profile": {"race": "black"}}},
    )
    raw = open(store._log_path("sess-1"), encoding="utf-8").read()
    assert "black" not in raw
    assert "__redacted__" in raw
    events = store.read_events("sess-1")
    assert events[1]["args"] == {"profile": "__redacted__"}
    store.close()


def test_records_and_profiles_share_no_key(tmp_path):
    store = CorpusStore(str(tmp_path))
    record = VoteRecord(ballot_ref="b", ward_id=49, sorted_ids=("x",), amounts={"x": 5})
    store.append_record(record)
    store.add_profile(49, DemographicProfile(race="other"))
    rows = store._get("records:49")
    profs = store._get("profiles:49")
    assert "session" not in json.dumps(rows)
    assert set(rows[0]) == {"ballot_ref", "ward_id", "sorted", "amounts"}
    assert set(profs[0]) == {"race", "age_band", "income_band", "education_band"}
    store.close()


def test_idempotency_tokens(tmp_path):
    store = CorpusStore(str(tmp_path))
    assert not store.seen_token("t1")
    store.mark_token("t1")
    assert store.seen_token("t1")
    store.close()
