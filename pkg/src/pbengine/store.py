"""Embedded persistence: sqlite key-value corpus plus per-session JSON-lines
event logs.

Anonymization happens here: finalized records and demographic profiles are
written to per-ward buckets with no session key, profiles are kept as a
sorted multiset so storage order reveals nothing, and the durable event log
redacts the demographics payload.
"""

from __future__ import annotations

import json
import os
import sqlite3
import threading
from typing import Iterable

from .errors import VoteError
from .model import (
    Ballot,
    CensusTable,
    DemographicProfile,
    VoteRecord,
    ballot_from_dict,
    ballot_to_dict,
    census_from_dict,
    census_to_dict,
    profile_from_dict,
    profile_to_dict,
    record_from_dict,
    record_to_dict,
)
from .session import REDACTED, VoteSession, replay


class CorpusStore:
    """Single-file transactional store; safe for many reader/writer threads."""

    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        os.makedirs(data_dir, exist_ok=True)
        self.events_dir = os.path.join(data_dir, "events")
        os.makedirs(self.events_dir, exist_ok=True)
        self._lock = threading.RLock()
        self._db = sqlite3.connect(
            os.path.join(data_dir, "corpus.db"), check_same_thread=False
        )
        self._db.execute("CREATE TABLE IF NOT EXISTS kv (key TEXT PRIMARY KEY, value TEXT)")
        self._db.commit()

    def close(self) -> None:
        self._db.close()

    # --- raw kv ---------------------------------------------------------

    def _get(self, key: str):
        with self._lock:
            row = self._db.execute("SELECT value FROM kv WHERE key = ?", (key,)).fetchone()
        return None if row is None else json.loads(row[0])

    def _put(self, key: str, value) -> None:
        with self._lock:
            self._db.execute(
                "INSERT INTO kv (key, value) VALUES (?, ?) "
                "ON CONFLICT(key) DO UPDATE SET value = excluded.value",
                (key, json.dumps(value, sort_keys=True)),
            )
            self._db.commit()

    def _keys(self, prefix: str) -> list[str]:
        with self._lock:
            rows = self._db.execute(
                "SELECT key FROM kv WHERE key LIKE ?", (prefix + "%",)
            ).fetchall()
        return sorted(r[0] for r in rows)

    # --- ballots ----------------------------------------------------------

    def put_ballot(self, ballot_ref: str, ballot: Ballot) -> None:
        self._put(f"ballot:{ballot_ref}", ballot_to_dict(ballot))

    def get_ballot(self, ballot_ref: str) -> Ballot | None:
        raw = self._get(f"ballot:{ballot_ref}")
        return None if raw is None else ballot_from_dict(raw)

    def ballots(self) -> dict[str, Ballot]:
        out = {}
        for key in self._keys("ballot:"):
            out[key[len("ballot:"):]] = ballot_from_dict(self._get(key))
        return out

    # --- census -----------------------------------------------------------

    def put_census(self, census: CensusTable) -> None:
        self._put("census", census_to_dict(census))

    def get_census(self) -> CensusTable | None:
        raw = self._get("census")
        return None if raw is None else census_from_dict(raw)

    # --- finalized corpus ---------------------------------------------------

    def append_record(self, record: VoteRecord) -> None:
        key = f"records:{record.ward_id}"
        with self._lock:
            rows = self._get(key) or []
            rows.append(record_to_dict(record))
            self._put(key, rows)

    def records(self, ward: int) -> list[VoteRecord]:
        rows = self._get(f"records:{ward}") or []
        return [record_from_dict(r) for r in rows]

    def add_profile(self, ward: int, profile: DemographicProfile) -> None:
        # sorted multiset: insertion position carries no arrival information
        key = f"profiles:{ward}"
        with self._lock:
            rows = self._get(key) or []
            rows.append(profile_to_dict(profile))
            rows.sort(key=lambda p: sorted(p.items()))
            self._put(key, rows)

    def profiles(self, ward: int) -> list[DemographicProfile]:
        rows = self._get(f"profiles:{ward}") or []
        return [profile_from_dict(r) for r in rows]

    def wards_with_records(self) -> list[int]:
        return [int(k[len("records:"):]) for k in self._keys("records:")]

    # --- idempotency ---------------------------------------------------------

    def seen_token(self, token: str) -> bool:
        return self._get(f"token:{token}") is not None

    def mark_token(self, token: str) -> None:
        self._put(f"token:{token}", True)

    # --- event logs ----------------------------------------------------------

    def _log_path(self, session_id: str) -> str:
        safe = "".join(ch for ch in session_id if ch.isalnum() or ch in "-_")
        return os.path.join(self.events_dir, f"{safe}.jsonl")

    def append_event(self, session_id: str, event: dict) -> None:
        """Durable audit trail; demographics payloads are redacted so the log
        never joins a profile to this session's allocations."""
        stored = dict(event)
        if stored.get("op") == "record_demographics":
            stored = {**stored, "args": {"profile": REDACTED}}
        with self._lock:
            with open(self._log_path(session_id), "a", encoding="utf-8") as fh:
                fh.write(json.dumps(stored, sort_keys=True) + "\n")
                fh.flush()

    def read_events(self, session_id: str) -> list[dict]:
        path = self._log_path(session_id)
        if not os.path.exists(path):
            raise VoteError("session-not-found", f"no event log for session {session_id!r}")
        events = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    events.append(json.loads(line))
        return events

    def recover_sessions(self, ballots: dict[str, Ballot]) -> dict[str, VoteSession]:
        """Rebuild live sessions by replaying the durable logs. Profiles are
        not recoverable (the logs redact them by design)."""
        sessions: dict[str, VoteSession] = {}
        for name in sorted(os.listdir(self.events_dir)):
            if not name.endswith(".jsonl"):
                continue
            session_id = name[: -len(".jsonl")]
            try:
                session = replay(self.read_events(session_id), ballots)
            except VoteError:
                continue  # truncated or foreign log: skip, never crash recovery
            sessions[session.session_id] = session
        return sessions


def load_ballots_file(path: str) -> dict[str, Ballot]:
    """Ballot fixtures: one JSON object or a list; an `id` field keys the
    registry, defaulting to ward-<ward_id>."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise VoteError("io-error", f"cannot read ballots file: {exc}") from exc
    except ValueError as exc:
        raise VoteError("parse-error", f"ballots file is not valid JSON: {exc}") from exc
    items = data if isinstance(data, list) else [data]
    out: dict[str, Ballot] = {}
    for item in items:
        ballot = ballot_from_dict(item)
        ref = str(item.get("id") or f"ward-{ballot.ward_id}")
        out[ref] = ballot
    return out


def write_jsonl(path: str, lines: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(json.dumps(line, sort_keys=True, separators=(",", ":")) + "\n")


def read_corpus_jsonl(path: str) -> tuple[dict | None, list[tuple[DemographicProfile | None, VoteRecord]]]:
    """Read a simulated or exported corpus: optional metadata head line, then
    one vote per line."""
    meta = None
    votes: list[tuple[DemographicProfile | None, VoteRecord]] = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise VoteError("io-error", f"cannot read corpus: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise VoteError("parse-error", f"line {lineno}: {exc}") from exc
            kind = obj.get("kind")
            if kind == "simulation-meta":
                meta = obj
                continue
            try:
                profile = profile_from_dict(obj["profile"]) if obj.get("profile") else None
                votes.append((profile, record_from_dict(obj["record"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise VoteError("parse-error", f"line {lineno}: bad vote record ({exc})") from exc
    return meta, votes
