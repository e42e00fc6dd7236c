"""HTTP JSON service over ballots, sessions, and result analytics.

Every mutation goes through the session module under a per-session lock;
module error codes map onto 404 (missing resource), 409 (stage conflicts),
and 422 (invariant violations).
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field, replace
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import aggregate as agg
from . import analytics, session as sess
from .census_io import parse_census_csv
from .errors import VoteError
from .model import Ballot, profile_from_dict
from .store import CorpusStore, load_ballots_file

NOT_FOUND_CODES = {"ballot-not-found", "session-not-found", "ward-not-found", "project-not-found"}
CONFLICT_CODES = {"stage-violation", "already-finalized"}


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    data_dir: str = "./data"
    ballots_path: str | None = None
    census_path: str | None = None
    bin_count: int = analytics.DEFAULT_BIN_COUNT
    theta_default: float = 1.0
    live_results: bool = True


def parse_service_config(text: str) -> ServiceConfig:
    config = ServiceConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise VoteError("parse-error", f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "bind":
            host, _, port = value.partition(":")
            config.host = host or config.host
            if port:
                config.port = int(port)
        elif key == "data_dir":
            config.data_dir = value
        elif key == "ballots":
            config.ballots_path = value
        elif key == "census":
            config.census_path = value
        elif key == "bin_count":
            config.bin_count = int(value)
        elif key == "theta":
            config.theta_default = float(value)
        elif key == "live_results":
            config.live_results = value.lower() in ("1", "true", "yes", "open")
        else:
            raise VoteError("parse-error", f"line {lineno}: unknown key {key!r}")
    return config


def apply_env_overrides(config: ServiceConfig, env=os.environ) -> ServiceConfig:
    updates = {}
    if env.get("PB_BIND"):
        host, _, port = env["PB_BIND"].partition(":")
        if host:
            updates["host"] = host
        if port:
            updates["port"] = int(port)
    if env.get("PB_DATA_DIR"):
        updates["data_dir"] = env["PB_DATA_DIR"]
    if env.get("PB_BALLOTS"):
        updates["ballots_path"] = env["PB_BALLOTS"]
    if env.get("PB_CENSUS"):
        updates["census_path"] = env["PB_CENSUS"]
    if env.get("PB_BIN_COUNT"):
        updates["bin_count"] = int(env["PB_BIN_COUNT"])
    if env.get("PB_THETA"):
        updates["theta_default"] = float(env["PB_THETA"])
    if env.get("PB_LIVE_RESULTS"):
        updates["live_results"] = env["PB_LIVE_RESULTS"].lower() in ("1", "true", "yes", "open")
    return replace(config, **updates)


def public_ballot_view(ballot_ref: str, ballot: Ballot) -> dict:
    """Voter-facing projection: cost estimates stay hidden until reveal."""
    return {
        "id": ballot_ref,
        "ward_id": ballot.ward_id,
        "budget_total": ballot.budget_total,
        "granularity": ballot.granularity,
        "projects": [
            {
                "id": p.id,
                "name": p.name,
                "description": p.description,
                "category": p.category,
                "image_ref": p.image_ref,
                "divisible": p.divisible,
            }
            for p in ballot.projects
        ],
    }


# Eligibility hook: deployments may wire in real token checking; the default
# stub admits everyone (eligibility policy is out of scope here).
VoterTokenCheck = Callable[[str | None], bool]


def accept_all_tokens(_token: str | None) -> bool:
    return True


class SessionBody(BaseModel):
    ballot_ref: str
    voter_token: str | None = None


class SortBody(BaseModel):
    order: list[str]


class AllocationBody(BaseModel):
    project_id: str
    amount: int


class ProjectBody(BaseModel):
    project_id: str


class DemographicsBody(BaseModel):
    race: str = "undisclosed"
    age_band: str = "undisclosed"
    income_band: str = "undisclosed"
    education_band: str = "undisclosed"


class FinalizeBody(BaseModel):
    idempotency_token: str | None = None


@dataclass
class ServiceState:
    config: ServiceConfig
    store: CorpusStore
    ballots: dict[str, Ballot]
    sessions: dict[str, sess.VoteSession] = field(default_factory=dict)
    locks: dict[str, threading.Lock] = field(default_factory=dict)
    registry_lock: threading.Lock = field(default_factory=threading.Lock)

    def session_lock(self, session_id: str) -> threading.Lock:
        with self.registry_lock:
            return self.locks.setdefault(session_id, threading.Lock())

    def get_session(self, session_id: str) -> sess.VoteSession:
        found = self.sessions.get(session_id)
        if found is None:
            raise VoteError("session-not-found", f"no session {session_id!r}")
        return found


def create_app(
    config: ServiceConfig | None = None,
    voter_token_check: VoterTokenCheck = accept_all_tokens,
) -> FastAPI:
    config = config or ServiceConfig()
    store = CorpusStore(config.data_dir)

    ballots = store.ballots()
    if config.ballots_path:
        for ref, ballot in load_ballots_file(config.ballots_path).items():
            ballots[ref] = ballot
            store.put_ballot(ref, ballot)
    if config.census_path:
        from .census_io import load_census_file

        census, _ = load_census_file(config.census_path)
        store.put_census(census)

    state = ServiceState(config=config, store=store, ballots=ballots)
    state.sessions = store.recover_sessions(ballots)

    app = FastAPI(title="pbengine", docs_url=None, redoc_url=None)
    app.state.engine = state

    @app.exception_handler(VoteError)
    async def vote_error_handler(_request: Request, exc: VoteError):
        if exc.code in NOT_FOUND_CODES:
            status = 404
        elif exc.code in CONFLICT_CODES:
            status = 409
        else:
            status = 422
        return JSONResponse(status_code=status, content=exc.to_dict())

    def persist_new_events(session: sess.VoteSession, start: int) -> None:
        for event in session.event_log[start:]:
            store.append_event(session.session_id, event)

    def locked(session_id: str):
        return state.session_lock(session_id)

    # --- ballots ---------------------------------------------------------

    @app.get("/ballots/{ballot_ref}")
    def get_ballot(ballot_ref: str):
        ballot = state.ballots.get(ballot_ref)
        if ballot is None:
            raise VoteError("ballot-not-found", f"no ballot {ballot_ref!r}")
        return public_ballot_view(ballot_ref, ballot)

    # --- sessions ----------------------------------------------------------

    @app.post("/sessions", status_code=201)
    def post_session(body: SessionBody):
        if not voter_token_check(body.voter_token):
            raise VoteError("voter-token-rejected", "voter token was not accepted")
        session = sess.create_session(body.ballot_ref, state.ballots)
        with state.registry_lock:
            state.sessions[session.session_id] = session
        persist_new_events(session, 0)
        return sess.session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return sess.session_view(state.get_session(session_id))

    def _mutate(session_id: str, fn):
        with locked(session_id):
            session = state.get_session(session_id)
            start = len(session.event_log)
            result = fn(session)
            persist_new_events(session, start)
            return session, result

    @app.post("/sessions/{session_id}/sort")
    def post_sort(session_id: str, body: SortBody):
        session, _ = _mutate(session_id, lambda s: sess.submit_sort(s, body.order))
        return sess.session_view(session)

    @app.post("/sessions/{session_id}/allocation")
    def post_allocation(session_id: str, body: AllocationBody):
        session, _ = _mutate(
            session_id, lambda s: sess.set_allocation(s, body.project_id, body.amount)
        )
        return sess.session_view(session)

    @app.post("/sessions/{session_id}/fill-up")
    def post_fill_up(session_id: str, body: ProjectBody):
        session, _ = _mutate(session_id, lambda s: sess.fill_up(s, body.project_id))
        return sess.session_view(session)

    @app.post("/sessions/{session_id}/clear")
    def post_clear(session_id: str, body: ProjectBody):
        session, _ = _mutate(session_id, lambda s: sess.clear(s, body.project_id))
        return sess.session_view(session)

    @app.post("/sessions/{session_id}/advance")
    def post_advance(session_id: str):
        session, _ = _mutate(session_id, sess.advance_stage)
        return sess.session_view(session)

    @app.post("/sessions/{session_id}/reveal")
    def post_reveal(session_id: str):
        session, overlay = _mutate(session_id, sess.reveal_costs)
        return {"costs": overlay, "session": sess.session_view(session)}

    @app.post("/sessions/{session_id}/set-to-cost")
    def post_set_to_cost(session_id: str, body: ProjectBody):
        session, result = _mutate(session_id, lambda s: sess.set_to_cost(s, body.project_id))
        return {"result": result, "session": sess.session_view(session)}

    @app.post("/sessions/{session_id}/demographics")
    def post_demographics(session_id: str, body: DemographicsBody):
        profile = profile_from_dict(body.model_dump())
        session, _ = _mutate(session_id, lambda s: sess.record_demographics(s, profile))
        return sess.session_view(session)

    @app.post("/sessions/{session_id}/finalize")
    def post_finalize(session_id: str, body: FinalizeBody):
        token = body.idempotency_token
        if not token:
            raise VoteError("token-required", "finalize requires an idempotency token")
        with locked(session_id):
            session = state.get_session(session_id)
            if store.seen_token(token):
                return {"status": "finalized", "session": sess.session_view(session)}
            start = len(session.event_log)
            record = sess.finalize(session)
            store.append_record(record)
            if session.profile is not None:
                store.add_profile(session.ballot.ward_id, session.profile)
            store.mark_token(token)
            persist_new_events(session, start)
            return {"status": "finalized", "session": sess.session_view(session)}

    # --- census ingest --------------------------------------------------------

    @app.post("/census")
    async def post_census(request: Request):
        text = (await request.body()).decode("utf-8")
        census, warnings = parse_census_csv(text)
        store.put_census(census)
        return {"wards": census.wards(), "warnings": warnings}

    # --- results ---------------------------------------------------------------

    def _gate_results() -> None:
        if not state.config.live_results:
            raise VoteError("results-gated", "results are gated until polls close")

    def _ward_corpus(ward: int):
        records = store.records(ward)
        if not records:
            raise VoteError("no-votes", f"no finalized votes for ward {ward}")
        refs = {r.ballot_ref for r in records}
        if len(refs) != 1:
            raise VoteError("mixed-ballots", f"ward {ward} mixes ballots {sorted(refs)}")
        ballot = state.ballots.get(next(iter(refs))) or store.get_ballot(next(iter(refs)))
        if ballot is None:
            raise VoteError("ballot-not-found", f"ballot for ward {ward} records is missing")
        return ballot, records

    @app.get("/results/{ward}/aggregate")
    def get_aggregate(ward: int, rules: str | None = None, theta: float | None = None,
                      budget: int | None = None):
        _gate_results()
        ballot, records = _ward_corpus(ward)
        rule_list = [r.strip() for r in rules.split(",")] if rules else list(agg.RULES)
        result = agg.aggregate(
            ballot,
            records,
            rules=rule_list,
            theta=theta if theta is not None else state.config.theta_default,
            budget=budget,
        )
        return {"ward": ward, "votes": len(records), **agg.result_to_dict(result)}

    @app.get("/results/demographics")
    def get_demographics(wards: str | None = None, axis: str = "race", mode: str = "counts"):
        _gate_results()
        census = store.get_census()
        if census is None:
            raise VoteError("insufficient-data", "no census table ingested")
        ward_list = (
            [int(w) for w in wards.split(",")] if wards else list(analytics.DEFAULT_WARDS)
        )
        profiles_by_ward = {w: store.profiles(w) for w in ward_list}
        matrix = analytics.demographic_matrix(
            census, profiles_by_ward, ward_list, axis, mode, state.config.bin_count
        )
        return matrix.to_dict()

    @app.get("/results/{ward}/strips")
    def get_strips(ward: int):
        _gate_results()
        ballot, records = _ward_corpus(ward)
        triples = analytics.allocation_strips(ballot, records)
        payload = analytics.strips_to_dict(triples)
        payload["ward"] = ward
        payload["voters"] = len(records)
        payload["budget_total"] = ballot.budget_total
        return payload

    return app


def run(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="warning")
