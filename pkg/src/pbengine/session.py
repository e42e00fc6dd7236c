"""Staged voting session: sort, blind allocation, cost-revealed check.

Stages move forward only. Edit operations pull a session forward into the
stage they belong to (a voter may start allocating straight from the
overview), but the allocation -> check boundary is crossed only by
`reveal_costs`, so cost disclosure is always an explicit, logged event.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import VoteError
from .model import (
    Ballot,
    DemographicProfile,
    VoteRecord,
    allocation_sum,
    profile_from_dict,
    profile_to_dict,
    validate_ballot,
    validate_profile,
)

STAGES = ("Overview", "Sort", "AllocateBlind", "CheckWithCosts", "Demographics", "Done")
_STAGE_INDEX = {s: i for i, s in enumerate(STAGES)}

OVERVIEW, SORT, ALLOCATE_BLIND, CHECK_WITH_COSTS, DEMOGRAPHICS, DONE = STAGES

REDACTED = "__redacted__"


@dataclass
class VoteSession:
    session_id: str
    ballot_ref: str
    ballot: Ballot
    stage: str = OVERVIEW
    sorted_ids: list[str] = field(default_factory=list)
    unsorted_ids: set[str] = field(default_factory=set)
    amounts: dict[str, int] = field(default_factory=dict)
    profile: DemographicProfile | None = None
    event_log: list[dict] = field(default_factory=list)
    _total: int = 0

    @property
    def remaining(self) -> int:
        return self.ballot.budget_total - self._total

    def log(self, ts: float, op: str, args: dict) -> None:
        self.event_log.append({"ts": ts, "op": op, "args": args})


Clock = Callable[[], float]


def _require_not_done(session: VoteSession) -> None:
    if session.stage == DONE:
        raise VoteError("already-finalized", "session is finalized; no further edits")


def _stage_at_most(session: VoteSession, stage: str) -> bool:
    return _STAGE_INDEX[session.stage] <= _STAGE_INDEX[stage]


def create_session(
    ballot_ref: str,
    ballots: Mapping[str, Ballot],
    *,
    session_id: str | None = None,
    clock: Clock = time.time,
) -> VoteSession:
    """Open a session at the overview stage with an all-zero allocation."""
    ballot = ballots.get(ballot_ref)
    if ballot is None:
        raise VoteError("ballot-not-found", f"no ballot {ballot_ref!r}")
    violations = validate_ballot(ballot)
    if violations:
        raise VoteError("ballot-not-found", f"ballot {ballot_ref!r} fails validation: {violations[0].code}")
    sid = session_id or uuid.uuid4().hex
    session = VoteSession(
        session_id=sid,
        ballot_ref=ballot_ref,
        ballot=ballot,
        unsorted_ids=set(ballot.project_ids()),
        amounts={pid: 0 for pid in ballot.project_ids()},
    )
    session.log(clock(), "create_session", {"ballot_ref": ballot_ref, "session_id": sid})
    return session


def advance_stage(session: VoteSession, *, clock: Clock = time.time) -> VoteSession:
    """Move forward one page. The allocation -> check step must go through
    reveal_costs, and leaving demographics must go through finalize."""
    _require_not_done(session)
    nxt = {OVERVIEW: SORT, SORT: ALLOCATE_BLIND, CHECK_WITH_COSTS: DEMOGRAPHICS}.get(session.stage)
    if nxt is None:
        raise VoteError("stage-violation", f"cannot advance from {session.stage} without reveal/finalize")
    session.stage = nxt
    session.log(clock(), "advance_stage", {})
    return session


def submit_sort(session: VoteSession, order: list[str], *, clock: Clock = time.time) -> VoteSession:
    _require_not_done(session)
    if not _stage_at_most(session, SORT):
        raise VoteError("stage-violation", f"sort not editable in stage {session.stage}")
    ids = set(session.ballot.project_ids())
    if len(set(order)) != len(order):
        raise VoteError("invalid-sort", "sort order contains a duplicate id")
    for pid in order:
        if pid not in ids:
            raise VoteError("invalid-sort", f"sort order names unknown project {pid!r}")
    session.stage = SORT
    session.sorted_ids = list(order)
    session.unsorted_ids = ids - set(order)
    session.log(clock(), "submit_sort", {"order": list(order)})
    return session


def _check_allocation_editable(session: VoteSession, project_id: str) -> None:
    """Validate stage and project without mutating; raises on violation."""
    if session.stage not in (ALLOCATE_BLIND, CHECK_WITH_COSTS) and not _stage_at_most(session, SORT):
        raise VoteError("stage-violation", f"allocation not editable in stage {session.stage}")
    if project_id not in session.amounts:
        raise VoteError("project-not-found", f"no project {project_id!r} on ballot")


def _enter_allocation(session: VoteSession) -> None:
    if _stage_at_most(session, SORT):
        session.stage = ALLOCATE_BLIND


def set_allocation(
    session: VoteSession, project_id: str, amount: int, *, clock: Clock = time.time
) -> VoteSession:
    """Record an explicit dollar amount; rejects loudly rather than clamping."""
    _require_not_done(session)
    _check_allocation_editable(session, project_id)
    if amount < 0:
        raise VoteError("negative-amount", "amount must be nonnegative", "amount")
    if amount % session.ballot.granularity != 0:
        raise VoteError(
            "granularity-violation",
            f"amount must be a multiple of {session.ballot.granularity}",
            "amount",
        )
    new_total = session._total - session.amounts[project_id] + amount
    if new_total > session.ballot.budget_total:
        raise VoteError("budget-exceeded", "allocation would exceed the total budget", "amount")
    _enter_allocation(session)
    session.amounts[project_id] = amount
    session._total = new_total
    session.log(clock(), "set_allocation", {"project_id": project_id, "amount": amount})
    return session


def fill_up(session: VoteSession, project_id: str, *, clock: Clock = time.time) -> VoteSession:
    """Give the project all remaining funds; no-op once the budget is spent."""
    _require_not_done(session)
    _check_allocation_editable(session, project_id)
    _enter_allocation(session)
    session.amounts[project_id] += session.remaining
    session._total = session.ballot.budget_total
    session.log(clock(), "fill_up", {"project_id": project_id})
    return session


def clear(session: VoteSession, project_id: str, *, clock: Clock = time.time) -> VoteSession:
    _require_not_done(session)
    _check_allocation_editable(session, project_id)
    _enter_allocation(session)
    session._total -= session.amounts[project_id]
    session.amounts[project_id] = 0
    session.log(clock(), "clear", {"project_id": project_id})
    return session


def cost_overlay(session: VoteSession) -> dict[str, dict]:
    """Per-project cost markings: estimate, granularity-rounded cost, met flag."""
    overlay = {}
    for pid in session.ballot.project_ids():
        rounded = session.ballot.rounded_cost(pid)
        overlay[pid] = {
            "cost_estimate": session.ballot.project(pid).cost_estimate,
            "rounded_cost": rounded,
            "met": session.amounts[pid] >= rounded,
        }
    return overlay


def reveal_costs(session: VoteSession, *, clock: Clock = time.time) -> dict[str, dict]:
    """Disclose cost estimates; first call moves AllocateBlind -> CheckWithCosts."""
    _require_not_done(session)
    if session.stage not in (ALLOCATE_BLIND, CHECK_WITH_COSTS):
        raise VoteError("stage-violation", f"costs cannot be revealed in stage {session.stage}")
    session.stage = CHECK_WITH_COSTS
    session.log(clock(), "reveal_costs", {})
    return cost_overlay(session)


def set_to_cost(session: VoteSession, project_id: str, *, clock: Clock = time.time) -> dict:
    """Raise (or lower) the amount to the rounded cost, clamped by the budget."""
    _require_not_done(session)
    if session.stage != CHECK_WITH_COSTS:
        raise VoteError("stage-violation", f"set-to-cost requires the check stage, not {session.stage}")
    if project_id not in session.amounts:
        raise VoteError("project-not-found", f"no project {project_id!r} on ballot")
    rounded = session.ballot.rounded_cost(project_id)
    ceiling = session.amounts[project_id] + session.remaining
    target = min(rounded, ceiling)
    session._total = session._total - session.amounts[project_id] + target
    session.amounts[project_id] = target
    session.log(clock(), "set_to_cost", {"project_id": project_id})
    return {"project_id": project_id, "amount": target, "clamped": target < rounded}


def record_demographics(
    session: VoteSession,
    profile: DemographicProfile,
    *,
    vocabulary: dict[str, tuple[str, ...]] | None = None,
    clock: Clock = time.time,
) -> VoteSession:
    """Store the optional survey; an all-undisclosed profile is a valid opt-out."""
    _require_not_done(session)
    if session.stage not in (CHECK_WITH_COSTS, DEMOGRAPHICS):
        raise VoteError("stage-violation", f"demographics not open in stage {session.stage}")
    violations = validate_profile(profile, vocabulary)
    if violations:
        v = violations[0]
        raise VoteError(v.code, v.message, v.field)
    session.stage = DEMOGRAPHICS
    session.profile = profile
    session.log(clock(), "record_demographics", {"profile": profile_to_dict(profile)})
    return session


def finalize(session: VoteSession, *, clock: Clock = time.time) -> VoteRecord:
    """Close the session; the returned record carries no session identifier."""
    if session.stage == DONE:
        raise VoteError("already-finalized", "session is already finalized")
    if session.stage not in (CHECK_WITH_COSTS, DEMOGRAPHICS):
        raise VoteError("stage-violation", f"cannot finalize from stage {session.stage}")
    session.stage = DONE
    session.log(clock(), "finalize", {})
    return VoteRecord(
        ballot_ref=session.ballot_ref,
        ward_id=session.ballot.ward_id,
        sorted_ids=tuple(session.sorted_ids),
        amounts=dict(session.amounts),
    )


# --- serialization and replay ------------------------------------------------

def session_state(session: VoteSession) -> dict:
    """Full module-level state, used for audits and replay comparison."""
    return {
        "session_id": session.session_id,
        "ballot_ref": session.ballot_ref,
        "stage": session.stage,
        "sorted": list(session.sorted_ids),
        "unsorted": sorted(session.unsorted_ids),
        "amounts": {pid: session.amounts[pid] for pid in sorted(session.amounts)},
        "profile": profile_to_dict(session.profile) if session.profile else None,
        "event_log": list(session.event_log),
    }


def session_view(session: VoteSession) -> dict:
    """Client-facing snapshot. Cost figures appear only once the session has
    reached the check stage, and the profile is never echoed back."""
    view = {
        "session_id": session.session_id,
        "ballot_ref": session.ballot_ref,
        "stage": session.stage,
        "sorted": list(session.sorted_ids),
        "unsorted": sorted(session.unsorted_ids),
        "amounts": {pid: session.amounts[pid] for pid in sorted(session.amounts)},
        "remaining": session.remaining,
        "budget_total": session.ballot.budget_total,
        "granularity": session.ballot.granularity,
        "profile_recorded": session.profile is not None,
    }
    if _STAGE_INDEX[session.stage] >= _STAGE_INDEX[CHECK_WITH_COSTS]:
        view["costs"] = cost_overlay(session)
    return view


def replay(events: list[dict], ballots: Mapping[str, Ballot]) -> VoteSession:
    """Rebuild a session by re-applying its event log.

    Timestamps are taken from the log, so a replayed session reproduces the
    original state bit-exactly. A demographics event whose payload was
    redacted for storage advances the stage but restores no profile.
    """
    if not events or events[0]["op"] != "create_session":
        raise VoteError("invalid-log", "event log must start with create_session")
    head = events[0]
    session = create_session(
        head["args"]["ballot_ref"],
        ballots,
        session_id=head["args"]["session_id"],
        clock=lambda: head["ts"],
    )
    for event in events[1:]:
        op, args = event["op"], event["args"]
        clock = lambda ts=event["ts"]: ts
        if op == "advance_stage":
            advance_stage(session, clock=clock)
        elif op == "submit_sort":
            submit_sort(session, list(args["order"]), clock=clock)
        elif op == "set_allocation":
            set_allocation(session, args["project_id"], args["amount"], clock=clock)
        elif op == "fill_up":
            fill_up(session, args["project_id"], clock=clock)
        elif op == "clear":
            clear(session, args["project_id"], clock=clock)
        elif op == "reveal_costs":
            reveal_costs(session, clock=clock)
        elif op == "set_to_cost":
            set_to_cost(session, args["project_id"], clock=clock)
        elif op == "record_demographics":
            if args.get("profile") == REDACTED:
                if session.stage == CHECK_WITH_COSTS:
                    session.stage = DEMOGRAPHICS
                session.log(event["ts"], op, dict(args))
            else:
                record_demographics(session, profile_from_dict(args["profile"]), clock=clock)
        elif op == "finalize":
            finalize(session, clock=clock)
        else:
            raise VoteError("invalid-log", f"unknown logged operation {op!r}")
    return session
