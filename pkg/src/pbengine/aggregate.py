"""Vote aggregation rules over finalized records.

All rules price projects at their granularity-rounded cost and break ties by
lower project id, so results are reproducible and auditable. Equal shares
runs on exact rationals; dollars become integers only at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import VoteError
from .model import Ballot, VoteRecord

RULES = ("totals", "approval", "knapsack-greedy", "equal-shares", "borda")


@dataclass(frozen=True)
class ProjectStats:
    total_dollars: int
    mean_dollars: int
    median_dollars: int
    approval_count: int


@dataclass(frozen=True)
class AggregateResult:
    per_project: dict[str, ProjectStats]
    funded: dict[str, list[str]]
    rule_meta: dict[str, str]
    borda_scores: dict[str, int]


def _require_votes(votes: Sequence[VoteRecord]) -> None:
    if not votes:
        raise VoteError("no-votes", "vote corpus is empty")


def round_half_up(value: Fraction) -> int:
    # floor(value + 1/2), exact for nonnegative rationals
    return (2 * value.numerator + value.denominator) // (2 * value.denominator)


def totals(ballot: Ballot, votes: Sequence[VoteRecord]) -> dict[str, dict[str, int]]:
    """Per-project total, mean, and median dollars (mean/median rounded
    half-up to whole dollars)."""
    _require_votes(votes)
    out = {}
    n = len(votes)
    for pid in ballot.project_ids():
        amounts = sorted(v.amount(pid) for v in votes)
        total = sum(amounts)
        if n % 2 == 1:
            median = Fraction(amounts[n // 2])
        else:
            median = Fraction(amounts[n // 2 - 1] + amounts[n // 2], 2)
        out[pid] = {
            "total_dollars": total,
            "mean_dollars": round_half_up(Fraction(total, n)),
            "median_dollars": round_half_up(median),
        }
    return out


def _theta_fraction(theta) -> Fraction:
    frac = Fraction(str(theta)) if isinstance(theta, float) else Fraction(theta)
    if frac <= 0:
        raise VoteError("invalid-theta", "approval threshold theta must be > 0")
    return frac


def approves(vote: VoteRecord, rounded_cost: int, theta: Fraction, pid: str) -> bool:
    return Fraction(vote.amount(pid)) >= theta * rounded_cost


def approvals(ballot: Ballot, votes: Sequence[VoteRecord], theta=1.0) -> dict[str, int]:
    """A voter approves a project iff their amount covers theta times the
    rounded cost."""
    _require_votes(votes)
    th = _theta_fraction(theta)
    return {
        pid: sum(1 for v in votes if approves(v, ballot.rounded_cost(pid), th, pid))
        for pid in ballot.project_ids()
    }


def greedy_knapsack(
    ballot: Ballot, votes: Sequence[VoteRecord], budget: int | None = None
) -> tuple[list[str], str]:
    """Fund projects by total-dollars-per-rounded-cost, skipping any project
    the remaining budget cannot cover. Returns (funding order, diagnostics)."""
    _require_votes(votes)
    remaining = ballot.budget_total if budget is None else int(budget)
    scored = []
    for pid in ballot.project_ids():
        total = sum(v.amount(pid) for v in votes)
        if total > 0:
            scored.append((Fraction(total, ballot.rounded_cost(pid)), pid))
    scored.sort(key=lambda item: (-item[0], item[1]))
    funded: list[str] = []
    skipped = 0
    for _, pid in scored:
        cost = ballot.rounded_cost(pid)
        if cost <= remaining:
            funded.append(pid)
            remaining -= cost
        else:
            skipped += 1
    return funded, f"budget left {remaining}; skipped {skipped} unaffordable"


def equal_shares_detail(
    ballot: Ballot, votes: Sequence[VoteRecord], budget: int | None = None, theta=1.0
) -> tuple[list[str], dict[int, Fraction]]:
    """Method of equal shares over derived approval ballots.

    Every voter starts with budget/n. Each round funds the approved project
    minimizing the maximum per-supporter payment rho, charging supporters
    min(rho, their remaining endowment). Returns the funding order and the
    exact charge per voter index.
    """
    _require_votes(votes)
    total_budget = ballot.budget_total if budget is None else int(budget)
    th = _theta_fraction(theta)
    n = len(votes)
    endowment = {i: Fraction(total_budget, n) for i in range(n)}
    supporters = {}
    for pid in ballot.project_ids():
        cost = ballot.rounded_cost(pid)
        backing = [i for i, v in enumerate(votes) if approves(v, cost, th, pid)]
        if backing:
            supporters[pid] = backing
    charges = {i: Fraction(0) for i in range(n)}
    funded: list[str] = []
    open_projects = sorted(supporters)
    while True:
        best_pid = None
        best_rho = None
        for pid in open_projects:
            cost = Fraction(ballot.rounded_cost(pid))
            backing = supporters[pid]
            if sum(endowment[i] for i in backing) < cost:
                continue
            # exact max per-supporter payment: poorest supporters pay all
            # they have, the rest split the leftover equally
            paid = Fraction(0)
            payers = len(backing)
            rho = None
            for b in sorted(endowment[i] for i in backing):
                share = (cost - paid) / payers
                if b >= share:
                    rho = share
                    break
                paid += b
                payers -= 1
            if rho is None:
                continue
            if best_rho is None or rho < best_rho or (rho == best_rho and pid < best_pid):
                best_rho, best_pid = rho, pid
        if best_pid is None:
            break
        for i in supporters[best_pid]:
            pay = min(best_rho, endowment[i])
            endowment[i] -= pay
            charges[i] += pay
        funded.append(best_pid)
        open_projects.remove(best_pid)
    return funded, charges


def equal_shares(
    ballot: Ballot, votes: Sequence[VoteRecord], budget: int | None = None, theta=1.0
) -> tuple[list[str], str]:
    funded, charges = equal_shares_detail(ballot, votes, budget, theta)
    spent = sum(charges.values())
    return funded, f"charged {float(spent):.2f} across {len(votes)} voters"


def borda_from_sorts(
    ballot: Ballot, votes: Sequence[VoteRecord]
) -> list[tuple[str, int]]:
    """Positional scores from (possibly partial) sort orders: position i of a
    k-long order earns k-1-i points, unranked projects earn 0."""
    _require_votes(votes)
    scores = {pid: 0 for pid in ballot.project_ids()}
    for vote in votes:
        k = len(vote.sorted_ids)
        for i, pid in enumerate(vote.sorted_ids):
            if pid in scores:
                scores[pid] += k - 1 - i
    return sorted(scores.items(), key=lambda item: (-item[1], item[0]))


def _count_inversions(seq: list[int]) -> int:
    # merge-sort inversion count
    if len(seq) <= 1:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    inversions = _count_inversions(left) + _count_inversions(right)
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            inversions += len(left) - i
            merged.append(right[j])
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    seq[:] = merged
    return inversions


def rank_churn(record: VoteRecord) -> int:
    """Kendall-tau distance between the submitted sort order and the order
    implied by the final allocation (amount descending, ties keep the
    submitted order)."""
    ranked = list(record.sorted_ids)
    position = {pid: i for i, pid in enumerate(ranked)}
    for pid, amount in record.amounts.items():
        if amount > 0 and pid not in position:
            raise VoteError(
                "incomparable-orders",
                f"project {pid!r} has a nonzero allocation but was not ranked",
            )
    implied = sorted(ranked, key=lambda pid: (-record.amount(pid), position[pid]))
    implied_rank = {pid: i for i, pid in enumerate(implied)}
    return _count_inversions([implied_rank[pid] for pid in ranked])


def aggregate(
    ballot: Ballot,
    votes: Sequence[VoteRecord],
    rules: Iterable[str] = RULES,
    theta=1.0,
    budget: int | None = None,
) -> AggregateResult:
    """Run the requested rules and assemble the full result table."""
    _require_votes(votes)
    rules = list(rules)
    for rule in rules:
        if rule not in RULES:
            raise VoteError("unknown-rule", f"no aggregation rule {rule!r}")
    stats = totals(ballot, votes)
    counts = approvals(ballot, votes, theta)
    per_project = {
        pid: ProjectStats(
            total_dollars=stats[pid]["total_dollars"],
            mean_dollars=stats[pid]["mean_dollars"],
            median_dollars=stats[pid]["median_dollars"],
            approval_count=counts[pid],
        )
        for pid in ballot.project_ids()
    }
    funded: dict[str, list[str]] = {}
    rule_meta: dict[str, str] = {}
    borda_scores: dict[str, int] = {}
    if "knapsack-greedy" in rules:
        order, meta = greedy_knapsack(ballot, votes, budget)
        funded["knapsack-greedy"] = order
        rule_meta["knapsack-greedy"] = meta
    if "equal-shares" in rules:
        order, meta = equal_shares(ballot, votes, budget, theta)
        funded["equal-shares"] = order
        rule_meta["equal-shares"] = meta
    if "borda" in rules:
        ranking = borda_from_sorts(ballot, votes)
        borda_scores = dict(ranking)
        rule_meta["borda"] = "ranking by positional score, ties by project id"
    if "approval" in rules:
        rule_meta["approval"] = f"theta={theta}"
    if "totals" in rules:
        rule_meta["totals"] = f"{len(votes)} votes"
    return AggregateResult(
        per_project=per_project,
        funded=funded,
        rule_meta=rule_meta,
        borda_scores=borda_scores,
    )


def result_to_dict(result: AggregateResult) -> dict:
    return {
        "per_project": {
            pid: {
                "total_dollars": s.total_dollars,
                "mean_dollars": s.mean_dollars,
                "median_dollars": s.median_dollars,
                "approval_count": s.approval_count,
            }
            for pid, s in sorted(result.per_project.items())
        },
        "funded": {rule: list(order) for rule, order in sorted(result.funded.items())},
        "rule_meta": dict(sorted(result.rule_meta.items())),
        "borda_scores": dict(sorted(result.borda_scores.items())),
    }


def result_to_csv_rows(result: AggregateResult) -> list[list]:
    """One row per project per rule, mirroring the JSON payload."""
    rows: list[list] = [["rule", "project_id", "value", "funded_position"]]
    for pid, s in sorted(result.per_project.items()):
        rows.append(["totals", pid, s.total_dollars, ""])
        rows.append(["approval", pid, s.approval_count, ""])
    for rule, order in sorted(result.funded.items()):
        position = {pid: i for i, pid in enumerate(order)}
        for pid in sorted(result.per_project):
            rows.append([rule, pid, 1 if pid in position else 0, position.get(pid, "")])
    if result.borda_scores:
        for pid, score in sorted(result.borda_scores.items()):
            rows.append(["borda", pid, score, ""])
    return rows
