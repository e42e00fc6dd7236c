"""Domain types for budget ballots: projects, allocations, demographics, census.

All dollar quantities are integers. Validation is total: validators return a
list of violations and never raise on bad data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

CATEGORIES = (
    "arts-and-culture",
    "biking-and-transport",
    "libraries-and-schools",
    "parks-and-environment",
    "streets-and-sidewalks",
)

AXES = ("race", "age", "income", "education")

UNDISCLOSED = "undisclosed"

# Default category vocabulary per demographic axis; survey deployments may
# substitute their own lists, `undisclosed` is always accepted.
DEFAULT_VOCABULARY: dict[str, tuple[str, ...]] = {
    "race": ("white", "black", "hispanic-or-latino", "asian", "other"),
    "age": ("18-24", "25-34", "35-44", "45-54", "55-64", "65-plus"),
    "income": ("under-25k", "25k-50k", "50k-100k", "100k-200k", "over-200k"),
    "education": ("high-school-or-less", "some-college", "bachelors", "graduate"),
}

MIN_WARD, MAX_WARD = 1, 50
MIN_PROJECTS, MAX_PROJECTS = 2, 20


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    field: str | None = None

    def to_dict(self) -> dict:
        body = {"code": self.code, "message": self.message}
        if self.field is not None:
            body["field"] = self.field
        return body


@dataclass(frozen=True)
class Project:
    id: str
    name: str
    description: str
    cost_estimate: int
    category: str
    image_ref: str | None = None
    divisible: bool = False


@dataclass(frozen=True)
class Ballot:
    ward_id: int
    projects: tuple[Project, ...]
    budget_total: int
    granularity: int

    def project_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.projects)

    def project(self, project_id: str) -> Project:
        for p in self.projects:
            if p.id == project_id:
                return p
        raise KeyError(project_id)

    def ballot_index(self, project_id: str) -> int:
        for i, p in enumerate(self.projects):
            if p.id == project_id:
                return i
        raise KeyError(project_id)

    def rounded_cost(self, project_id: str) -> int:
        """Cost estimate rounded up to the granularity, so meeting the
        rounded cost always covers the real estimate."""
        return round_up(self.project(project_id).cost_estimate, self.granularity)


@dataclass(frozen=True)
class Allocation:
    amounts: dict[str, int] = field(default_factory=dict)

    def amount(self, project_id: str) -> int:
        return self.amounts.get(project_id, 0)


@dataclass(frozen=True)
class DemographicProfile:
    race: str = UNDISCLOSED
    age_band: str = UNDISCLOSED
    income_band: str = UNDISCLOSED
    education_band: str = UNDISCLOSED

    def by_axis(self) -> dict[str, str]:
        return {
            "race": self.race,
            "age": self.age_band,
            "income": self.income_band,
            "education": self.education_band,
        }


@dataclass(frozen=True)
class CensusTable:
    """Population counts keyed by (ward_id, axis, category)."""

    counts: dict[tuple[int, str, str], int] = field(default_factory=dict)

    def wards(self) -> list[int]:
        return sorted({w for (w, _, _) in self.counts})

    def categories(self, ward: int, axis: str) -> list[str]:
        return sorted(c for (w, a, c) in self.counts if w == ward and a == axis)

    def axis_counts(self, ward: int, axis: str) -> dict[str, int]:
        return {
            c: n for (w, a, c), n in sorted(self.counts.items()) if w == ward and a == axis
        }

    def ward_population(self, ward: int, axis: str = AXES[0]) -> int:
        return sum(self.axis_counts(ward, axis).values())


@dataclass(frozen=True)
class VoteRecord:
    """Finalized vote: allocation plus sort order, keyed by ward only."""

    ballot_ref: str
    ward_id: int
    sorted_ids: tuple[str, ...]
    amounts: dict[str, int]

    def amount(self, project_id: str) -> int:
        return self.amounts.get(project_id, 0)


def round_up(dollars: int, granularity: int) -> int:
    return -(-dollars // granularity) * granularity


def allocation_sum(alloc: Allocation | dict[str, int]) -> int:
    amounts = alloc.amounts if isinstance(alloc, Allocation) else alloc
    return sum(amounts.values())


def validate_ballot(ballot: Ballot) -> list[Violation]:
    """Check all ballot/project invariants; empty list means valid."""
    out: list[Violation] = []
    if not (MIN_WARD <= ballot.ward_id <= MAX_WARD):
        out.append(
            Violation("ward-out-of-range", f"ward_id {ballot.ward_id} outside {MIN_WARD}-{MAX_WARD}", "ward_id")
        )
    if ballot.granularity <= 0:
        out.append(Violation("granularity-not-positive", "granularity must be > 0", "granularity"))
    if ballot.budget_total <= 0:
        out.append(Violation("budget-not-positive", "budget_total must be > 0", "budget_total"))
    elif ballot.granularity > 0 and ballot.budget_total % ballot.granularity != 0:
        out.append(
            Violation(
                "budget-not-multiple",
                f"budget_total {ballot.budget_total} is not a multiple of granularity {ballot.granularity}",
                "budget_total",
            )
        )
    n = len(ballot.projects)
    if not (MIN_PROJECTS <= n <= MAX_PROJECTS):
        out.append(Violation("project-count", f"{n} projects outside {MIN_PROJECTS}-{MAX_PROJECTS}", "projects"))
    seen: set[str] = set()
    for p in ballot.projects:
        if p.id in seen:
            out.append(Violation("duplicate-id", f"duplicate project id {p.id!r}", "projects"))
        seen.add(p.id)
        if p.cost_estimate <= 0:
            out.append(Violation("cost-not-positive", f"project {p.id!r} cost_estimate must be > 0", "cost_estimate"))
        if p.category not in CATEGORIES:
            out.append(Violation("invalid-category", f"project {p.id!r} category {p.category!r} unknown", "category"))
    return out


def validate_allocation(alloc: Allocation | dict[str, int], ballot: Ballot) -> list[Violation]:
    amounts = alloc.amounts if isinstance(alloc, Allocation) else alloc
    out: list[Violation] = []
    ids = set(ballot.project_ids())
    for pid, amount in amounts.items():
        if pid not in ids:
            out.append(Violation("unknown-project", f"allocation names unknown project {pid!r}", "amounts"))
        if amount < 0:
            out.append(Violation("negative-amount", f"amount for {pid!r} is negative", "amounts"))
        elif ballot.granularity > 0 and amount % ballot.granularity != 0:
            out.append(
                Violation("granularity-violation", f"amount for {pid!r} not a multiple of {ballot.granularity}", "amounts")
            )
    if sum(amounts.values()) > ballot.budget_total:
        out.append(Violation("budget-exceeded", "allocation sum exceeds budget_total", "amounts"))
    return out


def validate_profile(
    profile: DemographicProfile, vocabulary: dict[str, tuple[str, ...]] | None = None
) -> list[Violation]:
    vocab = vocabulary or DEFAULT_VOCABULARY
    out: list[Violation] = []
    for axis, value in profile.by_axis().items():
        if value != UNDISCLOSED and value not in vocab.get(axis, ()):
            out.append(Violation("invalid-category", f"{value!r} is not a known {axis} category", axis))
    return out


def validate_census(census: CensusTable) -> list[Violation]:
    out: list[Violation] = []
    for (ward, axis, category), count in sorted(census.counts.items()):
        if count < 0:
            out.append(
                Violation("invalid-count", f"negative count for ward {ward} {axis}/{category}", "counts")
            )
        if not (MIN_WARD <= ward <= MAX_WARD):
            out.append(Violation("ward-out-of-range", f"ward {ward} outside {MIN_WARD}-{MAX_WARD}", "counts"))
    return out


def census_axis_warnings(census: CensusTable) -> list[str]:
    """Cross-axis total mismatches per ward: axes should partition one population."""
    warnings = []
    for ward in census.wards():
        totals = {}
        for axis in AXES:
            counts = census.axis_counts(ward, axis)
            if counts:
                totals[axis] = sum(counts.values())
        if len(set(totals.values())) > 1:
            detail = ", ".join(f"{a}={t}" for a, t in sorted(totals.items()))
            warnings.append(f"ward {ward}: axis totals disagree ({detail})")
    return warnings


# --- canonical JSON ---------------------------------------------------------

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def project_to_dict(p: Project) -> dict:
    return {
        "id": p.id,
        "name": p.name,
        "description": p.description,
        "cost_estimate": p.cost_estimate,
        "category": p.category,
        "image_ref": p.image_ref,
        "divisible": p.divisible,
    }


def project_from_dict(d: dict) -> Project:
    return Project(
        id=str(d["id"]),
        name=str(d["name"]),
        description=str(d.get("description", "")),
        cost_estimate=int(d["cost_estimate"]),
        category=str(d["category"]),
        image_ref=d.get("image_ref"),
        divisible=bool(d.get("divisible", False)),
    )


def ballot_to_dict(b: Ballot) -> dict:
    return {
        "ward_id": b.ward_id,
        "projects": [project_to_dict(p) for p in b.projects],
        "budget_total": b.budget_total,
        "granularity": b.granularity,
    }


def ballot_from_dict(d: dict) -> Ballot:
    return Ballot(
        ward_id=int(d["ward_id"]),
        projects=tuple(project_from_dict(p) for p in d["projects"]),
        budget_total=int(d["budget_total"]),
        granularity=int(d["granularity"]),
    )


def allocation_to_dict(a: Allocation) -> dict:
    return {"amounts": {pid: int(v) for pid, v in sorted(a.amounts.items())}}


def allocation_from_dict(d: dict) -> Allocation:
    return Allocation(amounts={str(k): int(v) for k, v in d["amounts"].items()})


def profile_to_dict(p: DemographicProfile) -> dict:
    return {
        "race": p.race,
        "age_band": p.age_band,
        "income_band": p.income_band,
        "education_band": p.education_band,
    }


def profile_from_dict(d: dict) -> DemographicProfile:
    return DemographicProfile(
        race=str(d.get("race", UNDISCLOSED)),
        age_band=str(d.get("age_band", UNDISCLOSED)),
        income_band=str(d.get("income_band", UNDISCLOSED)),
        education_band=str(d.get("education_band", UNDISCLOSED)),
    )


def census_to_dict(c: CensusTable) -> dict:
    rows = [
        {"ward": w, "axis": a, "category": cat, "count": n}
        for (w, a, cat), n in sorted(c.counts.items())
    ]
    return {"counts": rows}


def census_from_dict(d: dict) -> CensusTable:
    counts = {
        (int(r["ward"]), str(r["axis"]), str(r["category"])): int(r["count"])
        for r in d["counts"]
    }
    return CensusTable(counts=counts)


def record_to_dict(r: VoteRecord) -> dict:
    return {
        "ballot_ref": r.ballot_ref,
        "ward_id": r.ward_id,
        "sorted": list(r.sorted_ids),
        "amounts": {pid: int(v) for pid, v in sorted(r.amounts.items())},
    }


def record_from_dict(d: dict) -> VoteRecord:
    return VoteRecord(
        ballot_ref=str(d["ballot_ref"]),
        ward_id=int(d["ward_id"]),
        sorted_ids=tuple(str(x) for x in d["sorted"]),
        amounts={str(k): int(v) for k, v in d["amounts"].items()},
    )
