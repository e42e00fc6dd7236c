"""Synthetic electorates: binomial turnout per census cell, stick-breaking
dollar allocations with per-ward category propensities.

Every draw comes from a counter-based Philox stream keyed by
(master seed, ward, voter index), so datasets are reproducible and wards can
be generated in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import VoteError
from .model import (
    AXES,
    CATEGORIES,
    UNDISCLOSED,
    Allocation,
    Ballot,
    CensusTable,
    DemographicProfile,
    VoteRecord,
)

RNG_ALGORITHM = "philox-4x64"

UNIFORM_PROPENSITY = tuple(1.0 / len(CATEGORIES) for _ in CATEGORIES)


@dataclass
class SimulationConfig:
    seed: int = 0
    participation_rate: float | dict[str, float] = 0.02
    propensity: dict[int, tuple[float, ...]] = field(default_factory=dict)
    concentration: float = 4.0
    n_override: int | None = None
    rate_band: tuple[float, float] | None = None

    def validate(self) -> None:
        rates = (
            [self.participation_rate]
            if isinstance(self.participation_rate, float)
            else list(self.participation_rate.values())
        )
        for r in rates:
            if not (0.0 <= r <= 1.0):
                raise VoteError("invalid-rate", f"participation rate {r} outside [0, 1]")
        if self.rate_band is not None:
            lo, hi = self.rate_band
            for r in rates:
                if not (lo <= r <= hi):
                    raise VoteError("invalid-rate", f"rate {r} outside configured band [{lo}, {hi}]")
        for ward, vec in self.propensity.items():
            if len(vec) != len(CATEGORIES):
                raise VoteError("invalid-propensity", f"ward {ward} propensity needs {len(CATEGORIES)} entries")
            if any(p < 0 for p in vec):
                raise VoteError("invalid-propensity", f"ward {ward} propensity has a negative entry")
            if abs(sum(vec) - 1.0) > 1e-9:
                raise VoteError("invalid-propensity", f"ward {ward} propensity does not sum to 1")
        if not (self.concentration > 0):
            raise VoteError("invalid-concentration", "concentration must be > 0")

    def ward_propensity(self, ward: int) -> tuple[float, ...]:
        return self.propensity.get(ward, UNIFORM_PROPENSITY)


def _rng(*entropy: int) -> np.random.Generator:
    words = tuple(int(e) & 0xFFFFFFFFFFFFFFFF for e in entropy)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))


def _rate_for(rate, ward: int, axis: str, category: str) -> float:
    if isinstance(rate, (int, float)):
        r = float(rate)
    else:
        r = rate.get(f"{axis}/{category}")
        if r is None:
            r = rate.get(f"ward:{ward}")
        if r is None:
            r = rate.get("*")
        if r is None:
            raise VoteError("invalid-rate", f"no participation rate for {ward}/{axis}/{category}")
        r = float(r)
    if not (0.0 <= r <= 1.0):
        raise VoteError("invalid-rate", f"participation rate {r} outside [0, 1]")
    return r


def sample_turnout(
    census: CensusTable, ward: int, rate, seed: int
) -> dict[tuple[str, str], int]:
    """Draw voters per demographic cell: count ~ Binomial(population, rate)."""
    if ward not in census.wards():
        raise VoteError("ward-not-found", f"ward {ward} not in census table")
    rng = _rng(seed, ward, 0)
    turnout: dict[tuple[str, str], int] = {}
    for axis in AXES:
        for category, population in census.axis_counts(ward, axis).items():
            r = _rate_for(rate, ward, axis, category)
            turnout[(axis, category)] = int(rng.binomial(population, r))
    return turnout


def _stick_break_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    """Break the unit stick with Uniform(0,1) fractions; the last piece takes
    the remainder. Callers shuffle the assignment, so no position is favored."""
    pieces = np.zeros(n)
    remaining = 1.0
    for i in range(n - 1):
        pieces[i] = remaining * rng.random()
        remaining -= pieces[i]
    pieces[n - 1] = remaining
    return pieces


def _stick_break_biased(rng: np.random.Generator, n: int, conc: float) -> np.ndarray:
    """Truncated Beta(1, conc) stick-breaking, renormalized to sum to 1.

    Renormalizing (rather than handing the leftover to the last piece) keeps
    expected piece size strictly decreasing in position for every conc, so a
    category visited earlier never expects less money. Larger conc spreads
    the pieces toward equality; smaller conc concentrates on the first.
    """
    pieces = np.zeros(n)
    remaining = 1.0
    for i in range(n):
        pieces[i] = remaining * rng.beta(1.0, conc)
        remaining -= pieces[i]
    return pieces / pieces.sum()


def _weighted_order(rng: np.random.Generator, weights: np.ndarray) -> np.ndarray:
    # Gumbel-key sampling without replacement: visit order biased by weight.
    gumbel = -np.log(-np.log(rng.random(len(weights))))
    return np.argsort(-(np.log(weights) + gumbel), kind="stable")


def largest_remainder(weights: np.ndarray, units: int) -> np.ndarray:
    """Round nonnegative weights summing to 1 onto integer units that sum to
    `units` exactly; ties go to the lower index."""
    raw = weights * units
    base = np.floor(raw).astype(np.int64)
    short = units - int(base.sum())
    fractions = raw - base
    order = np.argsort(-fractions, kind="stable")
    for idx in order[:short]:
        base[idx] += 1
    return base


def sample_allocation(
    ballot: Ballot, propensity, concentration: float, seed
) -> Allocation:
    """One voter's synthetic allocation, spending the budget exactly.

    Category weights come from stick-breaking over categories visited in
    propensity-weighted random order; each category's weight is split
    uniformly across its projects, scaled to dollars, then rounded to the
    granularity by largest remainder.
    """
    prop = {cat: float(p) for cat, p in zip(CATEGORIES, propensity)}
    by_category: dict[str, list[int]] = {}
    for i, project in enumerate(ballot.projects):
        by_category.setdefault(project.category, []).append(i)
    active = [c for c in CATEGORIES if prop.get(c, 0.0) > 0 and c in by_category]
    if not active:
        raise VoteError(
            "unsatisfiable-propensity",
            "no ballot project belongs to a category with positive propensity",
        )
    entropy = seed if isinstance(seed, tuple) else (seed,)
    rng = _rng(*entropy)

    order = _weighted_order(rng, np.array([prop[c] for c in active]))
    category_weight = np.zeros(len(active))
    category_weight[order] = _stick_break_biased(rng, len(active), concentration)

    weights = np.zeros(len(ballot.projects))
    for ci, cat in enumerate(active):
        members = by_category[cat]
        inner = np.zeros(len(members))
        inner[rng.permutation(len(members))] = _stick_break_uniform(rng, len(members))
        for j, project_index in enumerate(members):
            weights[project_index] = category_weight[ci] * inner[j]

    units = largest_remainder(weights, ballot.budget_total // ballot.granularity)
    amounts = {
        p.id: int(units[i]) * ballot.granularity for i, p in enumerate(ballot.projects)
    }
    return Allocation(amounts=amounts)


def _category_choice(rng: np.random.Generator, categories: list[str], weights: list[int]) -> str:
    total = sum(weights)
    if total <= 0:
        return UNDISCLOSED
    p = np.array(weights, dtype=float) / total
    return categories[int(rng.choice(len(categories), p=p))]


def implied_sort_order(ballot: Ballot, amounts: dict[str, int]) -> tuple[str, ...]:
    """Rank projects by allocated dollars, descending; ties keep ballot order."""
    ids = ballot.project_ids()
    return tuple(sorted(ids, key=lambda pid: (-amounts.get(pid, 0), ballot.ballot_index(pid))))


def simulate_ward(
    ballot: Ballot,
    census: CensusTable,
    config: SimulationConfig,
    *,
    ballot_ref: str | None = None,
) -> list[tuple[DemographicProfile, VoteRecord]]:
    """Full synthetic electorate for the ballot's ward.

    Voter count and the race marginal come from the sampled turnout cells;
    the remaining axes are drawn independently per voter in proportion to
    their sampled cell counts.
    """
    config.validate()
    ward = ballot.ward_id
    ref = ballot_ref or f"ward-{ward}"
    turnout = sample_turnout(census, ward, config.participation_rate, config.seed)

    primary = AXES[0]
    race_list: list[str] = []
    for category in census.categories(ward, primary):
        race_list.extend([category] * turnout[(primary, category)])
    n = config.n_override if config.n_override is not None else len(race_list)

    axis_pool: dict[str, tuple[list[str], list[int]]] = {}
    for axis in AXES[1:]:
        cats = census.categories(ward, axis)
        sampled = [turnout[(axis, c)] for c in cats]
        if sum(sampled) == 0:
            sampled = [census.axis_counts(ward, axis)[c] for c in cats]
        axis_pool[axis] = (cats, sampled)

    propensity = config.ward_propensity(ward)
    out: list[tuple[DemographicProfile, VoteRecord]] = []
    for i in range(n):
        voter_rng = _rng(config.seed, ward, i + 1)
        fields = {"race": race_list[i] if i < len(race_list) else UNDISCLOSED}
        for axis in AXES[1:]:
            cats, pool = axis_pool[axis]
            fields[axis] = _category_choice(voter_rng, cats, pool) if cats else UNDISCLOSED
        profile = DemographicProfile(
            race=fields["race"],
            age_band=fields["age"],
            income_band=fields["income"],
            education_band=fields["education"],
        )
        alloc = sample_allocation(
            ballot, propensity, config.concentration, (config.seed, ward, i + 1, 1)
        )
        record = VoteRecord(
            ballot_ref=ref,
            ward_id=ward,
            sorted_ids=implied_sort_order(ballot, alloc.amounts),
            amounts=dict(alloc.amounts),
        )
        out.append((profile, record))
    return out


def simulate_corpus(
    ballots: Mapping[str, Ballot], census: CensusTable, config: SimulationConfig
) -> list[tuple[str, DemographicProfile, VoteRecord]]:
    """Simulate every ballot in the registry, in sorted ballot-ref order."""
    out = []
    for ref in sorted(ballots):
        for profile, record in simulate_ward(ballots[ref], census, config, ballot_ref=ref):
            out.append((ref, profile, record))
    return out


def simulation_metadata(config: SimulationConfig) -> dict:
    from . import __version__

    rate = config.participation_rate
    return {
        "kind": "simulation-meta",
        "seed": config.seed,
        "participation_rate": rate if isinstance(rate, float) else dict(sorted(rate.items())),
        "concentration": config.concentration,
        "rate_band": list(config.rate_band) if config.rate_band else None,
        "rng": RNG_ALGORITHM,
        "numpy_version": np.__version__,
        "generator_version": __version__,
    }


def parse_config_text(text: str) -> SimulationConfig:
    """Parse the flat `key = value` simulation config format.

    Recognized keys: seed, rate, rate.<scope>, concentration, n_override,
    rate_band, propensity.<ward> (five comma-separated shares over the
    category list).
    """
    config = SimulationConfig()
    rate_map: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise VoteError("parse-error", f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key == "seed":
                config.seed = int(value)
            elif key == "rate":
                config.participation_rate = float(value)
            elif key.startswith("rate."):
                rate_map[key[len("rate."):]] = float(value)
            elif key == "concentration":
                config.concentration = float(value)
            elif key == "n_override":
                config.n_override = int(value)
            elif key == "rate_band":
                lo, hi = (float(v) for v in value.split(","))
                config.rate_band = (lo, hi)
            elif key.startswith("propensity."):
                ward = int(key[len("propensity."):])
                vec = tuple(float(v) for v in value.split(","))
                config.propensity[ward] = vec
            else:
                raise VoteError("parse-error", f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise VoteError("parse-error", f"line {lineno}: {exc}") from exc
    if rate_map:
        config.participation_rate = rate_map
    return config
