"""End-to-end demo: simulate the four fixture wards, aggregate under every
rule, and print a results digest with representation gaps.

Usage: python3 scripts/run_demo.py [seed]
"""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from pbengine.aggregate import aggregate, rank_churn  # noqa: E402
from pbengine.analytics import demographic_matrix, representation_gap  # noqa: E402
from pbengine.census_io import load_census_file  # noqa: E402
from pbengine.model import allocation_sum  # noqa: E402
from pbengine.simulate import parse_config_text, simulate_corpus  # noqa: E402
from pbengine.store import load_ballots_file  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def main() -> None:
    ballots = load_ballots_file(os.path.join(FIXTURES, "ballots-4wards.json"))
    census, _ = load_census_file(os.path.join(FIXTURES, "census-4wards.csv"))
    with open(os.path.join(FIXTURES, "sim-historic-band.txt"), encoding="utf-8") as fh:
        config = parse_config_text(fh.read())
    if len(sys.argv) > 1:
        config.seed = int(sys.argv[1])
    config.validate()

    rows = simulate_corpus(ballots, census, config)
    print(f"simulated {len(rows)} voters (seed {config.seed})")

    by_ward: dict = {}
    profiles: dict = {}
    for ref, profile, record in rows:
        by_ward.setdefault(ref, []).append(record)
        profiles.setdefault(record.ward_id, []).append(profile)

    for ref in sorted(by_ward):
        records = by_ward[ref]
        ballot = ballots[ref]
        assert all(allocation_sum(r.amounts) == ballot.budget_total for r in records)
        result = aggregate(ballot, records)
        churn = sum(rank_churn(r) for r in records) / len(records)
        print(f"\n== {ref} ({len(records)} voters, mean churn {churn:.2f}) ==")
        for rule, funded in sorted(result.funded.items()):
            total = sum(ballot.rounded_cost(p) for p in funded)
            print(f"  {rule:16s} funds {funded} (${total:,})")
        top = sorted(result.borda_scores.items(), key=lambda kv: -kv[1])[:3]
        print(f"  {'borda':16s} top 3: {top}")

        matrix = demographic_matrix(census, profiles, [ballot.ward_id], "race", "percent")
        gaps = representation_gap(matrix)
        worst = max(gaps.items(), key=lambda kv: kv[1])
        print(f"  most under-represented race category: {worst[0]} ({worst[1]:+.1f} pts)")


if __name__ == "__main__":
    main()
