"""Regenerate the committed data fixtures (ballots, census, sim configs).

Deterministic: running it twice produces identical files.
"""

from __future__ import annotations

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from pbengine.model import AXES, DEFAULT_VOCABULARY  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")

WARDS = (29, 35, 36, 49)

PROJECTS = [
    {
        "id": "bike-lanes",
        "name": "Protected bike lanes",
        "description": "Curb-separated bike lanes along the main commercial corridor.",
        "cost_estimate": 285_000,
        "category": "biking-and-transport",
        "image_ref": "images/bike-lanes.jpg",
        "divisible": True,
    },
    {
        "id": "curb-cuts",
        "name": "Accessible curb cuts",
        "description": "ADA-compliant curb ramps at twelve intersections.",
        "cost_estimate": 48_500,
        "category": "streets-and-sidewalks",
        "image_ref": "images/curb-cuts.jpg",
        "divisible": True,
    },
    {
        "id": "food-pantry",
        "name": "Community food pantry",
        "description": "Fit out and stock a food pantry at the neighborhood center.",
        "cost_estimate": 96_500,
        "category": "libraries-and-schools",
        "image_ref": "images/food-pantry.jpg",
        "divisible": False,
    },
    {
        "id": "school-improvements",
        "name": "School improvements",
        "description": "Playground resurfacing and library upgrades at two schools.",
        "cost_estimate": 602_000,
        "category": "libraries-and-schools",
        "image_ref": "images/school-improvements.jpg",
        "divisible": True,
    },
    {
        "id": "picnic-tables",
        "name": "Park picnic tables",
        "description": "Accessible picnic tables and benches in three parks.",
        "cost_estimate": 22_750,
        "category": "parks-and-environment",
        "image_ref": "images/picnic-tables.jpg",
        "divisible": True,
    },
    {
        "id": "street-lights",
        "name": "Pedestrian street lights",
        "description": "Brighter pedestrian-scale lighting on residential blocks.",
        "cost_estimate": 184_000,
        "category": "streets-and-sidewalks",
        "image_ref": "images/street-lights.jpg",
        "divisible": True,
    },
    {
        "id": "street-murals",
        "name": "Street murals",
        "description": "Commission local artists for intersection murals.",
        "cost_estimate": 36_000,
        "category": "arts-and-culture",
        "image_ref": "images/street-murals.jpg",
        "divisible": True,
    },
    {
        "id": "street-resurfacing",
        "name": "Street resurfacing",
        "description": "Repave the worst-rated residential street segments.",
        "cost_estimate": 748_000,
        "category": "streets-and-sidewalks",
        "image_ref": "images/street-resurfacing.jpg",
        "divisible": True,
    },
]

POPULATIONS = {29: 54_212, 35: 52_318, 36: 53_904, 49: 55_430}

# per-ward demographic mixes; rows follow DEFAULT_VOCABULARY category order
SHARES = {
    "race": {
        29: (0.28, 0.42, 0.20, 0.04, 0.06),
        35: (0.30, 0.12, 0.48, 0.05, 0.05),
        36: (0.34, 0.08, 0.48, 0.04, 0.06),
        49: (0.38, 0.24, 0.22, 0.08, 0.08),
    },
    "age": {
        29: (0.11, 0.20, 0.17, 0.16, 0.15, 0.21),
        35: (0.13, 0.24, 0.18, 0.15, 0.14, 0.16),
        36: (0.12, 0.21, 0.18, 0.16, 0.14, 0.19),
        49: (0.12, 0.23, 0.17, 0.14, 0.14, 0.20),
    },
    "income": {
        29: (0.24, 0.26, 0.29, 0.16, 0.05),
        35: (0.22, 0.25, 0.30, 0.17, 0.06),
        36: (0.20, 0.24, 0.31, 0.18, 0.07),
        49: (0.23, 0.24, 0.29, 0.17, 0.07),
    },
    "education": {
        29: (0.38, 0.27, 0.21, 0.14),
        35: (0.34, 0.26, 0.24, 0.16),
        36: (0.36, 0.27, 0.23, 0.14),
        49: (0.30, 0.25, 0.27, 0.18),
    },
}

PROPENSITY = {
    29: "0.10, 0.15, 0.30, 0.25, 0.20",
    35: "0.12, 0.18, 0.28, 0.24, 0.18",
    36: "0.08, 0.12, 0.32, 0.28, 0.20",
    49: "0.10, 0.20, 0.30, 0.25, 0.15",
}

HISTORIC_RATES = {29: 0.006, 35: 0.010, 36: 0.014, 49: 0.018}


def largest_remainder_counts(total: int, shares) -> list[int]:
    raw = [total * s for s in shares]
    base = [int(x) for x in raw]
    short = total - sum(base)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - base[i]), i))
    for i in order[:short]:
        base[i] += 1
    return base


def ballot_for(ward: int) -> dict:
    return {
        "id": f"ward-{ward}",
        "ward_id": ward,
        "projects": PROJECTS,
        "budget_total": 1_000_000,
        "granularity": 1_000,
    }


def census_rows() -> list[str]:
    rows = ["ward,axis,category,count"]
    for ward in WARDS:
        for axis in AXES:
            categories = DEFAULT_VOCABULARY[axis]
            counts = largest_remainder_counts(POPULATIONS[ward], SHARES[axis][ward])
            for category, count in zip(categories, counts):
                rows.append(f"{ward},{axis},{category},{count}")
    return rows


def sim_config(band: tuple[float, float], rates) -> str:
    lines = ["# simulation preset", "seed = 7", "concentration = 4.0"]
    if isinstance(rates, float):
        lines.append(f"rate = {rates}")
    else:
        for ward in WARDS:
            lines.append(f"rate.ward:{ward} = {rates[ward]}")
    lines.append(f"rate_band = {band[0]}, {band[1]}")
    for ward in WARDS:
        lines.append(f"propensity.{ward} = {PROPENSITY[ward]}")
    return "\n".join(lines) + "\n"


def wards_geo() -> dict:
    # stylized 2x2 grid; stands in for real ward boundaries on the dashboard map
    boxes = {29: (0, 0), 35: (1, 0), 36: (0, 1), 49: (1, 1)}
    features = []
    for ward, (x, y) in sorted(boxes.items()):
        ring = [[x, y], [x + 1, y], [x + 1, y + 1], [x, y + 1], [x, y]]
        features.append(
            {
                "type": "Feature",
                "properties": {"ward": ward},
                "geometry": {"type": "Polygon", "coordinates": [ring]},
            }
        )
    return {"type": "FeatureCollection", "features": features}


def write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {os.path.relpath(path)}")


def main() -> None:
    os.makedirs(FIXTURES, exist_ok=True)
    write(
        os.path.join(FIXTURES, "ballots-4wards.json"),
        json.dumps([ballot_for(w) for w in WARDS], indent=2) + "\n",
    )
    write(
        os.path.join(FIXTURES, "ballot-ward49.json"),
        json.dumps(ballot_for(49), indent=2) + "\n",
    )
    write(os.path.join(FIXTURES, "census-4wards.csv"), "\n".join(census_rows()) + "\n")
    write(os.path.join(FIXTURES, "sim-survey-band.txt"), sim_config((0.01, 0.03), 0.02))
    write(
        os.path.join(FIXTURES, "sim-historic-band.txt"),
        sim_config((0.0023, 0.0228), HISTORIC_RATES),
    )
    write(
        os.path.join(FIXTURES, "wards-geo.json"),
        json.dumps(wards_geo(), indent=2) + "\n",
    )
    write(
        os.path.join(FIXTURES, "service.conf"),
        "\n".join(
            [
                "bind = 127.0.0.1:8080",
                "data_dir = ./data",
                "ballots = fixtures/ballots-4wards.json",
                "census = fixtures/census-4wards.csv",
                "bin_count = 5",
                "theta = 1.0",
                "live_results = true",
            ]
        )
        + "\n",
    )


if __name__ == "__main__":
    main()
