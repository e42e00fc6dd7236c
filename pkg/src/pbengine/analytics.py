"""Dashboard data products: census-vs-voter demographic matrices and
per-voter allocation strips, shaped for direct chart binding."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import VoteError
from .model import (
    AXES,
    CATEGORIES,
    DEFAULT_VOCABULARY,
    UNDISCLOSED,
    Ballot,
    CensusTable,
    DemographicProfile,
    VoteRecord,
)

DEFAULT_WARDS = (29, 35, 36, 49)
DEFAULT_BIN_COUNT = 5

# fixed shuffle seed for strip plots: de-identifies voter order across views
STRIP_SHUFFLE_SEED = 929

MODES = ("counts", "percent")


@dataclass(frozen=True)
class DemographicMatrix:
    axis: str
    mode: str
    rows: tuple[str, ...]
    columns: tuple[tuple[int, str], ...]  # (ward, "census" | "voters")
    cells: tuple[tuple[float | None, ...], ...]  # rows x columns; None = undefined
    bins: tuple[float, ...]

    def column(self, ward: int, source: str) -> list[float | None]:
        j = self.columns.index((ward, source))
        return [row[j] for row in self.cells]

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "mode": self.mode,
            "rows": list(self.rows),
            "columns": [{"ward": w, "source": s} for w, s in self.columns],
            "cells": [list(row) for row in self.cells],
            "bins": list(self.bins),
        }


def _axis_rows(axis: str, census: CensusTable, wards: Sequence[int]) -> tuple[str, ...]:
    vocab = list(DEFAULT_VOCABULARY.get(axis, ()))
    extras = sorted(
        {c for w in wards for c in census.categories(w, axis)} - set(vocab)
    )
    return tuple(vocab + extras + [UNDISCLOSED])


def _profile_value(profile: DemographicProfile, axis: str) -> str:
    return profile.by_axis()[axis]


def quantize_bins(values: list[float], bin_count: int) -> tuple[float, ...]:
    """Equal-width bin boundaries covering the observed range; strictly
    increasing even when all values coincide."""
    if not values:
        return tuple(float(i) for i in range(bin_count + 1))
    lo, hi = min(values), max(values)
    if hi <= lo:
        return tuple(lo + float(i) for i in range(bin_count + 1))
    width = (hi - lo) / bin_count
    return tuple(lo + i * width for i in range(bin_count + 1))


def bin_index(value: float, bins: Sequence[float]) -> int:
    """Map a value into exactly one bin; the top boundary closes the last bin."""
    if value <= bins[0]:
        return 0
    for i in range(1, len(bins)):
        if value <= bins[i]:
            return i - 1
    return len(bins) - 2


def demographic_matrix(
    census: CensusTable,
    profiles_by_ward: Mapping[int, Sequence[DemographicProfile]],
    wards: Sequence[int],
    axis: str,
    mode: str = "counts",
    bin_count: int = DEFAULT_BIN_COUNT,
) -> DemographicMatrix:
    """Cross categories (rows) with ward census/voter columns.

    Percent mode normalizes within each column; a voterless ward's percent
    column is undefined (None cells) rather than fabricated zeros.
    """
    if not wards:
        raise VoteError("no-selection", "select at least one ward")
    if axis not in AXES:
        raise VoteError("invalid-axis", f"axis must be one of {AXES}")
    if mode not in MODES:
        raise VoteError("invalid-mode", f"mode must be one of {MODES}")
    for ward in wards:
        if ward not in census.wards():
            raise VoteError("ward-not-found", f"ward {ward} not in census table")

    rows = _axis_rows(axis, census, wards)
    columns: list[tuple[int, str]] = []
    raw_columns: list[list[float]] = []
    for ward in wards:
        census_counts = census.axis_counts(ward, axis)
        columns.append((ward, "census"))
        raw_columns.append([float(census_counts.get(r, 0)) for r in rows])
        voter_counts = {r: 0 for r in rows}
        for profile in profiles_by_ward.get(ward, ()):
            value = _profile_value(profile, axis)
            voter_counts[value if value in voter_counts else UNDISCLOSED] += 1
        columns.append((ward, "voters"))
        raw_columns.append([float(voter_counts[r]) for r in rows])

    cells_by_column: list[list[float | None]] = []
    for col in raw_columns:
        if mode == "counts":
            cells_by_column.append(list(col))
        else:
            total = sum(col)
            if total == 0:
                cells_by_column.append([None] * len(rows))
            else:
                cells_by_column.append([100.0 * v / total for v in col])

    observed = [v for col in cells_by_column for v in col if v is not None]
    bins = quantize_bins(observed, bin_count)
    cells = tuple(
        tuple(cells_by_column[j][i] for j in range(len(columns)))
        for i in range(len(rows))
    )
    return DemographicMatrix(
        axis=axis, mode=mode, rows=rows, columns=tuple(columns), cells=cells, bins=bins
    )


def representation_gap(matrix: DemographicMatrix) -> dict[str, float]:
    """Census% minus voter% per category; positive means the group is
    under-represented among voters."""
    if matrix.mode != "percent":
        raise VoteError("invalid-mode", "representation gap needs a percent-mode matrix")
    wards = {w for w, _ in matrix.columns}
    if len(wards) != 1:
        raise VoteError("no-selection", "representation gap is defined for a single ward")
    ward = wards.pop()
    census_col = matrix.column(ward, "census")
    voter_col = matrix.column(ward, "voters")
    if any(v is None for v in voter_col) or any(v is None for v in census_col):
        raise VoteError("insufficient-data", f"ward {ward} has no voters to compare")
    return {
        row: census_col[i] - voter_col[i] for i, row in enumerate(matrix.rows)
    }


def allocation_strips(
    ballot: Ballot, votes: Sequence[VoteRecord]
) -> list[tuple[str, int, int]]:
    """(category, voter_index, dollars) triples, one mark per voter per
    category; voter order is shuffled under a fixed seed so indexes cannot be
    matched against arrival order elsewhere."""
    if not votes:
        raise VoteError("no-votes", "no finalized votes for this ward")
    project_category = {p.id: p.category for p in ballot.projects}
    order = list(range(len(votes)))
    random.Random(STRIP_SHUFFLE_SEED).shuffle(order)
    triples: list[tuple[str, int, int]] = []
    for voter_index, original in enumerate(order):
        vote = votes[original]
        by_category = {c: 0 for c in CATEGORIES}
        for pid, amount in vote.amounts.items():
            category = project_category.get(pid)
            if category is not None:
                by_category[category] += amount
        for category in CATEGORIES:
            triples.append((category, voter_index, by_category[category]))
    return triples


def strips_to_dict(triples: list[tuple[str, int, int]]) -> dict:
    return {
        "points": [
            {"category": c, "voter": v, "dollars": d} for c, v, d in triples
        ]
    }
