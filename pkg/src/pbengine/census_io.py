"""Census CSV ingest: rows of (ward, axis, category, count)."""

from __future__ import annotations

import csv
import io

from .errors import VoteError
from .model import AXES, CensusTable, census_axis_warnings

HEADER = ("ward", "axis", "category", "count")


def parse_census_csv(text: str) -> tuple[CensusTable, list[str]]:
    """Parse and validate census CSV text; returns the table plus warnings
    for wards whose axis totals disagree."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise VoteError("parse-error", "line 1: missing header") from None
    if tuple(h.strip().lower() for h in header) != HEADER:
        raise VoteError("parse-error", f"line 1: expected header {','.join(HEADER)}")
    counts: dict[tuple[int, str, str], int] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise VoteError("parse-error", f"line {lineno}: expected 4 fields, got {len(row)}")
        ward_s, axis, category, count_s = (f.strip() for f in row)
        try:
            ward = int(ward_s)
            count = int(count_s)
        except ValueError:
            raise VoteError("parse-error", f"line {lineno}: ward and count must be integers") from None
        if count < 0:
            raise VoteError("invalid-count", f"line {lineno}: negative count {count}")
        if axis not in AXES:
            raise VoteError("parse-error", f"line {lineno}: unknown axis {axis!r}")
        key = (ward, axis, category)
        counts[key] = counts.get(key, 0) + count
    census = CensusTable(counts=counts)
    return census, census_axis_warnings(census)


def load_census_file(path: str) -> tuple[CensusTable, list[str]]:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_census_csv(fh.read())
    except OSError as exc:
        raise VoteError("io-error", f"cannot read census file: {exc}") from exc


def census_to_csv(census: CensusTable) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for (ward, axis, category), count in sorted(census.counts.items()):
        writer.writerow([ward, axis, category, count])
    return out.getvalue()
