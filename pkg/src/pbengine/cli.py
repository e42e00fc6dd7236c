"""Operator CLI: simulate electorates, aggregate votes, export analytics,
ingest census data, validate artifacts, serve the API.

Exit codes: 0 success, 1 usage, 2 validation failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import aggregate as agg
from . import analytics
from .census_io import load_census_file
from .errors import VoteError
from .model import (
    allocation_sum,
    ballot_from_dict,
    canonical_json,
    profile_to_dict,
    record_to_dict,
    validate_ballot,
)
from .simulate import SimulationConfig, parse_config_text, simulate_corpus, simulation_metadata
from .store import read_corpus_jsonl, write_jsonl

USAGE_ERROR, VALIDATION_ERROR, IO_ERROR = 1, 2, 3

IO_CODES = {"io-error"}


def _fail(err: VoteError) -> int:
    print(f"error: {err.code}: {err.message}", file=sys.stderr)
    return IO_ERROR if err.code in IO_CODES else VALIDATION_ERROR


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_ballots(path: str):
    from .store import load_ballots_file

    ballots = load_ballots_file(path)
    for ref, ballot in sorted(ballots.items()):
        violations = validate_ballot(ballot)
        if violations:
            raise VoteError(violations[0].code, f"ballot {ref!r}: {violations[0].message}")
    return ballots


def cmd_simulate(args) -> int:
    config = SimulationConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = parse_config_text(fh.read())
        except OSError as exc:
            raise VoteError("io-error", str(exc)) from exc
    if args.rate is not None:
        config.participation_rate = args.rate
    if args.seed is not None:
        config.seed = args.seed
    if args.concentration is not None:
        config.concentration = args.concentration
    config.validate()

    ballots = _load_ballots(args.ballot)
    census, warnings = load_census_file(args.census)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)

    rows = simulate_corpus(ballots, census, config)
    lines = [simulation_metadata(config)]
    for ref, profile, record in rows:
        lines.append({"kind": "vote", "profile": profile_to_dict(profile), "record": record_to_dict(record)})
    if args.out:
        write_jsonl(args.out, lines)
        _write_summary_csv(args.out + ".summary.csv", ballots, rows)
    else:
        for line in lines:
            sys.stdout.write(canonical_json(line) + "\n")
    print(f"simulated {len(rows)} voters across {len(ballots)} wards", file=sys.stderr)
    return 0


def _write_summary_csv(path: str, ballots, rows) -> None:
    per: dict[tuple[str, str], list[int]] = {}
    voters: dict[str, int] = {}
    for ref, _, record in rows:
        voters[ref] = voters.get(ref, 0) + 1
        for pid, amount in record.amounts.items():
            per.setdefault((ref, pid), []).append(amount)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ballot_ref", "ward_id", "voters", "project_id", "total_dollars", "mean_dollars"])
        for ref in sorted(ballots):
            for project in ballots[ref].projects:
                amounts = per.get((ref, project.id), [])
                total = sum(amounts)
                n = voters.get(ref, 0)
                mean = round(total / n) if n else 0
                writer.writerow([ref, ballots[ref].ward_id, n, project.id, total, mean])


def _single_ballot(ballots, votes):
    refs = sorted({r.ballot_ref for _, r in votes})
    if len(refs) != 1:
        raise VoteError("mixed-ballots", f"corpus mixes ballots {refs}; filter by --ward first")
    ballot = ballots.get(refs[0])
    if ballot is None:
        raise VoteError("ballot-not-found", f"corpus references unknown ballot {refs[0]!r}")
    return ballot


def cmd_aggregate(args) -> int:
    ballots = _load_ballots(args.ballot)
    _, votes = read_corpus_jsonl(args.votes)
    if args.ward is not None:
        votes = [(p, r) for p, r in votes if r.ward_id == args.ward]
    if not votes:
        raise VoteError("no-votes", "corpus has no matching votes")
    ballot = _single_ballot(ballots, votes)
    rules = [r.strip() for r in args.rules.split(",")] if args.rules else list(agg.RULES)
    result = agg.aggregate(
        ballot,
        [r for _, r in votes],
        rules=rules,
        theta=args.theta,
        budget=args.budget,
    )
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(agg.result_to_csv_rows(result))
        _emit(buf.getvalue(), args.out)
    else:
        _emit(canonical_json(agg.result_to_dict(result)) + "\n", args.out)
    return 0


def cmd_analytics(args) -> int:
    census, warnings = load_census_file(args.census)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    _, votes = read_corpus_jsonl(args.votes)
    if not votes:
        raise VoteError("no-votes", "corpus has no votes")
    wards = [int(w) for w in args.wards.split(",")] if args.wards else list(analytics.DEFAULT_WARDS)
    profiles_by_ward: dict[int, list] = {w: [] for w in wards}
    for profile, record in votes:
        if profile is not None and record.ward_id in profiles_by_ward:
            profiles_by_ward[record.ward_id].append(profile)
    matrix = analytics.demographic_matrix(
        census, profiles_by_ward, wards, args.axis, args.mode, args.bins
    )
    payload = {"matrix": matrix.to_dict()}
    if args.ballot:
        ballots = _load_ballots(args.ballot)
        strips = {}
        for ward in wards:
            ward_votes = [r for _, r in votes if r.ward_id == ward]
            if not ward_votes:
                continue
            ballot = _single_ballot(ballots, [(None, r) for r in ward_votes])
            strips[str(ward)] = analytics.strips_to_dict(
                analytics.allocation_strips(ballot, ward_votes)
            )
        payload["strips"] = strips
    if args.format == "csv":
        _emit(_analytics_csv(payload), args.out)
    else:
        _emit(canonical_json(payload) + "\n", args.out)
    return 0


def _analytics_csv(payload: dict) -> str:
    """Flat rows mirroring the JSON payload: matrix cells, then strip points."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    matrix = payload["matrix"]
    writer.writerow(["kind", "axis", "mode", "row", "ward", "source", "value"])
    for i, row in enumerate(matrix["rows"]):
        for j, col in enumerate(matrix["columns"]):
            value = matrix["cells"][i][j]
            writer.writerow(
                ["matrix", matrix["axis"], matrix["mode"], row, col["ward"], col["source"],
                 "" if value is None else value]
            )
    for ward, strip in sorted(payload.get("strips", {}).items()):
        for point in strip["points"]:
            writer.writerow(
                ["strip", "", "", point["category"], ward, f"voter-{point['voter']}", point["dollars"]]
            )
    return buf.getvalue()


def cmd_ingest_census(args) -> int:
    census, warnings = load_census_file(args.file)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    from .model import census_to_dict

    _emit(canonical_json(census_to_dict(census)) + "\n", args.out)
    return 0


def cmd_validate(args) -> int:
    """Validate any artifact file; the kind is sniffed from content unless
    --kind is given."""
    kind = args.kind
    if kind is None:
        kind = _sniff_kind(args.file)
    if kind == "census":
        load_census_file(args.file)
    elif kind == "ballot":
        try:
            with open(args.file, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise VoteError("io-error", str(exc)) from exc
        except ValueError as exc:
            raise VoteError("parse-error", f"not valid JSON: {exc}") from exc
        items = data if isinstance(data, list) else [data]
        for item in items:
            try:
                ballot = ballot_from_dict(item)
            except (KeyError, TypeError, ValueError) as exc:
                raise VoteError("parse-error", f"bad ballot object: {exc}") from exc
            violations = validate_ballot(ballot)
            if violations:
                for v in violations:
                    print(f"violation: {v.code}: {v.message}", file=sys.stderr)
                raise VoteError(violations[0].code, violations[0].message)
    elif kind == "votes":
        _, votes = read_corpus_jsonl(args.file)
        for _, record in votes:
            if any(a < 0 for a in record.amounts.values()):
                raise VoteError("negative-amount", "corpus contains a negative amount")
    elif kind == "sim-config":
        try:
            with open(args.file, encoding="utf-8") as fh:
                parse_config_text(fh.read()).validate()
        except OSError as exc:
            raise VoteError("io-error", str(exc)) from exc
    else:
        raise VoteError("parse-error", f"cannot determine artifact kind of {args.file!r}")
    print("valid", file=sys.stderr)
    return 0


def _sniff_kind(path: str) -> str | None:
    try:
        with open(path, encoding="utf-8") as fh:
            head = fh.read(4096)
    except OSError as exc:
        raise VoteError("io-error", str(exc)) from exc
    stripped = head.lstrip()
    if stripped.startswith("ward,axis,category,count"):
        return "census"
    if stripped.startswith("{") or stripped.startswith("["):
        if '"projects"' in head:
            return "ballot"
        if '"record"' in head or '"simulation-meta"' in head:
            return "votes"
        return None
    if "=" in head:
        return "sim-config"
    return None


def cmd_serve(args) -> int:
    from .service import ServiceConfig, apply_env_overrides, parse_service_config, run

    config = ServiceConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = parse_service_config(fh.read())
        except OSError as exc:
            raise VoteError("io-error", str(exc)) from exc
    config = apply_env_overrides(config)
    run(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbengine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic vote corpus")
    p.add_argument("--ballot", required=True, help="ballot fixtures JSON")
    p.add_argument("--census", required=True, help="census CSV")
    p.add_argument("--rate", type=float, default=None, help="participation rate as a decimal, e.g. 0.02")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--concentration", type=float, default=None)
    p.add_argument("--config", default=None, help="key = value simulation config file")
    p.add_argument("--out", default=None, help="JSONL output path (stdout if omitted)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("aggregate", help="run aggregation rules over a corpus")
    p.add_argument("--votes", required=True)
    p.add_argument("--ballot", required=True)
    p.add_argument("--rules", default=None, help="comma list from: " + ",".join(agg.RULES))
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--ward", type=int, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_aggregate)

    p = sub.add_parser("analytics", help="dashboard payloads: demographics matrix and strips")
    p.add_argument("--votes", required=True)
    p.add_argument("--census", required=True)
    p.add_argument("--wards", default=None, help="comma list, default 29,35,36,49")
    p.add_argument("--axis", default="race", choices=("race", "age", "income", "education"))
    p.add_argument("--mode", default="counts", choices=("counts", "percent"))
    p.add_argument("--bins", type=int, default=analytics.DEFAULT_BIN_COUNT)
    p.add_argument("--ballot", default=None, help="include per-ward strips (needs project categories)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_analytics)

    p = sub.add_parser("ingest-census", help="parse and validate a census CSV")
    p.add_argument("file")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_ingest_census)

    p = sub.add_parser("validate", help="validate a ballot/census/corpus/config file")
    p.add_argument("file")
    p.add_argument("--kind", choices=("ballot", "census", "votes", "sim-config"), default=None)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", default=None)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else USAGE_ERROR
    try:
        return args.fn(args)
    except VoteError as err:
        return _fail(err)
    except OSError as exc:
        print(f"error: io-error: {exc}", file=sys.stderr)
        return IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
