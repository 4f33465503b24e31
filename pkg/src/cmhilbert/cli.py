"""``cmverify``: list, run and emit verification scenarios.

Exit status is 0 when every check passes, 1 when a check fails (the report
is still written) and 2 for usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from .report import (
    DEFAULT_SEED,
    ConfigError,
    NoSeries,
    get_scenario,
    load_config,
    resolve_parameters,
    resolve_seed,
    run_many,
    run_scenario,
    write_series,
)
from .scenarios import REGISTRY

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"cmverify: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cmverify", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ls = sub.add_parser("list", help="show the scenario catalog with defaults")
    ls.add_argument("--json", action="store_true", help="machine-readable catalog")

    run = sub.add_parser("run", help="run scenarios and write JSON reports")
    run.add_argument("--scenario", action="append", required=True, help="scenario id or 'all'; repeatable")
    run.add_argument("--config", help="INI file with [global] seed and one section per scenario")
    run.add_argument("--out", help="report path (one scenario) or directory (several)")
    run.add_argument("--seed", type=int, help=f"overrides the config seed (default {DEFAULT_SEED})")
    run.add_argument("--parallel", type=int, default=1, metavar="WORKERS", help="run scenarios in worker processes")

    emit = sub.add_parser("emit", help="write a scenario's data series as CSV")
    emit.add_argument("--scenario", required=True)
    emit.add_argument("--out", required=True)
    emit.add_argument("--config")
    emit.add_argument("--seed", type=int)
    return p


def _list(args) -> int:
    if args.json:
        doc = [
            {"id": s.id, "description": s.description, "topic": s.topic, "anchors": list(s.anchors),
             "defaults": s.defaults, "series": s.has_series}
            for s in REGISTRY.values()
        ]
        print(json.dumps(doc, indent=2, sort_keys=True))
        return EXIT_PASS
    for s in REGISTRY.values():
        print(f"{s.id}")
        print(f"    {s.description}")
        print(f"    topic: {s.topic}; anchors: {'; '.join(s.anchors)}")
        print(f"    defaults: {', '.join(f'{k}={v}' for k, v in s.defaults.items())}")
    return EXIT_PASS


def _ids(requested: list[str]) -> list[str]:
    ids: list[str] = []
    for sid in requested:
        for one in (REGISTRY if sid == "all" else [sid]):
            get_scenario(one)
            if one not in ids:
                ids.append(one)
    return ids


def _run(args) -> int:
    import os

    ids = _ids(args.scenario)
    cp = load_config(args.config)
    seed = resolve_seed(cp, args.seed)
    if args.parallel < 1:
        raise ConfigError("--parallel needs at least one worker")
    reports = run_many(ids, cp, seed, args.parallel)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.scenario} ({len(r.checks)} checks, {r.elapsed:.2f}s)")
        for c in r.checks:
            if not c.passed:
                print(f"    {c.name}: residual {c.residual:.3e} > tolerance {c.tolerance:.1e}")
    if args.out:
        if len(reports) == 1 and not os.path.isdir(args.out):
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(reports[0].to_json() + "\n")
        else:
            os.makedirs(args.out, exist_ok=True)
            for r in reports:
                with open(os.path.join(args.out, f"{r.scenario}.json"), "w", encoding="utf-8") as fh:
                    fh.write(r.to_json() + "\n")
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


def _emit(args) -> int:
    sc = get_scenario(args.scenario)
    if not sc.has_series:
        raise NoSeries(f"scenario {sc.id!r} produces no data series")
    cp = load_config(args.config)
    report = run_scenario(sc.id, resolve_parameters(sc, cp), resolve_seed(cp, args.seed))
    n = write_series(report, args.out)
    print(f"wrote {n} rows to {args.out}")
    return EXIT_PASS if report.passed else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return {"list": _list, "run": _run, "emit": _emit}[args.command](args)
    except (ConfigError, NoSeries) as exc:
        print(f"cmverify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
