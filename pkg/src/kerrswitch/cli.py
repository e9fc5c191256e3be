"""Command-line front end.

    kerrswitch simulate <scenario> --out <dir> [--jobs N] [--json]
    kerrswitch validate <scenario>
    kerrswitch list-studies

``<scenario>`` is a JSON file path or the name of a bundled scenario.
Exit codes: 0 success, 2 invalid scenario, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .propagation import SolverError
from .scenario import STUDY_FIGURES, STUDY_KINDS, ScenarioError, bundled_names, check_preconditions, load_scenario
from .studies import ResultSet, run_study

log = logging.getLogger("kerrswitch")

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3


def _fmt(x) -> str:
    x = float(x)
    return "nan" if np.isnan(x) else f"{x:.15g}"


def csv_text(res: ResultSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(res.columns)
    for row in res.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if np.isnan(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_results(res: ResultSet, out: Path, stem: str, meta: dict, mirror_json: bool) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{stem}.csv", out / f"{stem}.meta.json"]
    paths[0].write_text(csv_text(res))
    paths[1].write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    if mirror_json:
        p = out / f"{stem}.json"
        rows = [[None if np.isnan(v) else float(v) for v in r] for r in res.rows]
        p.write_text(json.dumps({"columns": res.columns, "rows": rows}) + "\n")
        paths.append(p)
    return paths


def cmd_simulate(args) -> int:
    try:
        ls = load_scenario(args.scenario)
        rep = check_preconditions(ls)
        if rep.errors:
            raise ScenarioError("precondition failed:\n  " + "\n  ".join(rep.errors))
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    for w in rep.warnings:
        log.warning(w)
    t0 = time.perf_counter()
    try:
        res = run_study(ls, jobs=args.jobs)
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    wall = time.perf_counter() - t0
    meta = {
        "scenario": ls.name,
        "scenario_sha256": ls.digest,
        "tool_version": __version__,
        "wall_time_s": wall,
        "study": ls.kind,
        **res.metadata,
        "derived": rep.derived,
    }
    paths = write_results(res, Path(args.out), ls.name, meta, args.json)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        ls = load_scenario(args.scenario)
        rep = check_preconditions(ls)
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    for w in rep.warnings:
        print(f"warning: {w}")
    if rep.errors:
        for e in rep.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    print("OK")
    for k, v in rep.derived.items():
        print(f"  {k} = {v}")
    return EXIT_OK


def cmd_list(args) -> int:
    for kind in STUDY_KINDS:
        print(f"{kind}\tfigure {STUDY_FIGURES[kind]}")
    print("bundled scenarios: " + ", ".join(bundled_names()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kerrswitch", description="Kerr-Sagnac fiber switch simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("simulate", help="run a scenario and write CSV results")
    sp.add_argument("scenario")
    sp.add_argument("--out", required=True)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--json", action="store_true", help="also write a JSON mirror of the table")
    sp.set_defaults(func=cmd_simulate)
    vp = sub.add_parser("validate", help="check a scenario without running it")
    vp.add_argument("scenario")
    vp.set_defaults(func=cmd_validate)
    lp = sub.add_parser("list-studies", help="list study kinds and bundled scenarios")
    lp.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
