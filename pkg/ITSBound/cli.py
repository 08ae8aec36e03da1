#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# This file is part of ITSBound, a runtime-complexity analyzer for integer
# transition systems.
#
# This program is free software: you can redistribute it and/or modify it
# under the terms of the GNU General Public License as published by the Free
# Software Foundation, either version 3 of the License, or (at your option)
# any later version.
#
# This program is distributed in the hope that it will be useful, but WITHOUT
# ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or
# FITNESS FOR A PARTICULAR PURPOSE. See the included LICENSE file for details.

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional

from ITSBound.analysis import CFR_MODES, PRESETS, SOLVER_BACKENDS, AnalysisConfig, AnalysisResult, analyze
from ITSBound.exceptions import InvalidProgram, MalformedITS
from ITSBound.its_parser import parse_program

import logging
log = logging.getLogger('ITSBound')

EXIT_OK = 0
EXIT_PARSE_ERROR = 1
EXIT_INTERNAL_ERROR = 2

BUCKETS = ("O(1)", "O(n)", "O(n^2)", "O(n^>2)", "O(EXP)")
PROGRAM_SUFFIX = ".koat"


def render(result: AnalysisResult, report: str = "bound") -> str:
    """Text record of one result. `class` prints the class only, `full` adds tables and the proof log."""
    complexity = "INF?" if result.timeout else str(result.complexity)
    if report == "class":
        return complexity
    lines = ["{0} {1} ({2:.2f}s)".format(complexity, result.overall, result.time)]
    if report == "full":
        record = result.to_dict()
        lines.append("Runtime bounds:")
        lines.extend("  {0}: {1}".format(t, bound) for t, bound in record["rb"].items())
        lines.append("Size bounds:")
        lines.extend("  {0}: {1}".format(key, bound) for key, bound in record["sb"].items())
        lines.append("Proof:")
        lines.extend("  {0}".format(line) for line in result.proof_log)
    return "\n".join(lines)


def analyze_file(path: str, config: AnalysisConfig) -> Dict:
    """Analyse one file. Never raises: failures come back as an `error` record with an exit code."""
    try:
        with open(path, 'r') as fp:
            text = fp.read()
        program = parse_program(text)
    except (OSError, UnicodeDecodeError, MalformedITS, InvalidProgram) as err:
        log.error("Could not read {0}: {1}".format(path, err))
        return {"path": path, "error": str(err), "exit": EXIT_PARSE_ERROR}
    try:
        result = analyze(program, config)
    except Exception as err:
        log.exception("Analysis of {0} failed".format(path))
        return {"path": path, "error": "{0}: {1}".format(type(err).__name__, err), "exit": EXIT_INTERNAL_ERROR}
    log.info("{0}: {1} {2}".format(path, result.complexity, result.overall))
    record = result.to_dict()
    record["path"] = path
    record["exit"] = EXIT_OK
    record["_result"] = result
    return record


def _analyze_for_pool(path: str, config: AnalysisConfig) -> Dict:
    record = analyze_file(path, config)
    record.pop("_result", None)
    return record


def batch_table(records: Iterable[Dict]) -> str:
    """Counts per class, number of finite results, and average times (finite results, all results)."""
    records = list(records)
    counts = {bucket: 0 for bucket in BUCKETS}
    finite_times: List[float] = []
    all_times: List[float] = []
    errors = []
    for record in records:
        if "error" in record:
            errors.append(record)
            continue
        all_times.append(record["time"])
        bucket = record.get("bucket", record["class"])
        if bucket in counts:
            counts[bucket] += 1
            finite_times.append(record["time"])

    def average(values):
        return sum(values) / len(values) if values else 0.0

    header = list(BUCKETS) + ["<INF", "AVG+(s)", "AVG(s)"]
    row = [str(counts[bucket]) for bucket in BUCKETS]
    row += [str(len(finite_times)), "{0:.2f}".format(average(finite_times)), "{0:.2f}".format(average(all_times))]
    widths = [max(len(h), len(r)) for h, r in zip(header, row)]
    lines = [" ".join(h.rjust(w) for h, w in zip(header, widths)),
             " ".join(r.rjust(w) for r, w in zip(row, widths))]
    for record in errors:
        lines.append("error: {0}: {1}".format(record["path"], record["error"]))
    return "\n".join(lines)


def batch(directory: str, config: AnalysisConfig, jobs: int = 1) -> List[Dict]:
    """Analyse every program file in `directory`, `jobs` files at a time."""
    paths = sorted(os.path.join(directory, name) for name in os.listdir(directory) if name.endswith(PROGRAM_SUFFIX))
    if jobs <= 1 or len(paths) <= 1:
        return [_analyze_for_pool(path, config) for path in paths]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_analyze_for_pool, paths, [config] * len(paths)))


def build_config(args) -> AnalysisConfig:
    overrides = {}
    for name in ("mdepth", "timeout", "solver_timeout", "solver_backend"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.cfr is not None:
        overrides["cfr_mode"] = args.cfr
    if args.invariants:
        overrides["invariants"] = True
    if args.preset:
        return AnalysisConfig.from_preset(args.preset, **overrides)
    return AnalysisConfig(**overrides)


def run(argv: Optional[List[str]] = None, out=None) -> int:
    """Run the command line and return the exit code."""
    out = out or sys.stdout
    args = parse_arguments(argv)
    set_logging(args.verbose, args.debug)
    try:
        config = build_config(args)
    except ValueError as err:
        log.error(str(err))
        return EXIT_INTERNAL_ERROR
    exit_code = EXIT_OK
    for path in args.paths:
        if os.path.isdir(path):
            records = batch(path, config, args.jobs)
            if args.json:
                for record in records:
                    print(json.dumps(record, sort_keys=True), file=out)
            else:
                print(batch_table(records), file=out)
            continue
        record = analyze_file(path, config)
        exit_code = max(exit_code, record["exit"])
        if args.json:
            record.pop("_result", None)
            print(json.dumps(record, sort_keys=True), file=out)
        elif "error" in record:
            print("{0}: error: {1}".format(path, record["error"]), file=out)
        else:
            text = render(record["_result"], args.report)
            print("{0}: {1}".format(path, text) if len(args.paths) > 1 else text, file=out)
    return exit_code


def main():
    sys.exit(run())

# Command Line Functions below this point

def set_logging(verbose=False, debug=False):
    if debug:
        log.setLevel("DEBUG")
    elif verbose:
        log.setLevel("INFO")


def parse_arguments(argv: Optional[List[str]] = None):
    parser = argparse.ArgumentParser("itsbound")
    parser.add_argument("paths", nargs="+",
                        help="Program files, or directories of .koat files for a summary table.")
    parser.add_argument("--verbose", "-v",
                        help="Turn verbosity on",
                        action='store_true')
    parser.add_argument("--debug", "-d",
                        help="Turn debugging on",
                        action='store_true')
    parser.add_argument("--mdepth", type=int,
                        help="Maximal number of phases of a ranking function (1-10).")
    parser.add_argument("--cfr", choices=CFR_MODES,
                        help="Control-flow refinement mode.")
    parser.add_argument("--preset", choices=sorted(PRESETS),
                        help="Named configuration. Other flags override it.")
    parser.add_argument("--timeout", type=float,
                        help="Seconds allowed per program.")
    parser.add_argument("--solver-timeout", dest="solver_timeout", type=float,
                        help="Seconds allowed per solver call.")
    parser.add_argument("--solver", dest="solver_backend", choices=SOLVER_BACKENDS,
                        help="Solver backend.")
    parser.add_argument("--invariants",
                        help="Strengthen guards with interval invariants first.",
                        action='store_true')
    parser.add_argument("--report", choices=("class", "bound", "full"), default="bound",
                        help="How much to print per program.")
    parser.add_argument("--json",
                        help="Print one JSON object per program.",
                        action='store_true')
    parser.add_argument("--jobs", "-j", type=int, default=1,
                        help="Programs analysed in parallel in directory mode.")
    return parser.parse_args(argv)


if __name__ == '__main__':
    main()
