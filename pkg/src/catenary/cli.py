"""Command-line entry point: ``catenary run|trace|suite``.

Exit codes: 0 pass, 1 verdict fail, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError
from .scenario import EXIT_CONFIG, bundled, orbit_export, run_scenario, verify_suite


def _resolve(arg: str) -> Path:
    # "bundled:NAME" refers to a scenario shipped with the package
    if arg.startswith("bundled:"):
        return bundled(arg.split(":", 1)[1])
    return Path(arg)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="catenary", description="Build and verify catenary constructions from scenario files.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("run", "run one scenario and write its report"),
        ("trace", "export an orbit trace CSV for a scenario"),
        ("suite", "run every scenario listed in a suite file"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("path", help="JSON file, or bundled:NAME for a shipped scenario")
        s.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        s.add_argument("--out-dir", default="catenary_out", help="directory for reports and CSV files")
        if name != "trace":
            s.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every tolerance")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        path = _resolve(args.path)
        if args.command == "run":
            rep = run_scenario(path, args.out_dir, args.seed, args.tolerance_scale)
            verdict = "PASS" if rep.passed else "FAIL"
            print(f"{rep.name}: {verdict} ({rep.wall_time:.2f}s) -> {Path(args.out_dir, rep.name + '.report.json')}")
            for c in rep.checks:
                mark = "ok " if c.passed else "BAD"
                print(f"  [{mark}] {c.name} = {float(c.value):.6g} (tol {c.tolerance:.3g})")
            if rep.error:
                print(f"  error: {rep.error}")
            wit = rep.witness()
            if wit is not None and wit.get("witness") is not None:
                w = wit["witness"]
                if isinstance(w, dict) and "point" in w:
                    w = w["point"]
                print(f"  witness: {json.dumps(w)[:300]}")
            return rep.exit_code
        if args.command == "trace":
            out = orbit_export(path, args.out_dir, args.seed)
            print(f"trace written to {out}")
            return 0
        res = verify_suite(path, args.out_dir, args.seed, args.tolerance_scale)
        for w in res.warnings:
            print(f"warning: {w}", file=sys.stderr)
        print(res.table())
        return res.exit_code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
