"""Command-line entry point: run a verification suite and write a JSON report."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import suites

SCHEMA = "hkrlab-report/1"

# per command: parameter -> default; the keys are also the accepted flags
COMMANDS = {
    "assoc": {"A": suites.DEFAULT_MATRIX, "order": 3, "samples": 50, "seed": 0},
    "obstruction": {"order": 3, "samples": 20, "seed": 0},
    "sp-check": {"A": suites.DEFAULT_MATRIX, "samples": 20, "seed": 0},
    "bimodule": {"A": suites.DEFAULT_MATRIX, "order": 3, "seed": 0},
    "subalgebra": {"A": suites.DEFAULT_MATRIX, "order": 3, "samples": 50, "seed": 0},
    "chainmaps": {"m": 2, "degree": 3, "samples": 50, "seed": 0},
    "hkr": {"m": 2, "k": 1, "n": 2, "d": 1, "o": 1, "module": "diffop", "seed": 0},
}

HELP = {
    "assoc": "associativity, unitality and Poisson checks for an exponential star product",
    "obstruction": "closedness of the module and equivalence obstruction cocycles",
    "sp-check": "sP-bracket properties i)-iii) and curvature, with a twisted negative control",
    "bimodule": "build, conjugate and modify bimodule deformations from an sP-bracket",
    "subalgebra": "lifted star product on the total space and its pulled-back bracket",
    "chainmaps": "bar and Koszul complex identities and the comparison maps F, G, Theta",
    "hkr": "truncated cohomology against the closed-form count",
}

FLAGS = {
    "A": dict(type=str, help='constant matrix of the star product, rows separated by ";"'),
    "order": dict(type=int, help="order cap N of the formal series"),
    "samples": dict(type=int, help="number of random samples per check"),
    "seed": dict(type=int, help="root seed for every sampled check"),
    "m": dict(type=int, help="base dimension"),
    "k": dict(type=int, help="rank of the projection"),
    "n": dict(type=int, help="total space dimension"),
    "d": dict(type=int, help="coefficient degree bound"),
    "o": dict(type=int, help="symbol order bound"),
    "module": dict(type=str, choices=["functions", "diffop"], help="coefficient module"),
    "degree": dict(type=int, help="highest chain degree"),
}

LIMITS = {
    "order": (0, 6),
    "samples": (1, 10_000),
    "m": (1, 4),
    "k": (0, 4),
    "n": (1, 6),
    "d": (0, 6),
    "o": (0, 6),
    "degree": (0, 4),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hkrlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, defaults in COMMANDS.items():
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        for key in defaults:
            flag = f"--{key}"
            p.add_argument(flag, dest=key, default=None, **FLAGS[key])
            if key == "order":
                p.add_argument("--N", dest=key, default=None, type=int, help=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON file whose keys override the flags")
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--json", action="store_true", help="print the JSON report instead of the table")
    return parser


def resolve_params(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then flags, then the config file."""
    defaults = COMMANDS[command]
    params = dict(defaults)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = sorted(set(cfg) - set(defaults))
        if unknown:
            raise ValueError(f"unknown config keys for {command}: {', '.join(unknown)}")
        for key, val in cfg.items():
            want = type(defaults[key])
            if want is int and (not isinstance(val, int) or isinstance(val, bool)):
                raise ValueError(f"config key {key} must be an integer")
            if want is str and not isinstance(val, str):
                raise ValueError(f"config key {key} must be a string")
            params[key] = val
    for key, (lo, hi) in LIMITS.items():
        if key in params and not lo <= params[key] <= hi:
            raise ValueError(f"{key} = {params[key]} is outside {lo}..{hi}")
    if "module" in params and params["module"] not in ("functions", "diffop"):
        raise ValueError("module must be functions or diffop")
    return params


def run_suite(command: str, params: dict) -> suites.Result:
    p = dict(params)
    if command == "assoc":
        return suites.assoc_suite(p["A"], p["order"], p["samples"], p["seed"])
    if command == "obstruction":
        if p["order"] < 1:
            raise ValueError("obstruction needs order >= 1")
        return suites.obstruction_suite(p["order"], p["samples"], p["seed"])
    if command == "sp-check":
        return suites.sp_check_suite(p["A"], 1, p["samples"], p["seed"])
    if command == "bimodule":
        return suites.bimodule_suite(p["A"], p["order"], seed=p["seed"])
    if command == "subalgebra":
        return suites.subalgebra_suite(p["A"], p["order"], p["samples"], p["seed"])
    if command == "chainmaps":
        return suites.chainmaps_suite(p["m"], p["degree"], p["samples"], p["seed"])
    if command == "hkr":
        return suites.hkr_suite(p["m"], p["k"], p["n"], p["d"], p["o"], p["module"])
    raise ValueError(f"unknown command {command}")


def make_report(command: str, params: dict, result: suites.Result) -> dict:
    report = {
        "schema": SCHEMA,
        "command": command,
        "params": {k: v for k, v in params.items() if k != "seed"},
        "seed": params["seed"],
        "checks": result.checks,
        "ok": result.ok,
    }
    if result.tables:
        report["tables"] = result.tables
    return report


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def render_text(report: dict) -> str:
    lines = [f"{report['command']}  seed={report['seed']}  " + " ".join(
        f"{k}={v}" for k, v in sorted(report["params"].items()))]
    rows = report.get("tables", {}).get("cohomology")
    if rows:
        lines.append("")
        lines.append(_align([["degree", "direct", "closed-form", "match"]] + [
            [str(r["degree"]), str(r["direct"]), str(r["closed_form"]), "yes" if r["match"] else "no"]
            for r in rows
        ]))
    lines.append("")
    lines.append(_align([["check", "status"]] + [[c["name"], c["status"]] for c in report["checks"]]))
    passed = sum(c["status"] == suites.PASS for c in report["checks"])
    lines.append("")
    lines.append(f"{passed}/{len(report['checks'])} checks passed")
    return "\n".join(lines) + "\n"


def _align(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        params = resolve_params(args.command, args)
        result = run_suite(args.command, params)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sub.print_usage(sys.stderr)
        print(f"hkrlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    report = make_report(args.command, params, result)
    text = dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text if args.json else render_text(report))
    if not result.ok:
        first = next(c for c in result.checks if c["status"] != suites.PASS)
        print(f"first failure: {first['name']}: {json.dumps(first.get('witness'), sort_keys=True)}",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
