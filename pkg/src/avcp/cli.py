"""Command-line interface: ``avcp verify | simulate | derive | demo``.

Exit status: 0 on success, 1 when a check (or a simulation consistency
test) fails, 2 on usage, parse and unknown-name errors.  Demos never exit
with status 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import format_polynomial, is_simple, normal_order, transcribe
from .arrangements import (
    analytic_expected_output,
    arrangement_functional,
    monte_carlo_samples,
    output_expectation,
    representing_operator,
    summarize,
)
from .checks import GROUPS, run_suite
from .demos import DEMOS, run_demo
from .errors import AVCPError, NonScalarCommutator, NotSimple, ParseError, UnknownCheckName, UnknownDemo
from .operators import HERMITIAN, expectation
from .scenario import build_context, context_from_flags, load_config, load_scenario, resolve_scenario

SEED_ENV = "AVCP_SEED"
VERIFY_SCHEMA = "avcp.verify/1"
SIMULATE_SCHEMA = "avcp.simulate/1"
DERIVE_SCHEMA = "avcp.derive/1"
DEMO_SCHEMA = "avcp.demo/1"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    scenario_path: str | None = None
    seed: int | None = None
    n_runs: int | None = None
    tolerance_overrides: dict = field(default_factory=dict)
    output_format: str = "text"
    workers: int = 1

    def __post_init__(self):
        if self.n_runs is not None and self.n_runs < 1:
            raise ValueError("n_runs must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


def plain(obj):
    """Recursively convert numpy scalars and tuples to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def dumps(report: dict) -> str:
    return json.dumps(plain(report), indent=2, sort_keys=True, allow_nan=False)


def _parse_assignments(items, what: str) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise ParseError("%s must look like NAME=VALUE, got %r" % (what, item))
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ParseError("%s value for %s is not a number: %r" % (what, name, value)) from None
    return out


def _seed(cli_seed, file_seed=None) -> int | None:
    if cli_seed is not None:
        return cli_seed
    if file_seed is not None:
        return file_seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ParseError("%s must be an integer, got %r" % (SEED_ENV, env)) from None
    return None


# ---------------------------------------------------------------------------
# verify


def _apply_overrides(results, overrides):
    from .checks import CheckResult

    names = {r.name for r in results}
    for key in overrides:
        if key not in names:
            raise UnknownCheckName("no check named %r to override" % key)
    return [
        CheckResult(r.name, r.measured, overrides[r.name], r.details) if r.name in overrides else r for r in results
    ]


def cmd_verify(config: RunConfig, only=None, j_max="10") -> tuple[int, str]:
    groups = []
    for item in only or ():
        groups.extend(g for g in item.split(",") if g)
    for g in groups:
        if g not in GROUPS:
            raise UnknownCheckName("unknown check group %r; choose from %s" % (g, ", ".join(GROUPS)))
    results = _apply_overrides(run_suite(groups or None, j_max), config.tolerance_overrides)
    ok = all(r.passed for r in results)
    report = {
        "schema": VERIFY_SCHEMA,
        "groups": groups or list(GROUPS),
        "j_max": str(j_max),
        "passed": ok,
        "results": [r.to_dict() for r in results],
    }
    if config.output_format == "json":
        text = dumps(report)
    else:
        width = max(len(r.name) for r in results)
        lines = ["%-4s  %-*s  %12s  %10s  %s" % ("", width, "check", "measured", "tolerance", "details")]
        for r in results:
            lines.append(
                "%-4s  %-*s  %12.3e  %10.1e  %s" % ("ok" if r.passed else "FAIL", width, r.name, r.measured, r.tolerance, r.details)
            )
        lines.append("%d checks, %d failed" % (len(results), sum(not r.passed for r in results)))
        text = "\n".join(lines)
    return (EXIT_OK if ok else EXIT_FAIL), text


# ---------------------------------------------------------------------------
# simulate


def simulate_report(config: RunConfig) -> dict:
    path = resolve_scenario(config.scenario_path)
    sc = load_scenario(path)
    seed = _seed(config.seed, sc.seed)
    if seed is None:
        raise ParseError("simulate needs a seed: pass --seed, set it in the scenario or set %s" % SEED_ENV)
    n_runs = config.n_runs or sc.n_runs
    q = sc.arrangement()
    samples = monte_carlo_samples(q, sc.state, n_runs, seed, config.workers)
    mean, stderr = summarize(samples)
    analytic = analytic_expected_output(q, sc.state)
    verdict = representing_operator(arrangement_functional(q), q.dim, hbar=q.hbar)
    support = sorted({round(float(x), 12) + 0.0 for x in np.unique(samples)})
    floor = 1e-12 * max(1.0, abs(analytic))
    consistent = abs(mean - analytic) <= 4 * stderr + floor
    report = {
        "schema": SIMULATE_SCHEMA,
        "scenario": sc.name,
        "seed": seed,
        "n_runs": n_runs,
        "workers": config.workers,
        "copies": [list(c) for c in q.copies],
        "conforms": q.conforms,
        "analytic_mean": analytic,
        "sampled_mean": mean,
        "sampled_stderr": stderr,
        "consistent": consistent,
        "support": support if len(support) <= 32 else None,
        "support_size": len(support),
        "representable": bool(verdict),
    }
    if verdict:
        report["verdict"] = "Representable"
        report["operator_mean"] = expectation(verdict.operator, q.state_at_inputs(sc.state))
    else:
        report["verdict"] = "NotRepresentable"
        report["reason"] = verdict.reason
    if q.output is not None:
        report["output_mean"] = output_expectation(q, sc.state)
    return report


def _format_simulate(r: dict) -> str:
    lines = [
        "scenario        %s" % r["scenario"],
        "seed            %d" % r["seed"],
        "runs            %d (workers %d)" % (r["n_runs"], r["workers"]),
        "copies          %s%s" % (r["copies"], "" if r["conforms"] else "  (does not follow the commutation rule)"),
        "analytic mean   %.12g" % r["analytic_mean"],
        "sampled mean    %.12g +- %.3g" % (r["sampled_mean"], r["sampled_stderr"]),
        "consistent      %s (|sampled - analytic| <= 4 stderr)" % r["consistent"],
    ]
    if r["support"] is not None:
        lines.append("support         {%s}" % ", ".join("%.12g" % x for x in r["support"]))
    else:
        lines.append("support         %d distinct values" % r["support_size"])
    if "output_mean" in r:
        lines.append("output <C>(t2)  %.12g" % r["output_mean"])
    if r["representable"]:
        lines.append("verdict         Representable (<M> = %.12g)" % r["operator_mean"])
    else:
        lines.append("verdict         NotRepresentable: %s" % r["reason"])
    return "\n".join(lines)


def cmd_simulate(config: RunConfig) -> tuple[int, str]:
    report = simulate_report(config)
    text = dumps(report) if config.output_format == "json" else _format_simulate(report)
    return (EXIT_OK if report["consistent"] else EXIT_FAIL), text


# ---------------------------------------------------------------------------
# derive


def _context_for(args, params):
    if args.context:
        cfg = load_config(args.context)
        cfg.setdefault("params", {}).update(params)
        return build_context(cfg, Path(args.context).parent)
    if args.spin is not None:
        return context_from_flags(spin=args.spin, hbar=args.hbar, params=params)
    if args.grid is not None:
        return context_from_flags(grid=args.grid, length=args.length, hbar=args.hbar, params=params)
    raise ParseError("derive needs --spin, --grid or --context")


def derive_report(args, config: RunConfig) -> dict:
    params = _parse_assignments(args.param, "--param")
    context = _context_for(args, params)
    poly = context.parse(args.expression)
    verdict = is_simple(poly, context.ctx)
    if not verdict:
        raise NotSimple(verdict.witness)
    report = {"schema": DERIVE_SCHEMA, "expression": args.expression, "expanded": format_polynomial(poly)}
    if args.symbolic:
        try:
            report["normal_form"] = format_polynomial(normal_order(poly, context.ctx))
        except NonScalarCommutator:
            report["normal_form"] = format_polynomial(poly)
        return report
    op = transcribe(poly, context.ctx, context.operators, context.params)
    report.update({"dim": op.dim, "hermitian": op.kind == HERMITIAN, "matrix": plain(op.matrix.tolist())})
    return report


def _format_derive(r: dict) -> str:
    if "normal_form" in r:
        return r["normal_form"]
    lines = ["%s  (%dx%d, %s)" % (r["expression"], r["dim"], r["dim"], "Hermitian" if r["hermitian"] else "general")]
    for row in r["matrix"]:
        lines.append("  ".join("%+.10g%+.10gi" % (re + 0.0, im + 0.0) for re, im in row))
    return "\n".join(lines)


def cmd_derive(args, config: RunConfig) -> tuple[int, str]:
    report = derive_report(args, config)
    return EXIT_OK, dumps(report) if config.output_format == "json" else _format_derive(report)


# ---------------------------------------------------------------------------
# demo


def cmd_demo(name: str, config: RunConfig) -> tuple[int, str]:
    rep = run_demo(name)
    if config.output_format == "json":
        return EXIT_OK, dumps({"schema": DEMO_SCHEMA, **rep.to_dict()})
    return EXIT_OK, rep.text()


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avcp", description="Average-value correspondence rule engine.")
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "json"), default="text", help="report format")

    v = sub.add_parser("verify", parents=[fmt], help="run the identity checks")
    v.add_argument("--only", action="append", metavar="GROUP", help="group(s): %s" % ", ".join(GROUPS))
    v.add_argument("--j-max", default="10", help="largest spin for the angular group (default 10)")
    v.add_argument("--tol", action="append", metavar="CHECK=VALUE", help="override a check tolerance")

    s = sub.add_parser("simulate", parents=[fmt], help="run a scenario file")
    s.add_argument("scenario", help="scenario file, or the name of a shipped scenario")
    s.add_argument("--seed", type=int, help="master seed (default: scenario, then $%s)" % SEED_ENV)
    s.add_argument("--n-runs", type=int, help="number of simulated runs")
    s.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")

    d = sub.add_parser("derive", parents=[fmt], help="transcribe an expression into an operator")
    d.add_argument("expression")
    d.add_argument("--spin", help="spin-j representation (e.g. 1/2, 1)")
    d.add_argument("--grid", type=int, help="periodic grid with this many points")
    d.add_argument("--length", type=float, default=20.0, help="grid box length")
    d.add_argument("--hbar", type=float, default=1.0)
    d.add_argument("--context", help="context file")
    d.add_argument("--param", action="append", metavar="NAME=VALUE", help="scalar parameter")
    d.add_argument("--symbolic", action="store_true", help="print the normal form instead of a matrix")

    m = sub.add_parser("demo", parents=[fmt], help="run a demonstration")
    m.add_argument("name", help="one of: %s" % ", ".join(DEMOS))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            config = RunConfig(
                "verify", tolerance_overrides=_parse_assignments(args.tol, "--tol"), output_format=args.format
            )
            status, text = cmd_verify(config, args.only, args.j_max)
        elif args.command == "simulate":
            config = RunConfig(
                "simulate", args.scenario, args.seed, args.n_runs, output_format=args.format, workers=args.workers
            )
            status, text = cmd_simulate(config)
        elif args.command == "derive":
            status, text = cmd_derive(args, RunConfig("derive", output_format=args.format))
        else:
            status, text = cmd_demo(args.name, RunConfig("demo", output_format=args.format))
    except NotSimple as exc:
        print("refused: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (UnknownCheckName, UnknownDemo) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (AVCPError, FileNotFoundError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    print(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
