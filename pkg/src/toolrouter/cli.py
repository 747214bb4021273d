"""Command-line surface.

    toolrouter run --scenario S2 [--arch shr] [--format md|json] [--out F]
    toolrouter bench [--arch shr react static] [--seed N] [--fuzz N] [--diff]
    toolrouter project [--tasks-per-day N ...] [--failure-rate F]
    toolrouter report --in result.json [--diff] [--format md|json]

``bench`` exits nonzero when any cell departs from the embedded fixtures,
so it doubles as a CI gate.  TOOLROUTER_CONFIG may point at a JSON file of
monitor overrides applied to ad-hoc runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .baselines import audit, run_react, run_static_workflow
from .bench import (
    BenchConfig,
    ScaleProjection,
    diff_against_fixtures,
    load_result,
    measure_recovery_latency,
    persist_result,
    project_risk,
    render_projection,
    render_report,
    run_benchmark,
    run_fuzz,
)
from .monitors import MonitorConfig
from .scenarios import load_scenarios, run_self_healing

ENV_CONFIG = "TOOLROUTER_CONFIG"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _env_monitor_config() -> MonitorConfig | None:
    """Optional monitor overrides from the TOOLROUTER_CONFIG file
    (JSON object with a "monitor" section)."""
    path = os.environ.get(ENV_CONFIG)
    if not path:
        return None
    if not Path(path).exists():
        print(f"warning: {ENV_CONFIG}={path} does not exist; ignoring", file=sys.stderr)
        return None
    doc = json.loads(Path(path).read_text())
    section = doc.get("monitor")
    return MonitorConfig(**section) if section else None


def _cmd_run(args) -> int:
    scenarios = {s.id: s for s in load_scenarios()}
    if args.scenario not in scenarios:
        print(f"unknown scenario {args.scenario!r}; choose from {sorted(scenarios)}", file=sys.stderr)
        return 2
    scenario = scenarios[args.scenario]
    if args.arch == "shr":
        trace = run_self_healing(scenario, monitor_config=_env_monitor_config())
        report = audit(trace, scenario)
    elif args.arch == "react":
        trace = run_react(scenario)
        report = audit(trace, scenario)
    else:
        trace, report = run_static_workflow(scenario)
    if args.format == "json":
        doc = {"trace": trace.as_dict(), "audit": report.as_dict()}
        _emit(json.dumps(doc, indent=2, sort_keys=True), args.out)
    else:
        lines = [
            f"# {scenario.id}: {scenario.name} [{args.arch}]",
            "",
            f"- status: {trace.status.value}",
            f"- llm_calls: {trace.llm_calls}",
            f"- tool_calls: {trace.tool_call_count}",
            f"- recoveries: {trace.recovery_events}",
            f"- correct: {report.correct}",
            f"- silent_failure: {report.silent_failure}",
            f"- calls: {', '.join(c.node + ('' if c.success else '(failed)') for c in trace.tool_calls)}",
        ]
        _emit("\n".join(lines), args.out)
    return 0


def _cmd_bench(args) -> int:
    config = BenchConfig(
        scenario_ids=tuple(args.scenario) if args.scenario else None,
        architectures=tuple(args.arch),
        seed=args.seed,
    )
    result = run_benchmark(config)
    text = render_report(result, fmt=args.format, diff=args.diff)
    _emit(text, args.out)
    if args.save:
        persist_result(result, args.save)
    if args.fuzz:
        stats = run_fuzz(args.fuzz, seed=args.seed)
        print(f"fuzz: {stats}", file=sys.stderr)
        if stats["silent"] or stats["success"] + stats["escalated"] != stats["runs"]:
            return 1
    problems = diff_against_fixtures(result)
    if problems:
        for p in problems:
            print(f"fixture diff: {p}", file=sys.stderr)
        return 1
    return 0


def _cmd_project(args) -> int:
    projection = ScaleProjection(failure_rate=args.failure_rate)
    rows = project_risk(args.tasks_per_day, projection)
    _emit(render_projection(rows, fmt=args.format), args.out)
    return 0


def _cmd_report(args) -> int:
    result = load_result(args.infile, strict=args.strict)
    text = render_report(result, fmt=args.format, diff=args.diff)
    _emit(text, args.out)
    if args.diff and diff_against_fixtures(result):
        return 1
    return 0


def _cmd_latency(args) -> int:
    results = measure_recovery_latency(args.repetitions)
    _emit(json.dumps(results, indent=2, sort_keys=True), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toolrouter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario under one architecture")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--arch", choices=["shr", "react", "static"], default="shr")
    p_run.add_argument("--format", choices=["md", "json"], default="md")
    p_run.add_argument("--out")
    p_run.set_defaults(fn=_cmd_run)

    p_bench = sub.add_parser("bench", help="run the full suite and diff against fixtures")
    p_bench.add_argument("--scenario", nargs="*", default=None)
    p_bench.add_argument("--arch", nargs="*", default=list(("shr", "react", "static")))
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--fuzz", type=int, default=0, help="extra randomized fault schedules")
    p_bench.add_argument("--diff", action="store_true", help="include the fixture diff in the report")
    p_bench.add_argument("--format", choices=["md", "json"], default="md")
    p_bench.add_argument("--out")
    p_bench.add_argument("--save", help="persist the raw result JSON here")
    p_bench.set_defaults(fn=_cmd_bench)

    p_proj = sub.add_parser("project", help="operational risk projection at scale")
    p_proj.add_argument("--tasks-per-day", type=int, nargs="*", default=[10_000, 100_000, 1_000_000])
    p_proj.add_argument("--failure-rate", type=float, default=0.05)
    p_proj.add_argument("--format", choices=["md", "json"], default="md")
    p_proj.add_argument("--out")
    p_proj.set_defaults(fn=_cmd_project)

    p_rep = sub.add_parser("report", help="render or diff a persisted result")
    p_rep.add_argument("--in", dest="infile", required=True)
    p_rep.add_argument("--diff", action="store_true")
    p_rep.add_argument("--strict", action="store_true", help="fail on fixture digest mismatch")
    p_rep.add_argument("--format", choices=["md", "json"], default="md")
    p_rep.add_argument("--out")
    p_rep.set_defaults(fn=_cmd_report)

    p_lat = sub.add_parser("latency", help="recovery microbenchmark (quarantine + recompute)")
    p_lat.add_argument("--repetitions", type=int, default=200)
    p_lat.add_argument("--out")
    p_lat.set_defaults(fn=_cmd_latency)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
