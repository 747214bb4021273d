"""Benchmark harness: runs the three architectures over the scenario suite,
aggregates results, renders reports, and projects operational risk at scale.

Reports are canonical JSON (stable key order, no wall-clock fields), so two
runs with the same seed are byte-identical.  A diff mode compares every
table cell against the embedded fixtures; the CLI turns any discrepancy
into a nonzero exit code.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .baselines import audit, run_react, run_static_workflow
from .calibration import SimClock
from .orchestrator import TraceStatus
from .scenarios import (
    EXPECTED_FIXTURE_DIGEST,
    FaultEntry,
    FaultEffect,
    FaultSchedule,
    Scenario,
    ScheduledInvoker,
    ScheduledProber,
    load_scenarios,
    run_self_healing,
    scenario_tool_states,
)
from .topologies import START, TopologyKind, achieved_outcomes, build_topology
from .orchestrator import RuleReasoner, TaskRequest, execute_task

logger = logging.getLogger(__name__)

ARCHITECTURES = ("shr", "react", "static")
ARCH_LABELS = {"shr": "Self-Healing Router", "react": "ReAct", "static": "Static Workflow"}


class BenchError(Exception):
    pass


class ConfigInvalid(BenchError):
    pass


class UnsupportedFormat(BenchError):
    pass


class DigestMismatch(BenchError):
    pass


class IoFailure(BenchError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    scenario_ids: tuple[str, ...] | None = None  # None = all 19
    architectures: tuple[str, ...] = ARCHITECTURES
    seed: int = 0

    def validate(self) -> "BenchConfig":
        bad = [a for a in self.architectures if a not in ARCHITECTURES]
        if bad:
            raise ConfigInvalid(f"unknown architectures {bad}")
        if not self.architectures:
            raise ConfigInvalid("at least one architecture required")
        return self

    def digest(self) -> str:
        blob = json.dumps(
            {"scenarios": self.scenario_ids, "arch": self.architectures, "seed": self.seed},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class BenchRow:
    scenario: str
    domain: str
    arch: str
    correct: bool
    llm_calls: int
    tool_calls: int
    recoveries: int
    silent_failure: bool
    status: str
    classifiers_lost: int | None = None

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class BenchResult:
    rows: list[BenchRow]
    aggregates: dict[str, dict]
    metadata: dict

    def as_dict(self) -> dict:
        return {
            "rows": [r.as_dict() for r in self.rows],
            "aggregates": self.aggregates,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_dict(doc: dict) -> "BenchResult":
        rows = [BenchRow(**r) for r in doc["rows"]]
        return BenchResult(rows=rows, aggregates=doc["aggregates"], metadata=doc["metadata"])

    @staticmethod
    def from_json(text: str) -> "BenchResult":
        return BenchResult.from_dict(json.loads(text))

    def row(self, scenario: str, arch: str) -> BenchRow:
        for r in self.rows:
            if r.scenario == scenario and r.arch == arch:
                return r
        raise KeyError((scenario, arch))


def _aggregate(rows: list[BenchRow], archs: tuple[str, ...]) -> dict[str, dict]:
    out = {}
    for arch in archs:
        sub = [r for r in rows if r.arch == arch]
        out[arch] = {
            "scenarios": len(sub),
            "correct": sum(1 for r in sub if r.correct),
            "llm_calls": sum(r.llm_calls for r in sub),
            "tool_calls": sum(r.tool_calls for r in sub),
            "recoveries": sum(r.recoveries for r in sub),
            "silent_failures": sum(1 for r in sub if r.silent_failure),
        }
    return out


def run_benchmark(config: BenchConfig | None = None) -> BenchResult:
    config = (config or BenchConfig()).validate()
    scenarios = load_scenarios()
    if config.scenario_ids is not None:
        wanted = set(config.scenario_ids)
        unknown = wanted - {s.id for s in scenarios}
        if unknown:
            raise ConfigInvalid(f"unknown scenarios {sorted(unknown)}")
        scenarios = [s for s in scenarios if s.id in wanted]
    rows: list[BenchRow] = []
    for scenario in scenarios:
        for arch in config.architectures:
            rows.append(_run_one(scenario, arch))
    result = BenchResult(
        rows=rows,
        aggregates=_aggregate(rows, config.architectures),
        metadata={
            "seed": config.seed,
            "config_digest": config.digest(),
            "fixture_digest": EXPECTED_FIXTURE_DIGEST,
        },
    )
    return result


def _run_one(scenario: Scenario, arch: str) -> BenchRow:
    if arch == "shr":
        trace = run_self_healing(scenario)
        report = audit(trace, scenario)
        lost = None
    elif arch == "react":
        trace = run_react(scenario)
        report = audit(trace, scenario)
        lost = None
    elif arch == "static":
        trace, report = run_static_workflow(scenario)
        lost = report.classifiers_lost
    else:
        raise ConfigInvalid(f"unknown architecture {arch!r}")
    return BenchRow(
        scenario=scenario.id,
        domain=scenario.domain,
        arch=arch,
        correct=report.correct,
        llm_calls=trace.llm_calls,
        tool_calls=trace.tool_call_count,
        recoveries=trace.recovery_events,
        silent_failure=report.silent_failure,
        status=trace.status.value,
        classifiers_lost=lost,
    )


# -- fixture diff -------------------------------------------------------


def diff_against_fixtures(result: BenchResult) -> list[str]:
    """Compare each cell against the embedded expected values.  Returns a
    list of human-readable discrepancies; empty means fixture-clean."""
    problems: list[str] = []
    scenarios = {s.id: s for s in load_scenarios()}
    for row in result.rows:
        exp = scenarios[row.scenario].expected
        if row.arch == "shr":
            checks = [("llm_calls", row.llm_calls, exp.shr_llm), ("tool_calls", row.tool_calls, exp.shr_tools)]
            checks.append(("recoveries", row.recoveries, exp.shr_recoveries))
            checks.append(("status", row.status, exp.shr_status))
        elif row.arch == "react":
            checks = [("llm_calls", row.llm_calls, exp.react_llm), ("tool_calls", row.tool_calls, exp.react_tools)]
        else:
            checks = [
                ("silent_failure", row.silent_failure, exp.workflow_silent),
                ("tool_calls", row.tool_calls, exp.workflow_tools),
                ("recoveries", row.recoveries, exp.workflow_recoveries),
            ]
            if exp.classifiers_lost is not None:
                checks.append(("classifiers_lost", row.classifiers_lost, exp.classifiers_lost))
        for cell, got, want in checks:
            if got != want:
                problems.append(f"{row.scenario}/{row.arch}/{cell}: got {got!r}, expected {want!r}")
    return problems


# -- rendering ----------------------------------------------------------

_DOMAIN_TITLES = {
    "customer_support": "Customer Support (linear pipeline)",
    "travel_booking": "Travel Booking (dependency DAG)",
    "content_moderation": "Content Moderation (parallel fan-out)",
}


def render_report(result: BenchResult, fmt: str = "md", diff: bool = False) -> str:
    if fmt == "json":
        doc = result.as_dict()
        if diff:
            doc["diff"] = diff_against_fixtures(result)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt != "md":
        raise UnsupportedFormat(f"unsupported format {fmt!r}")
    lines: list[str] = ["# Benchmark report", ""]
    domains: dict[str, list[str]] = {}
    for row in result.rows:
        domains.setdefault(row.domain, [])
        if row.scenario not in domains[row.domain]:
            domains[row.domain].append(row.scenario)
    archs = [a for a in ARCHITECTURES if a in result.aggregates]

    def cell(sid: str, arch: str, attr: str, default="-"):
        try:
            return getattr(result.row(sid, arch), attr)
        except KeyError:
            return default

    for domain, sids in domains.items():
        lines.append(f"## {_DOMAIN_TITLES.get(domain, domain)}")
        lines.append("")
        header = "| Scenario | SHR LLM | ReAct LLM | WF LLM | SHR Tools | SHR Recov | ReAct Tools | WF Silent |"
        if domain == "content_moderation":
            header += " WF Lost |"
        lines.append(header)
        lines.append("|" + "---|" * (header.count("|") - 1))
        for sid in sids:
            parts = [
                sid,
                cell(sid, "shr", "llm_calls"),
                cell(sid, "react", "llm_calls"),
                cell(sid, "static", "llm_calls"),
                cell(sid, "shr", "tool_calls"),
                cell(sid, "shr", "recoveries"),
                cell(sid, "react", "tool_calls"),
                cell(sid, "static", "silent_failure"),
            ]
            if domain == "content_moderation":
                parts.append(cell(sid, "static", "classifiers_lost"))
            lines.append("| " + " | ".join(str(p) for p in parts) + " |")
        lines.append("")
    lines.append("## Aggregate")
    lines.append("")
    lines.append("| Architecture | Correct | LLM Calls | Tool Calls | Recoveries | Silent Failures |")
    lines.append("|---|---|---|---|---|---|")
    for arch in archs:
        agg = result.aggregates[arch]
        lines.append(
            f"| {ARCH_LABELS[arch]} | {agg['correct']}/{agg['scenarios']} | {agg['llm_calls']} "
            f"| {agg['tool_calls']} | {agg['recoveries']} | {agg['silent_failures']} |"
        )
    lines.append("")
    if diff:
        problems = diff_against_fixtures(result)
        lines.append("## Fixture diff")
        lines.append("")
        if problems:
            lines.extend(f"- {p}" for p in problems)
        else:
            lines.append("- clean: every cell matches the embedded fixtures")
        lines.append("")
    return "\n".join(lines)


# -- persistence --------------------------------------------------------


def persist_result(result: BenchResult, path: str | Path) -> None:
    try:
        Path(path).write_text(result.to_json())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_result(path: str | Path, strict: bool = False) -> BenchResult:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    result = BenchResult.from_json(text)
    stored = result.metadata.get("fixture_digest")
    if stored != EXPECTED_FIXTURE_DIGEST:
        msg = f"result was produced against fixture digest {stored}, current is {EXPECTED_FIXTURE_DIGEST}"
        if strict:
            raise DigestMismatch(msg)
        logger.warning(msg)
    return result


# -- risk projection ----------------------------------------------------


@dataclass(frozen=True)
class ScaleProjection:
    """Sensitivity model for operational exposure at scale; every knob has
    the benchmark's published default."""

    failure_rate: float = 0.05
    llm_calls_per_recovery: float = 4.0
    seconds_per_recovery: float = 2.0
    compound_rate_low: float = 0.02
    compound_rate_high: float = 0.05
    shr_seconds_per_event: float = 0.001

    def validate(self) -> "ScaleProjection":
        for name in ("failure_rate", "compound_rate_low", "compound_rate_high"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise BenchError(f"{name} must be in [0, 1]")
        if self.compound_rate_low > self.compound_rate_high:
            raise BenchError("compound_rate_low > compound_rate_high")
        return self


def project_risk(tasks_per_day: list[int], p: ScaleProjection | None = None) -> list[dict]:
    p = (p or ScaleProjection()).validate()
    rows = []
    for tasks in tasks_per_day:
        if tasks < 0:
            raise BenchError("tasks_per_day must be >= 0")
        events = tasks * p.failure_rate
        rows.append(
            {
                "tasks_per_day": tasks,
                "recovery_events_per_day": events,
                "react_recovery_seconds": events * p.seconds_per_recovery,
                "react_llm_calls": events * p.llm_calls_per_recovery,
                "workflow_silent_low": events * p.compound_rate_low,
                "workflow_silent_high": events * p.compound_rate_high,
                "shr_recovery_seconds": events * p.shr_seconds_per_event,
            }
        )
    return rows


def render_projection(rows: list[dict], fmt: str = "md") -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2, sort_keys=True) + "\n"
    if fmt != "md":
        raise UnsupportedFormat(f"unsupported format {fmt!r}")
    lines = [
        "| Tasks/day | Recovery events/day | ReAct recovery time | ReAct LLM calls | Workflow silent/day | SHR recovery time |",
        "|---|---|---|---|---|---|",
    ]
    for r in rows:
        minutes = r["react_recovery_seconds"] / 60
        react_time = f"~{minutes / 60:,.1f} hours" if minutes >= 180 else f"~{minutes:,.1f} min"
        lines.append(
            f"| {r['tasks_per_day']:,} | {r['recovery_events_per_day']:,.0f} | {react_time} "
            f"| ~{r['react_llm_calls']:,.0f} | {r['workflow_silent_low']:,.0f}-{r['workflow_silent_high']:,.0f} "
            f"| {r['shr_recovery_seconds']:,.2f} s |"
        )
    return "\n".join(lines) + "\n"


# -- recovery microbenchmark and fuzzing --------------------------------


def measure_recovery_latency(repetitions: int = 200) -> dict:
    """Wall-clock cost of one quarantine + recompute cycle per topology.
    This is the only place the package reads real time."""
    results = {}
    all_samples: list[float] = []
    for kind in TopologyKind:
        topo = build_topology(kind)
        samples = []
        tools = topo.fresh_graph().tool_nodes()
        for i in range(repetitions):
            graph = topo.fresh_graph()
            victim = tools[i % len(tools)]
            t0 = time.perf_counter()
            graph.quarantine_node(victim)
            graph.shortest_path(START, topo.goal.goal_node)
            samples.append((time.perf_counter() - t0) * 1000.0)
        results[kind.value] = {"median_ms": statistics.median(samples), "max_ms": max(samples)}
        all_samples.extend(samples)
    results["overall"] = {"median_ms": statistics.median(all_samples), "max_ms": max(all_samples)}
    return results


_FAILURE_KINDS = ("timeout", "error_response", "connection_refused")


def random_schedule(kind: TopologyKind, rng: random.Random, max_down: int = 5) -> FaultSchedule:
    topo = build_topology(kind)
    tools = topo.fresh_graph().tool_nodes()
    count = rng.randint(0, min(max_down, len(tools)))
    chosen = rng.sample(tools, count)
    entries = []
    for tool in chosen:
        effect = rng.choice(list(FaultEffect))
        entries.append(
            FaultEntry(
                tool=tool,
                effect=effect,
                kind=rng.choice(_FAILURE_KINDS),
                probe_visible=rng.random() < 0.4,
                at_step=rng.randint(1, 4) if effect is FaultEffect.FAIL_AT_STEP else 0,
            )
        )
    return FaultSchedule(tuple(entries))


def run_fuzz(iterations: int, seed: int = 0) -> dict:
    """Randomized fault schedules over all three topologies.  Checks the
    structural guarantees: every run ends success-or-escalated and the
    auditor never finds a silent failure in the router."""
    rng = random.Random(seed)
    kinds = list(TopologyKind)
    stats = {"runs": 0, "success": 0, "escalated": 0, "silent": 0, "recoveries": 0, "llm_calls": 0}
    for i in range(iterations):
        kind = kinds[i % len(kinds)]
        topo = build_topology(kind)
        schedule = random_schedule(kind, rng)
        graph = topo.fresh_graph()
        invoker = ScheduledInvoker(schedule)
        prober = ScheduledProber(schedule, invoker)
        request = TaskRequest(text="fuzz task", amount=None)
        trace = execute_task(
            topo.goal,
            graph,
            invoker,
            RuleReasoner(),
            SimClock(),
            request,
            start=START,
            tool_states=scenario_tool_states(graph),
            prober=prober,
        )
        met = achieved_outcomes(topo.domain, trace.successes(), demoted=bool(trace.demotions))
        silent = trace.status is TraceStatus.SUCCESS and not set(topo.required_outcomes) <= met
        stats["runs"] += 1
        stats["success"] += trace.status is TraceStatus.SUCCESS
        stats["escalated"] += trace.status is TraceStatus.ESCALATED
        stats["silent"] += silent
        stats["recoveries"] += trace.recovery_events
        stats["llm_calls"] += trace.llm_calls
    return stats
