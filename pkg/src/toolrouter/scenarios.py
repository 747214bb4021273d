"""The 19 benchmark scenarios: fault schedules, requests, expected fixtures.

Scenario files ship as package data (one JSON per scenario) and are verified
against an embedded checksum at load time, so a corrupted or hand-edited
fixture fails loudly rather than silently skewing the benchmark.  A loader
override directory is accepted for experimentation.

The fault schedule drives a deterministic invoker and prober: effects say
when a tool is down (from the start, on its first call, or after the k-th
call attempt) and whether background health probes can see the outage
before a request trips over it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping

from .calibration import BreakerPhase, SimClock, ToolCalibration, ToolState
from .graph import ToolGraph
from .monitors import MonitorConfig
from .orchestrator import (
    ExecutionTrace,
    Outcome,
    RuleReasoner,
    TaskRequest,
    execute_task,
)
from .topologies import START, Topology, TopologyKind, build_topology

SCENARIO_IDS = [
    "S1", "S2", "S3", "S4", "S5", "S6", "S7",
    "T1", "T2", "T3", "T4", "T5", "T6",
    "M1", "M2", "M3", "M4", "M5", "M6",
]

# sha256 over the table-pinned fixture cells of all 19 scenarios, in order.
EXPECTED_FIXTURE_DIGEST = "f5b1524f5b85acc4c382b9793b4d035188f8b93b9cca1caf1a8f5acdd9c830a6"

TOOL_CALL_LATENCY_MS = 100.0
PROBE_LATENCY_MS = 5.0


class ScenarioError(Exception):
    pass


class FixtureCorrupt(ScenarioError):
    pass


class UnknownTool(ScenarioError):
    pass


class FaultEffect(Enum):
    DOWN_FROM_START = "DOWN_FROM_START"
    FAIL_ON_FIRST_CALL = "FAIL_ON_FIRST_CALL"
    FAIL_AT_STEP = "FAIL_AT_STEP"


@dataclass(frozen=True)
class FaultEntry:
    tool: str
    effect: FaultEffect
    kind: str = "error_response"  # timeout | error_response | connection_refused
    probe_visible: bool = False
    at_step: int = 0  # FAIL_AT_STEP: down once this many call attempts happened

    def active(self, attempts: int) -> bool:
        if self.effect is FaultEffect.FAIL_AT_STEP:
            return attempts >= self.at_step
        return True


@dataclass(frozen=True)
class FaultSchedule:
    entries: tuple[FaultEntry, ...] = ()

    def validate_against(self, graph: ToolGraph) -> None:
        tools = set(graph.tool_nodes())
        for e in self.entries:
            if e.tool not in tools:
                raise UnknownTool(f"fault entry references unknown tool {e.tool!r}")


class HealthyInvoker:
    """Every call succeeds at a fixed latency; the no-fault baseline."""

    def __init__(self, latency_ms: float = TOOL_CALL_LATENCY_MS):
        self.latency_ms = latency_ms

    def invoke(self, node: str, clock: SimClock) -> Outcome:
        return Outcome.ok(self.latency_ms)


class ScheduledInvoker:
    """Wraps an invoker so scheduled outages fail exactly as written.

    Keeps a shared attempt counter so call-indexed effects land identically
    for every architecture replaying the same scenario.
    """

    def __init__(self, schedule: FaultSchedule, base: HealthyInvoker | None = None):
        self.schedule = schedule
        self.base = base or HealthyInvoker()
        self.attempts = 0

    def _down(self, node: str) -> FaultEntry | None:
        for entry in self.schedule.entries:
            if entry.tool == node and entry.active(self.attempts):
                return entry
        return None

    def invoke(self, node: str, clock: SimClock) -> Outcome:
        entry = self._down(node)
        self.attempts += 1
        if entry is not None:
            return Outcome.failed(entry.kind, self.base.latency_ms)
        return self.base.invoke(node, clock)


def apply_fault_schedule(invoker: HealthyInvoker, schedule: FaultSchedule) -> ScheduledInvoker:
    """Wrap ``invoker`` with a fault schedule; an empty schedule leaves its
    behavior unchanged."""
    return ScheduledInvoker(schedule, base=invoker)


class ScheduledProber:
    """Background health checks over the same schedule.

    Only probe-visible outages are ever detected here; call-path-only
    failures (an auth error, say) stay invisible until a request hits them.
    One probe per tool per sweep keeps the cadence honest.
    """

    def __init__(self, schedule: FaultSchedule, invoker: ScheduledInvoker):
        self.schedule = schedule
        self.invoker = invoker  # shares the attempt counter for step-indexed faults

    def scan(self, clock: SimClock, states: Mapping[str, ToolState], attempts: int) -> list[str]:
        opened = []
        for entry in self.schedule.entries:
            if not entry.probe_visible or not entry.active(attempts):
                continue
            state = states.get(entry.tool)
            if state is None or state.breaker.phase is BreakerPhase.OPEN:
                continue
            state.run_health_probe(clock, PROBE_LATENCY_MS, success=False)
            if state.breaker.phase is BreakerPhase.OPEN:
                opened.append(entry.tool)
        return sorted(opened)


@dataclass(frozen=True)
class ExpectedCounts:
    """Fixture cells.  ``shr_recoveries_tabulated`` marks whether the
    recovery cell comes from the reference tables (travel domain) or is a
    derived value kept for regression."""

    shr_llm: int
    shr_tools: int
    shr_recoveries: int
    shr_recoveries_tabulated: bool
    shr_status: str
    react_llm: int
    react_tools: int
    workflow_silent: bool
    classifiers_lost: int | None
    workflow_tools: int
    workflow_recoveries: int

    def pinned_cells(self) -> list:
        cells = [self.shr_llm, self.shr_tools]
        if self.shr_recoveries_tabulated:
            cells.append(self.shr_recoveries)
        cells += [self.react_llm, self.react_tools, self.workflow_silent]
        if self.classifiers_lost is not None:
            cells.append(self.classifiers_lost)
        return cells


@dataclass(frozen=True)
class Scenario:
    id: str
    name: str
    topology: Topology
    faults: FaultSchedule
    request: TaskRequest
    monitor_config: MonitorConfig
    content_toxic: bool
    expected: ExpectedCounts
    notes: str = ""

    @property
    def domain(self) -> str:
        return self.topology.domain

    def fresh_invoker(self) -> ScheduledInvoker:
        return apply_fault_schedule(HealthyInvoker(), self.faults)

    def fresh_prober(self, invoker: ScheduledInvoker) -> ScheduledProber:
        return ScheduledProber(self.faults, invoker)


def _parse_scenario(doc: dict) -> Scenario:
    topology = build_topology(doc["topology"])
    entries = tuple(
        FaultEntry(
            tool=e["tool"],
            effect=FaultEffect(e["effect"]),
            kind=e.get("kind", "error_response"),
            probe_visible=bool(e.get("probe_visible", False)),
            at_step=int(e.get("at_step", 0)),
        )
        for e in doc.get("faults", [])
    )
    schedule = FaultSchedule(entries)
    schedule.validate_against(topology.fresh_graph())
    req = doc["request"]
    request = TaskRequest(
        text=req["text"],
        amount=req.get("amount"),
        risk_score=req.get("risk_score"),
        risk_visible_after=int(req.get("risk_visible_after", 0)),
    )
    overrides = doc.get("monitor_overrides", {})
    monitor_config = MonitorConfig(**overrides) if overrides else MonitorConfig()
    exp = doc["expected"]
    expected = ExpectedCounts(
        shr_llm=exp["shr"]["llm_calls"],
        shr_tools=exp["shr"]["tool_calls"],
        shr_recoveries=exp["shr"]["recoveries"],
        shr_recoveries_tabulated=bool(exp["shr"]["recoveries_tabulated"]),
        shr_status=exp["shr"]["status"],
        react_llm=exp["react"]["llm_calls"],
        react_tools=exp["react"]["tool_calls"],
        workflow_silent=bool(exp["workflow"]["silent_failure"]),
        classifiers_lost=exp["workflow"].get("classifiers_lost"),
        workflow_tools=exp["workflow"]["tool_calls"],
        workflow_recoveries=exp["workflow"]["recoveries"],
    )
    return Scenario(
        id=doc["id"],
        name=doc["name"],
        topology=topology,
        faults=schedule,
        request=request,
        monitor_config=monitor_config,
        content_toxic=bool(req.get("content_toxic", False)),
        expected=expected,
        notes=doc.get("notes", ""),
    )


def fixture_digest(scenarios: list[Scenario]) -> str:
    payload = [[s.id] + s.expected.pinned_cells() for s in scenarios]
    blob = json.dumps(payload, separators=(",", ":"), sort_keys=False)
    return hashlib.sha256(blob.encode()).hexdigest()


def load_scenarios(override_dir: str | Path | None = None, verify: bool = True) -> list[Scenario]:
    """All 19 scenarios in stable order S1..S7, T1..T6, M1..M6."""
    out = []
    for sid in SCENARIO_IDS:
        if override_dir is not None:
            text = (Path(override_dir) / f"{sid}.json").read_text()
        else:
            text = resources.files("toolrouter").joinpath(f"data/{sid}.json").read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FixtureCorrupt(f"{sid}: invalid JSON ({exc.msg})") from exc
        scenario = _parse_scenario(doc)
        if scenario.id != sid:
            raise FixtureCorrupt(f"{sid}: file declares id {scenario.id!r}")
        out.append(scenario)
    if verify and override_dir is None:
        digest = fixture_digest(out)
        if digest != EXPECTED_FIXTURE_DIGEST:
            raise FixtureCorrupt(
                f"fixture digest mismatch: {digest} != {EXPECTED_FIXTURE_DIGEST}"
            )
    return out


def scenario_tool_states(graph: ToolGraph) -> dict[str, ToolState]:
    """Benchmark runs model hard failure: one bad call or probe trips the
    breaker, matching the static-weights regime the fixtures encode."""
    cal = ToolCalibration(trip_threshold=1, probe_interval_ms=0)
    return {t: ToolState(t, cal) for t in graph.tool_nodes()}


def run_self_healing(scenario: Scenario, monitor_config: MonitorConfig | None = None) -> ExecutionTrace:
    """Execute one scenario with the routing orchestrator; counts emerge
    from the algorithm, never from the fixture."""
    graph = scenario.topology.fresh_graph()
    invoker = scenario.fresh_invoker()
    prober = scenario.fresh_prober(invoker)
    states = scenario_tool_states(graph)
    clock = SimClock()
    trace = execute_task(
        scenario.topology.goal,
        graph,
        invoker,
        RuleReasoner(),
        clock,
        scenario.request,
        start=START,
        monitor_config=monitor_config or scenario.monitor_config,
        tool_states=states,
        prober=prober,
    )
    return trace
