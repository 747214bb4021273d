"""Self-healing task execution over a tool graph.

The loop: route with shortest-path search, invoke tools along the route,
and on any failure quarantine the offending nodes and recompute the route
from the last completed position, skipping finished work.  The pluggable
reasoner is consulted only when no route exists (goal demotion, then
escalation) or when a risk signal wins the monitor competition.  Every run
terminates in exactly one of two states: SUCCESS with the executed route,
or ESCALATED with an explicit demotion/handoff record.

Monitors sweep before the initial route and before every step; failures
additionally trigger an immediate sweep so that simultaneous outages
detected together are quarantined as one batch with a single recompute.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Protocol

from .calibration import SimClock, ToolState
from .graph import RoutePath, ToolGraph
from .monitors import MonitorConfig, RequestContext, compete, run_all_monitors

logger = logging.getLogger(__name__)

_MAX_LOOP = 10_000  # hard stop against pathological schedules


class OrchestratorError(Exception):
    pass


class MalformedGoal(OrchestratorError):
    pass


@dataclass(frozen=True)
class Outcome:
    """Result of one tool invocation."""

    success: bool
    latency_ms: float = 100.0
    failure_kind: str | None = None  # timeout | error_response | connection_refused

    @staticmethod
    def ok(latency_ms: float = 100.0) -> "Outcome":
        return Outcome(True, latency_ms)

    @staticmethod
    def failed(kind: str = "error_response", latency_ms: float = 100.0) -> "Outcome":
        return Outcome(False, latency_ms, kind)


class ToolInvoker(Protocol):
    def invoke(self, node: str, clock: SimClock) -> Outcome: ...


class Prober(Protocol):
    """Proactive health checks, driven by the orchestrator's sweeps."""

    def scan(self, clock: SimClock, states: Mapping[str, ToolState], attempts: int) -> list[str]: ...


@dataclass(frozen=True)
class DemotionOption:
    """One rung of a goal's fallback ladder.  ``extra_edges`` are wired into
    the graph only when this goal becomes active, so fallback-only routes
    never influence primary routing."""

    goal_id: str
    goal_node: str
    extra_edges: tuple[tuple[str, str, float], ...] = ()


@dataclass(frozen=True)
class TaskGoal:
    id: str
    goal_node: str
    ladder: tuple[DemotionOption, ...] = ()


@dataclass(frozen=True)
class TaskRequest:
    """The inbound request as the monitors will see it.  Risk inputs may be
    hidden until ``risk_visible_after`` tool steps have completed (e.g. an
    order lookup reveals the amount)."""

    text: str
    amount: float | None = None
    risk_score: float | None = None
    risk_visible_after: int = 0


@dataclass(frozen=True)
class ReasonerQuery:
    kind: str  # "demotion" | "escalation" | "risk_escalation"
    original_goal: str
    active_goal: str
    remaining_options: tuple[str, ...]
    detail: str = ""


@dataclass(frozen=True)
class DemotedGoal:
    goal_id: str


@dataclass(frozen=True)
class Escalate:
    note: str


class Reasoner(Protocol):
    calls: int

    def consult(self, query: ReasonerQuery) -> DemotedGoal | Escalate: ...


class RuleReasoner:
    """Deterministic stand-in for an LLM: demotion queries propose the next
    untried ladder option, everything else escalates with a handoff note."""

    def __init__(self) -> None:
        self.calls = 0

    def consult(self, query: ReasonerQuery) -> DemotedGoal | Escalate:
        self.calls += 1
        if query.kind == "demotion" and query.remaining_options:
            return DemotedGoal(query.remaining_options[0])
        if query.kind == "demotion":
            return Escalate(f"no viable fallback for {query.original_goal}; handing off ({query.detail})")
        return Escalate(f"escalating {query.active_goal}: {query.detail}")


class TraceStatus(Enum):
    SUCCESS = "success"
    ESCALATED = "escalated"


@dataclass
class ToolCall:
    node: str
    success: bool
    failure_kind: str | None
    at_ms: int

    def as_dict(self) -> dict:
        return {"node": self.node, "success": self.success, "failure_kind": self.failure_kind, "at_ms": self.at_ms}


@dataclass
class ExecutionTrace:
    """Complete record of one task run; the unit of benchmark accounting."""

    goal_id: str
    status: TraceStatus = TraceStatus.SUCCESS
    resolution: dict = field(default_factory=dict)
    tool_calls: list[ToolCall] = field(default_factory=list)
    recovery_events: int = 0  # failure batches healed purely by rerouting
    failure_recomputes: int = 0  # route recomputations triggered by failures
    llm_calls: int = 0
    completed: set[str] = field(default_factory=set)
    demotions: list[dict] = field(default_factory=list)
    null_routes: int = 0
    risk_interrupts: int = 0
    quarantined: list[str] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    final_goal: str = ""

    @property
    def tool_call_count(self) -> int:
        return len(self.tool_calls)

    def successes(self) -> set[str]:
        return {c.node for c in self.tool_calls if c.success}

    def log(self, at_ms: int, event: str, **detail) -> None:
        self.events.append({"t_ms": at_ms, "event": event, **detail})

    def as_dict(self) -> dict:
        return {
            "goal": self.goal_id,
            "final_goal": self.final_goal,
            "status": self.status.value,
            "resolution": self.resolution,
            "tool_calls": [c.as_dict() for c in self.tool_calls],
            "recovery_events": self.recovery_events,
            "failure_recomputes": self.failure_recomputes,
            "llm_calls": self.llm_calls,
            "completed": sorted(self.completed),
            "demotions": self.demotions,
            "quarantined": sorted(set(self.quarantined)),
            "timeline": self.events,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def resume_point(path: RoutePath, completed: set[str]) -> int:
    """Index of the first route node not yet completed; len(path) if none."""
    for i, node in enumerate(path.nodes):
        if node not in completed:
            return i
    return len(path.nodes)


def execute_task(
    goal: TaskGoal,
    graph: ToolGraph,
    invoker: ToolInvoker,
    reasoner: Reasoner,
    clock: SimClock,
    request: TaskRequest,
    *,
    start: str = "start",
    monitor_config: MonitorConfig | None = None,
    tool_states: Mapping[str, ToolState] | None = None,
    prober: Prober | None = None,
) -> ExecutionTrace:
    if goal.goal_node not in graph.nodes:
        raise MalformedGoal(f"goal node {goal.goal_node!r} not in graph")
    if start not in graph.nodes:
        raise MalformedGoal(f"start node {start!r} not in graph")

    cfg = monitor_config or MonitorConfig()
    states: Mapping[str, ToolState] = tool_states if tool_states is not None else {
        t: ToolState(t) for t in graph.tool_nodes()
    }
    trace = ExecutionTrace(goal_id=goal.id, final_goal=goal.id)
    graph.completed.add(start)
    position = start  # last successfully completed node
    active_goal = goal
    active_goal_node = goal.goal_node
    ladder_index = 0
    quarantined: set[str] = set()

    def visible_risk() -> tuple[float | None, float | None]:
        done = len([c for c in trace.tool_calls if c.success])
        if done >= request.risk_visible_after:
            return request.amount, request.risk_score
        return None, None

    def sweep(failed_batch: tuple[str, ...] = ()):
        if prober is not None:
            opened = prober.scan(clock, states, attempts=len(trace.tool_calls))
            if opened:
                trace.log(clock.now, "probe_detected", tools=opened)
        amount, score = visible_risk()
        ctx = RequestContext(
            text=request.text,
            goal=active_goal.id,
            amount=amount,
            risk_score=score,
            progress=min(1.0, len(trace.completed) / max(1, len(graph.tool_nodes()))),
            tool_states=states,
            failed_tools=failed_batch,
            quarantined=frozenset(quarantined),
        )
        winner = compete(run_all_monitors(ctx, cfg))
        return winner

    def quarantine_batch(nodes: list[str]) -> None:
        for n in nodes:
            graph.quarantine_node(n)
            quarantined.add(n)
            trace.quarantined.append(n)
        trace.log(clock.now, "quarantine", tools=sorted(nodes))

    def reroute_from_position() -> RoutePath | None:
        route = graph.shortest_path(position, active_goal_node)
        trace.failure_recomputes += 1
        if route is None:
            trace.null_routes += 1
            trace.log(clock.now, "route_exhausted", source=position, goal=active_goal_node)
        else:
            trace.recovery_events += 1
            trace.log(clock.now, "reroute", path=list(route.nodes), cost=route.total_cost)
        return route

    def escalate(kind: str, detail: str) -> None:
        query = ReasonerQuery(
            kind=kind,
            original_goal=goal.id,
            active_goal=active_goal.id,
            remaining_options=tuple(o.goal_id for o in goal.ladder[ladder_index:]),
            detail=detail,
        )
        verdict = reasoner.consult(query)
        trace.llm_calls += 1
        note = verdict.note if isinstance(verdict, Escalate) else f"unexpected demotion {verdict.goal_id}"
        trace.status = TraceStatus.ESCALATED
        trace.resolution = {"kind": kind, "note": note}
        trace.log(clock.now, "escalated", kind=kind, note=note)

    def attempt_demotion(detail: str) -> RoutePath | None:
        """One demotion consult; returns the fallback route, or None after an
        escalation consult when the proposal is unroutable or the ladder is
        out of options."""
        nonlocal active_goal_node, ladder_index
        query = ReasonerQuery(
            kind="demotion",
            original_goal=goal.id,
            active_goal=active_goal.id,
            remaining_options=tuple(o.goal_id for o in goal.ladder[ladder_index:]),
            detail=detail,
        )
        verdict = reasoner.consult(query)
        trace.llm_calls += 1
        if isinstance(verdict, Escalate):
            trace.status = TraceStatus.ESCALATED
            trace.resolution = {"kind": "handoff", "note": verdict.note}
            trace.log(clock.now, "escalated", kind="handoff", note=verdict.note)
            return None
        option = next(o for o in goal.ladder if o.goal_id == verdict.goal_id)
        ladder_index = goal.ladder.index(option) + 1
        for src, dst, w in option.extra_edges:
            if not graph.has_edge(src, dst):
                graph.add_edge(src, dst, w)
        # Freshly wired fallback edges must not resurrect tools the task
        # already knows are down.
        for node in sorted(quarantined):
            graph.quarantine_node(node)
        route = graph.shortest_path(position, option.goal_node)
        if route is None:
            trace.null_routes += 1
            trace.log(clock.now, "demotion_unroutable", goal=option.goal_id)
            escalate("escalation", f"fallback goal {option.goal_id} unreachable from {position}")
            return None
        active_goal_node = option.goal_node
        trace.demotions.append({"from": trace.final_goal, "to": option.goal_id, "at_ms": clock.now})
        trace.final_goal = option.goal_id
        trace.log(clock.now, "demoted", goal=option.goal_id, path=list(route.nodes))
        return route

    def handle_signal(winner) -> str:
        """Dispatch a winning monitor signal.  Returns 'continue', 'reroute'
        or 'stop'; reroutes update ``path``/``idx`` via the enclosing scope."""
        nonlocal path, idx
        if winner.source == "risk" and winner.priority >= cfg.risk_priority:
            trace.risk_interrupts += 1
            escalate("risk_escalation", f"risk flags {winner.payload['flags']}")
            return "stop"
        if winner.source == "tool_health" and winner.payload["tools"]:
            quarantine_batch(winner.payload["tools"])
            new_route = reroute_from_position()
            if new_route is None:
                new_route = attempt_demotion("no route after quarantine")
                if new_route is None:
                    return "stop"
            path = new_route
            idx = resume_point(path, graph.completed)
            return "reroute"
        return "continue"

    # Pre-execution sweep: probe-detected outages are quarantined before the
    # first route is computed; an already-visible risk escalates before any
    # tool is touched.
    winner = sweep()
    trace.log(clock.now, "monitor_winner", source=winner.source, priority=winner.priority)
    if winner.source == "risk" and winner.priority >= cfg.risk_priority:
        trace.risk_interrupts += 1
        escalate("risk_escalation", f"risk flags {winner.payload['flags']}")
        return trace
    if winner.source == "tool_health" and winner.payload["tools"]:
        quarantine_batch(winner.payload["tools"])

    path = graph.shortest_path(start, active_goal_node)
    if path is None:
        trace.null_routes += 1
        trace.log(clock.now, "route_exhausted", source=start, goal=active_goal_node)
        route = attempt_demotion("no initial route")
        if route is None:
            return trace
        path = route
    else:
        trace.log(clock.now, "routed", path=list(path.nodes), cost=path.total_cost)
    idx = resume_point(path, graph.completed)

    for _ in range(_MAX_LOOP):
        if idx >= len(path.nodes):
            trace.status = TraceStatus.SUCCESS
            trace.resolution = {"kind": "completed", "goal": trace.final_goal, "path": list(path.nodes)}
            trace.log(clock.now, "completed", goal=trace.final_goal)
            return trace

        node = path.nodes[idx]

        winner = sweep()
        action = handle_signal(winner)
        if action == "stop":
            return trace
        if action == "reroute":
            continue

        if node in graph.sentinels:
            graph.completed.add(node)
            trace.completed.add(node)
            idx += 1
            continue

        outcome = invoker.invoke(node, clock)
        clock.advance(outcome.latency_ms)
        state = states.get(node)
        if state is not None:
            state.record_call(clock, outcome.latency_ms, outcome.success)
        trace.tool_calls.append(ToolCall(node, outcome.success, outcome.failure_kind, clock.now))
        trace.log(clock.now, "tool_call", node=node, success=outcome.success, kind=outcome.failure_kind)

        if outcome.success:
            graph.completed.add(node)
            trace.completed.add(node)
            position = node
            idx += 1
            continue

        # Failure: the monitor sweep sees the failed call plus anything the
        # probes found in the same pass; the whole batch is quarantined
        # before the single recompute.
        winner = sweep(failed_batch=(node,))
        if winner.source == "tool_health" and winner.payload["tools"]:
            quarantine_batch(winner.payload["tools"])
        else:  # monitors disabled or misconfigured; quarantine the failure itself
            quarantine_batch([node])
        route = reroute_from_position()
        if route is None:
            route = attempt_demotion(f"failure of {node} exhausted the route")
            if route is None:
                return trace
        path = route
        idx = resume_point(path, graph.completed)

    raise OrchestratorError("execution did not terminate within the loop bound")
