"""Parallel health monitors and the priority competition.

Five monitors (intent, risk, tool_health, memory, progress) each score the
current request context; the orchestrator acts on the single highest-priority
signal.  Every monitor is a plain function of a read-only snapshot: regex
and threshold checks only, no model inference anywhere, so a sweep costs
microseconds and is fully deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .calibration import BreakerPhase, ToolState


class MonitorError(Exception):
    pass


class EmptySignalSet(MonitorError):
    pass


# Fixed tie-break order: earlier source wins on equal priority.
SOURCE_ORDER = ("tool_health", "risk", "intent", "memory", "progress")


@dataclass(frozen=True)
class MonitorSignal:
    source: str
    priority: float
    payload: dict

    def __post_init__(self):
        if not 0.0 <= self.priority <= 1.0:
            raise MonitorError(f"priority {self.priority} outside [0, 1]")
        if self.source not in SOURCE_ORDER:
            raise MonitorError(f"unknown monitor source {self.source!r}")


@dataclass(frozen=True)
class RequestContext:
    """Read-only snapshot handed to every monitor.

    ``amount`` / ``risk_score`` are the risk inputs as currently visible;
    scenarios may reveal them only after some steps complete.
    ``failed_tools`` carries tools whose most recent call just failed and
    ``quarantined`` the nodes already routed around.
    """

    text: str
    goal: str
    amount: float | None = None
    risk_score: float | None = None
    progress: float = 0.0
    tool_states: Mapping[str, ToolState] = field(default_factory=dict)
    failed_tools: tuple[str, ...] = ()
    quarantined: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.amount is not None and self.amount < 0:
            raise MonitorError("amount must be >= 0")
        if not 0.0 <= self.progress <= 1.0:
            raise MonitorError("progress must be in [0, 1]")


@dataclass(frozen=True)
class MonitorConfig:
    """Static monitor tuning; every value has a sensible default and all of
    them may be overridden per scenario."""

    risk_amount_threshold: float = 10_000.0
    risk_score_threshold: float = 0.8
    intent_keywords: Mapping[str, str] = field(
        default_factory=lambda: {"refund": "issue_refund", "book": "book_trip", "review": "moderate_content"}
    )
    intent_match_priority: float = 0.90
    intent_fallback_priority: float = 0.50
    risk_priority: float = 0.95
    risk_idle_priority: float = 0.05
    tool_health_alert_priority: float = 0.99
    tool_health_idle_priority: float = 0.10
    memory_priority: float = 0.20
    progress_priority: float = 0.15

    @staticmethod
    def from_json(text: str) -> "MonitorConfig":
        doc = json.loads(text)
        allowed = set(MonitorConfig.__dataclass_fields__)
        unknown = set(doc) - allowed
        if unknown:
            raise MonitorError(f"unknown monitor settings {sorted(unknown)}")
        return MonitorConfig(**doc)


def _intent(ctx: RequestContext, cfg: MonitorConfig) -> MonitorSignal:
    lowered = ctx.text.lower()
    for keyword, goal in sorted(cfg.intent_keywords.items()):
        if keyword in lowered:
            return MonitorSignal("intent", cfg.intent_match_priority, {"intent": goal})
    return MonitorSignal("intent", cfg.intent_fallback_priority, {"intent": None})


def _risk(ctx: RequestContext, cfg: MonitorConfig) -> MonitorSignal:
    flagged = []
    if ctx.amount is not None and ctx.amount >= cfg.risk_amount_threshold:
        flagged.append({"kind": "amount", "value": ctx.amount, "threshold": cfg.risk_amount_threshold})
    if ctx.risk_score is not None and ctx.risk_score >= cfg.risk_score_threshold:
        flagged.append({"kind": "score", "value": ctx.risk_score, "threshold": cfg.risk_score_threshold})
    if flagged:
        return MonitorSignal("risk", cfg.risk_priority, {"flags": flagged})
    return MonitorSignal("risk", cfg.risk_idle_priority, {"flags": []})


def _tool_health(ctx: RequestContext, cfg: MonitorConfig) -> MonitorSignal:
    down = set(ctx.failed_tools)
    for tool, state in ctx.tool_states.items():
        if state.breaker.phase is BreakerPhase.OPEN:
            down.add(tool)
    alerts = sorted(down - set(ctx.quarantined))
    if alerts:
        return MonitorSignal("tool_health", cfg.tool_health_alert_priority, {"tools": alerts})
    return MonitorSignal("tool_health", cfg.tool_health_idle_priority, {"tools": []})


def _memory(ctx: RequestContext, cfg: MonitorConfig) -> MonitorSignal:
    return MonitorSignal("memory", cfg.memory_priority, {"prior_interactions": 0})


def _progress(ctx: RequestContext, cfg: MonitorConfig) -> MonitorSignal:
    return MonitorSignal("progress", cfg.progress_priority, {"fraction": ctx.progress})


_MONITORS = {
    "intent": _intent,
    "risk": _risk,
    "tool_health": _tool_health,
    "memory": _memory,
    "progress": _progress,
}


def run_all_monitors(ctx: RequestContext, cfg: MonitorConfig | None = None) -> list[MonitorSignal]:
    """Evaluate every registered monitor against the snapshot.

    Output is one signal per monitor in canonical source order regardless of
    evaluation order; monitors are pure, so evaluating them concurrently or
    in any permutation yields the same list.
    """
    cfg = cfg or MonitorConfig()
    produced = {name: fn(ctx, cfg) for name, fn in _MONITORS.items()}
    return [produced[name] for name in SOURCE_ORDER]


def compete(signals: list[MonitorSignal]) -> MonitorSignal:
    """Argmax over priority; ties resolve by fixed source order."""
    if not signals:
        raise EmptySignalSet("no signals to arbitrate")
    return max(signals, key=lambda s: (s.priority, -SOURCE_ORDER.index(s.source)))
