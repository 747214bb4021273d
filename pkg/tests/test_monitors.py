from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor

import pytest

from toolrouter.calibration import SimClock, ToolCalibration, ToolState
from toolrouter.monitors import (
    SOURCE_ORDER,
    EmptySignalSet,
    MonitorConfig,
    MonitorError,
    MonitorSignal,
    RequestContext,
    _MONITORS,
    compete,
    run_all_monitors,
)


def ctx(**kw) -> RequestContext:
    defaults = dict(text="please refund order 11", goal="issue_refund")
    defaults.update(kw)
    return RequestContext(**defaults)


def open_breaker_state(tool: str) -> ToolState:
    state = ToolState(tool, ToolCalibration(trip_threshold=1))
    state.record_call(SimClock(), 100, False)
    return state


def by_source(signals):
    return {s.source: s for s in signals}


class TestRunAllMonitors:
    def test_high_value_refund_scores(self):
        signals = by_source(run_all_monitors(ctx(amount=15_000.0)))
        assert signals["risk"].priority == 0.95
        assert signals["intent"].priority == 0.90

    def test_open_breaker_alerts_tool_health(self):
        states = {"stripe": open_breaker_state("stripe")}
        signals = by_source(run_all_monitors(ctx(tool_states=states)))
        assert signals["tool_health"].priority == 0.99
        assert signals["tool_health"].payload["tools"] == ["stripe"]

    def test_routine_request_all_healthy(self):
        signals = by_source(run_all_monitors(ctx(text="hello there")))
        assert signals["intent"].priority == 0.50
        assert signals["tool_health"].priority < signals["intent"].priority

    def test_one_signal_per_monitor(self):
        signals = run_all_monitors(ctx())
        assert [s.source for s in signals] == list(SOURCE_ORDER)

    def test_quarantined_tools_stop_alerting(self):
        states = {"stripe": open_breaker_state("stripe")}
        signals = by_source(run_all_monitors(ctx(tool_states=states, quarantined=frozenset({"stripe"}))))
        assert signals["tool_health"].priority == 0.10

    def test_failed_batch_alerts_even_with_closed_breaker(self):
        states = {"stripe": ToolState("stripe")}  # default threshold 3, still CLOSED
        signals = by_source(run_all_monitors(ctx(tool_states=states, failed_tools=("stripe",))))
        assert signals["tool_health"].priority == 0.99

    def test_deterministic_over_repetition(self):
        reference = run_all_monitors(ctx(amount=15_000.0))
        for _ in range(1000):
            assert run_all_monitors(ctx(amount=15_000.0)) == reference

    def test_evaluation_order_is_irrelevant(self):
        cfg = MonitorConfig()
        snapshot = ctx(amount=15_000.0)
        reference = by_source(run_all_monitors(snapshot, cfg))
        rng = random.Random(3)
        names = list(_MONITORS)
        for _ in range(20):
            rng.shuffle(names)
            produced = {name: _MONITORS[name](snapshot, cfg) for name in names}
            assert produced == reference

    def test_concurrent_evaluation_matches_sequential(self):
        snapshot = ctx(amount=15_000.0)
        sequential = run_all_monitors(snapshot)
        with ThreadPoolExecutor(max_workers=5) as pool:
            results = list(pool.map(lambda _: run_all_monitors(snapshot), range(32)))
        assert all(r == sequential for r in results)


class TestCompete:
    def test_risk_outbids_intent(self):
        signals = [MonitorSignal("intent", 0.90, {}), MonitorSignal("risk", 0.95, {})]
        assert compete(signals).source == "risk"

    def test_singleton(self):
        only = MonitorSignal("memory", 0.2, {})
        assert compete([only]) is only

    def test_tool_health_outbids_routine_intent(self):
        signals = [MonitorSignal("tool_health", 0.99, {}), MonitorSignal("intent", 0.50, {})]
        assert compete(signals).source == "tool_health"

    def test_ties_resolve_by_source_order(self):
        signals = [
            MonitorSignal("progress", 0.5, {}),
            MonitorSignal("intent", 0.5, {}),
            MonitorSignal("risk", 0.5, {}),
        ]
        assert compete(signals).source == "risk"

    def test_empty_set_rejected(self):
        with pytest.raises(EmptySignalSet):
            compete([])

    def test_winner_dominates_every_signal(self, rng):
        for _ in range(200):
            signals = [
                MonitorSignal(src, round(rng.random(), 3), {})
                for src in rng.sample(SOURCE_ORDER, rng.randint(1, 5))
            ]
            winner = compete(signals)
            assert all(winner.priority >= s.priority for s in signals)


class TestRiskThreshold:
    @pytest.mark.parametrize("amount", [10_000.0, 10_001.0, 250_000.0])
    def test_at_or_above_threshold_beats_intent(self, amount):
        signals = by_source(run_all_monitors(ctx(amount=amount)))
        assert signals["risk"].priority > signals["intent"].priority

    @pytest.mark.parametrize("amount", [0.0, 120.0, 9_999.99])
    def test_below_threshold_loses_to_intent(self, amount):
        signals = by_source(run_all_monitors(ctx(amount=amount)))
        assert signals["risk"].priority < signals["intent"].priority

    def test_score_channel(self):
        signals = by_source(run_all_monitors(ctx(risk_score=0.97)))
        assert signals["risk"].priority == 0.95

    def test_configurable_threshold(self):
        cfg = MonitorConfig(risk_amount_threshold=2000.0)
        signals = by_source(run_all_monitors(ctx(amount=2600.0), cfg))
        assert signals["risk"].priority == 0.95


class TestValidation:
    def test_priority_bounds(self):
        with pytest.raises(MonitorError):
            MonitorSignal("risk", 1.5, {})

    def test_unknown_source(self):
        with pytest.raises(MonitorError):
            MonitorSignal("llm", 0.5, {})

    def test_negative_amount_rejected(self):
        with pytest.raises(MonitorError):
            ctx(amount=-5.0)

    def test_config_from_json(self):
        cfg = MonitorConfig.from_json('{"risk_amount_threshold": 500.0}')
        assert cfg.risk_amount_threshold == 500.0
        with pytest.raises(MonitorError):
            MonitorConfig.from_json('{"bogus": 1}')

    def test_monitors_have_no_reasoner_dependency(self):
        # Monitors must stay cheap: the module imports nothing that could
        # reach the reasoner interface.
        import ast

        import toolrouter.monitors as monitors_module

        tree = ast.parse(open(monitors_module.__file__).read())
        imported = set()
        for node in ast.walk(tree):
            if isinstance(node, ast.Import):
                imported.update(alias.name for alias in node.names)
            elif isinstance(node, ast.ImportFrom):
                imported.add(node.module or "")
        assert not any("orchestrator" in mod or "baselines" in mod for mod in imported)
