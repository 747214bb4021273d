#!/usr/bin/env python3
"""One full self-healing task, with the event timeline narrated.

Scenario S7 is the hardest customer-support case: the primary payment
provider plus both notification channels are down.  Watch the router heal
the payment failure for free, exhaust the notification stage, and escalate
explicitly after two reasoner calls.
"""

from toolrouter import load_scenarios, run_self_healing

scenario = next(s for s in load_scenarios() if s.id == "S7")
print(f"{scenario.id}: {scenario.name}")
print("faults:", ", ".join(e.tool for e in scenario.faults.entries))
print()

trace = run_self_healing(scenario)

for event in trace.events:
    t = event["t_ms"]
    kind = event["event"]
    detail = {k: v for k, v in event.items() if k not in ("t_ms", "event")}
    print(f"  [{t:>5} ms] {kind:<16} {detail if detail else ''}")

print()
print("status:          ", trace.status.value)
print("tool calls:      ", trace.tool_call_count, [c.node for c in trace.tool_calls])
print("recoveries:      ", trace.recovery_events, "(healed purely by rerouting)")
print("reasoner calls:  ", trace.llm_calls, "(demotion attempt, then explicit handoff)")
print("completed steps: ", sorted(trace.completed - {"start"}))
