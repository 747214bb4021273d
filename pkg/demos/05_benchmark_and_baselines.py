#!/usr/bin/env python3
"""Run all 19 scenarios under the three architectures and print the
benchmark tables.  The router's cells emerge from executing the routing
algorithm; the baselines run their own simulators against the identical
fault schedules; one auditor judges everyone.
"""

from toolrouter import run_benchmark
from toolrouter.bench import diff_against_fixtures, render_report

result = run_benchmark()
print(render_report(result, fmt="md"))

problems = diff_against_fixtures(result)
print("fixture diff:", "clean" if not problems else problems)

# The point of the comparison, in one paragraph: identical correctness to
# the LLM-per-decision baseline at a fraction of the reasoning calls, and
# unlike the pre-coded workflow, zero silent failures: every compound
# outage ends in a logged reroute or an explicit escalation.
shr, react, static = (result.aggregates[a] for a in ("shr", "react", "static"))
saving = 1 - shr["llm_calls"] / react["llm_calls"]
print(f"\nreasoning-call reduction vs ReAct: {saving:.0%} ({shr['llm_calls']} vs {react['llm_calls']})")
print(f"silent failures: router {shr['silent_failures']}, static workflow {static['silent_failures']}")
