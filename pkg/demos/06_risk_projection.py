#!/usr/bin/env python3
"""Operational exposure at scale, plus the recovery microbenchmark.

The projection is a linear sensitivity model (5% failure rate, ~4 reasoning
calls and ~2 s per LLM-driven recovery, 2-5% compound-failure share); the
microbenchmark measures what one quarantine + recompute actually costs on
the benchmark graphs.
"""

from toolrouter import measure_recovery_latency, project_risk
from toolrouter.bench import render_projection

rows = project_risk([10_000, 100_000, 1_000_000])
print(render_projection(rows))

latency = measure_recovery_latency(repetitions=300)
print("recovery microbenchmark (quarantine + recompute):")
for name, stats in latency.items():
    print(f"  {name:<18} median {stats['median_ms']:.4f} ms, max {stats['max_ms']:.3f} ms")
