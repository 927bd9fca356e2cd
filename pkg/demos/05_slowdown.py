"""Why budgeting pays: virtual slow-down under a heavy analysis routine.

Each analysis call costs 50x an instruction.  Fully instrumented, the guest
runs ~50x slower than native.  With a 10% budget (B = T/10) the first run
stays within a small factor of native, and later runs approach 1x as the
redundancy log suppresses re-instrumentation.
"""

import tempfile
from pathlib import Path

from dime.corpus import loop_corpus
from dime import RunConfig, run_campaign

program = loop_corpus(seed=11, count=1)[0]

with tempfile.TemporaryDirectory() as tmp:
    config = RunConfig(program=program, granularity="all", period=200,
                       budget=20, analysis_cost=50, seed=5,
                       log_strategy="hash", log_path=str(Path(tmp) / "h.log"))
    result = run_campaign(config, 3)

oracle = result.oracle
print("native virtual time:              ", oracle.native_time)
print("fully instrumented virtual time:  ", oracle.full_instrumentation_time)
print(f"full-instrumentation slow-down:    "
      f"{oracle.full_instrumentation_time / oracle.native_time:.1f}x")
print()
for report in result.reports:
    print(f"budgeted run {report.run_index}: slow-down {report.slowdown:.2f}x, "
          f"coverage {report.coverage:.2f}")
first = result.reports[0].slowdown
print(f"\nseparation factor (full / run 1): "
      f"{oracle.full_instrumentation_time / oracle.native_time / first:.1f}x")
