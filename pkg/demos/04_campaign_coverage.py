"""Multi-run campaigns: coverage accumulation and the strategy trade-off.

A loop program hides part of a trace behind a conditional that jumps out in
run 1 only.  Across a 3-run campaign per strategy, the hash log recovers the
unexecuted tail in run 2 (a version switch creates a fresh trace start, and
hash has never seen that address), while bst and merger never analyze it:
bst by rejecting the whole re-formed trace, merger by running out of budget
at the tail's instrumentation point on every pass.
"""

import tempfile
from pathlib import Path

from dime import RunConfig, parse_program, run_campaign

SCENARIO = """\
image main 0
L0: op 1
    op 1
M:  op 1
    op 1
    op 1
    op 1
    op 1
    op 1
    op 1
    op 1
    op 1
    op 1
    op 1
    jmp R
R:  op 1
    op 1
    ndbr X 0.5
    op 0
    op 0
    op 0
    jmp P
P:  op 1
    op 1
    op 1
    op 1
    br M TN
    halt
X:  op 1
    op 1
    halt
"""

TAIL_RECORD = ("jump", 20, 21)
program = parse_program(SCENARIO)

print(f"{'strategy':>8} {'run':>4} {'unique':>7} {'fp':>6} {'fn':>6} "
      f"{'slowdown':>9} {'tail seen':>10}")
with tempfile.TemporaryDirectory() as tmp:
    for strategy in ("hash", "bst", "merger"):
        config = RunConfig(program=program, granularity="ctrl", period=9,
                           budget=1, compile_cost=1, seed=3,
                           log_strategy=strategy,
                           log_path=str(Path(tmp) / f"{strategy}.log"))
        result = run_campaign(config, 3)
        seen = set()
        for report, outcome in zip(result.reports, result.outcomes):
            seen |= set(outcome.tool_output)
            print(f"{strategy:>8} {report.run_index:>4} {report.unique_records:>7} "
                  f"{report.fp_ratio:>6.2f} {report.fn_ratio:>6.2f} "
                  f"{report.slowdown:>9.2f} {str(TAIL_RECORD in seen):>10}")

print("\nhash ends with the most unique records; merger matches bst here but")
print("never rejects un-analyzed code (its false-negative ratio stays 0).")
