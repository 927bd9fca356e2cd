"""The three redundancy-log strategies, side by side.

Each strategy answers one question before a trace is instrumented: was this
already done?  They trade false positives (re-instrumenting, wastes budget)
against false negatives (wrongly refusing, loses coverage forever).

  hash   - start address only.  Cheap, never blocks new starts, but a
           truncated earlier entry at the same start blocks a longer trace.
  bst    - start + length intervals.  Rejects any candidate whose start lies
           inside a logged interval, even when the candidate extends beyond
           it: fewer false positives, more false negatives.
  merger - like bst, but only full strict containment rejects, and commits
           coalesce neighbours.
"""

import tempfile
from pathlib import Path

from dime import LogEntry, LogStore, load

print("hash: log holds <100 len 80>; candidate <150,20> starts fresh")
log = LogStore("hash")
log.commit(LogEntry("m", 100, 80))
print("  permit(150,20) =", log.permit("m", 150, 20), " <- false positive by design")

print("\nhash: log holds <100 len 20>; candidate <100,80> shares the start")
log = LogStore("hash")
log.commit(LogEntry("m", 100, 20))
print("  permit(100,80) =", log.permit("m", 100, 80),
      " <- [120,180) now stays uninstrumented: a false negative")

print("\nbst: log holds <50,80>; candidate <100,200> starts inside it")
log = LogStore("bst")
log.commit(LogEntry("m", 50, 80))
print("  permit(100,200) =", log.permit("m", 100, 200))

print("\nmerger: same log, same candidate: not fully contained, so allowed")
log = LogStore("merger")
log.commit(LogEntry("m", 50, 80))
print("  permit(100,200) =", log.permit("m", 100, 200))
log.commit(LogEntry("m", 100, 200))
print("  after commit the log merges to:", list(log.entries()))

print("\nbst finalize merges directly consecutive entries before saving:")
log = LogStore("bst")
log.commit(LogEntry("m", 100, 50))
log.commit(LogEntry("m", 150, 50))
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "regions.log"
    log.finalize_and_save(path)
    print("  file contents:")
    for line in path.read_text().splitlines():
        print("   ", line)
    print("  round-trips:", load(path) == log)
