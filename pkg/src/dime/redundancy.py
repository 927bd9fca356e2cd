"""Persistent log of instrumented regions with pluggable search strategies.

Entries are <image, relative address, length> intervals.  The strategy decides
what "already instrumented" means when a new candidate trace asks for
permission:

* ``hash``   - keyed by start address only; lengths are not stored.  A
  candidate is rejected iff its exact start address was committed before.
* ``bst``    - address-ordered <start, length> entries.  A candidate is
  rejected iff its start lies inside any logged interval.
* ``merger`` - like bst but commits coalesce overlapping and directly
  adjacent intervals, and a candidate is rejected only when it is strictly
  contained in a single logged interval (its end must fall strictly inside).
* ``none``   - permits everything and persists nothing.

The persisted file is line-oriented, sorted, and byte-deterministic:
``# dime-log v1 strategy=<s>`` then ``image,rel`` (hash) or
``image,rel,length`` (bst/merger) per line.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from typing import Iterator, NamedTuple

STRATEGIES = ("hash", "bst", "merger", "none")
_FILE_HEADER = "# dime-log v1 strategy="


class LogEntry(NamedTuple):
    image: str
    rel_addr: int
    length: int


class LogFormatError(ValueError):
    """Persisted log file does not match the expected schema."""


class LogStore:
    """Instrumented-region log under one of the strategies above.

    Interval state is kept per image: a set of start addresses for ``hash``,
    a sorted list of starts plus a start->length map for ``bst``/``merger``.
    """

    def __init__(self, strategy: str):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
        self.strategy = strategy
        self._addrs: dict[str, set[int]] = {}
        self._starts: dict[str, list[int]] = {}
        self._lengths: dict[str, dict[int, int]] = {}
        # bst containment needs "does any entry with start <= a cover a";
        # entries may overlap, so keep a prefix max of interval ends,
        # rebuilt lazily after commits.
        self._prefix_end: dict[str, list[int]] = {}
        self._stale: set[str] = set()

    # -- queries ------------------------------------------------------------

    def permit(self, image: str, rel_addr: int, length: int) -> bool:
        """Decide whether a candidate trace <image, rel_addr, length> may be
        instrumented, by this store's strategy."""
        if length < 1:
            raise ValueError("candidate length must be >= 1")
        if self.strategy == "none":
            return True
        if self.strategy == "hash":
            return rel_addr not in self._addrs.get(image, ())
        starts = self._starts.get(image)
        if not starts:
            return True
        if self.strategy == "bst":
            # reject iff exists B: B.start <= rel_addr < B.start + B.length
            i = bisect_right(starts, rel_addr)
            if i == 0:
                return True
            prefix = self._prefix(image)
            return prefix[i - 1] <= rel_addr
        # merger: entries are disjoint, so only the greatest start <= rel_addr
        # can strictly contain the candidate.
        i = bisect_right(starts, rel_addr)
        if i == 0:
            return True
        start = starts[i - 1]
        end = start + self._lengths[image][start]
        return not (rel_addr < end and rel_addr + length < end)

    def covered(self, image: str, rel_addr: int) -> bool:
        """Whether an address lies inside any logged interval (hash: exact key)."""
        if self.strategy == "hash":
            return rel_addr in self._addrs.get(image, ())
        starts = self._starts.get(image)
        if not starts:
            return False
        i = bisect_right(starts, rel_addr)
        if i == 0:
            return False
        return self._prefix(image)[i - 1] > rel_addr

    def entries(self) -> Iterator[LogEntry]:
        """All entries sorted by (image, rel_addr); hash entries have length 0."""
        if self.strategy == "hash":
            for image in sorted(self._addrs):
                for addr in sorted(self._addrs[image]):
                    yield LogEntry(image, addr, 0)
        else:
            for image in sorted(self._starts):
                for start in self._starts[image]:
                    yield LogEntry(image, start, self._lengths[image][start])

    def __len__(self) -> int:
        if self.strategy == "hash":
            return sum(len(s) for s in self._addrs.values())
        return sum(len(s) for s in self._starts.values())

    def __eq__(self, other) -> bool:
        return (isinstance(other, LogStore) and self.strategy == other.strategy
                and list(self.entries()) == list(other.entries()))

    def _prefix(self, image: str) -> list[int]:
        if image in self._stale:
            ends = []
            running = 0
            for start in self._starts[image]:
                running = max(running, start + self._lengths[image][start])
                ends.append(running)
            self._prefix_end[image] = ends
            self._stale.discard(image)
        return self._prefix_end[image]

    # -- updates ------------------------------------------------------------

    def commit(self, entry: LogEntry) -> None:
        """Record an instrumented portion.  hash: start only, idempotent.
        bst: keep the max length per start.  merger: insert and coalesce with
        every overlapping or directly adjacent neighbour."""
        if entry.length < 1:
            raise ValueError("committed length must be >= 1")
        if self.strategy == "none":
            return
        if self.strategy == "hash":
            self._addrs.setdefault(entry.image, set()).add(entry.rel_addr)
            return
        starts = self._starts.setdefault(entry.image, [])
        lengths = self._lengths.setdefault(entry.image, {})
        self._stale.add(entry.image)
        if self.strategy == "bst":
            if entry.rel_addr in lengths:
                lengths[entry.rel_addr] = max(lengths[entry.rel_addr], entry.length)
            else:
                insort(starts, entry.rel_addr)
                lengths[entry.rel_addr] = entry.length
            return
        # merger: swallow every neighbour the new interval overlaps or touches
        lo, hi = entry.rel_addr, entry.rel_addr + entry.length
        i = bisect_left(starts, lo)
        if i > 0 and starts[i - 1] + lengths[starts[i - 1]] >= lo:
            i -= 1
        j = i
        while j < len(starts) and starts[j] <= hi:
            s = starts[j]
            lo = min(lo, s)
            hi = max(hi, s + lengths[s])
            del lengths[s]
            j += 1
        del starts[i:j]
        insort(starts, lo)
        lengths[lo] = hi - lo

    def finalize(self) -> None:
        """Post-run transform; under bst, merge directly consecutive entries."""
        if self.strategy != "bst":
            return
        for image, starts in self._starts.items():
            lengths = self._lengths[image]
            merged_starts: list[int] = []
            merged_lengths: dict[int, int] = {}
            for start in starts:
                if merged_starts:
                    last = merged_starts[-1]
                    if last + merged_lengths[last] == start:
                        merged_lengths[last] += lengths[start]
                        continue
                merged_starts.append(start)
                merged_lengths[start] = lengths[start]
            self._starts[image] = merged_starts
            self._lengths[image] = merged_lengths
            self._stale.add(image)

    # -- persistence ---------------------------------------------------------

    def save(self, path) -> None:
        if self.strategy == "none":
            raise ValueError("the 'none' strategy has no persistent form")
        lines = [f"{_FILE_HEADER}{self.strategy}"]
        for entry in self.entries():
            if self.strategy == "hash":
                lines.append(f"{entry.image},{entry.rel_addr}")
            else:
                lines.append(f"{entry.image},{entry.rel_addr},{entry.length}")
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    def finalize_and_save(self, path) -> None:
        self.finalize()
        self.save(path)


def load(path) -> LogStore:
    """Read a persisted log; the header names the strategy."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(_FILE_HEADER):
        raise LogFormatError(f"{path}: missing dime-log header")
    strategy = lines[0][len(_FILE_HEADER):]
    if strategy not in ("hash", "bst", "merger"):
        raise LogFormatError(f"{path}: unknown strategy {strategy!r}")
    store = LogStore(strategy)
    want = 2 if strategy == "hash" else 3
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != want:
            raise LogFormatError(f"{path}:{lineno}: expected {want} fields, got {len(fields)}")
        try:
            rel = int(fields[1])
            length = int(fields[2]) if want == 3 else 1
        except ValueError:
            raise LogFormatError(f"{path}:{lineno}: non-numeric field") from None
        if rel < 0 or length < 1:
            raise LogFormatError(f"{path}:{lineno}: bad interval")
        store.commit(LogEntry(fields[0], rel, length))
    return store
