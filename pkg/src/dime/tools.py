"""Guest-facing analysis routines driven by the executor's analysis calls.

The branch profiler records every taken control transfer as
(kind, source address, destination address); a conditional that falls
through emits nothing.  The call-context-tree builder consumes the call and
return records of such a stream after the run.
"""

from __future__ import annotations

from typing import NamedTuple


class BranchRecord(NamedTuple):
    kind: str  # "jump" | "call" | "return"
    src: int
    dst: int


class AnalysisTool:
    """Base tool: accumulates records appended by analysis calls."""

    name = "null"

    def __init__(self):
        self.records: list[BranchRecord] = []

    def on_branch(self, kind: str, src: int, dst: int) -> None:
        self.records.append(BranchRecord(kind, src, dst))

    def unique_records(self) -> frozenset[BranchRecord]:
        return frozenset(self.records)


class BranchProfiler(AnalysisTool):
    """Records jump, call, and return transfers with source and destination."""

    name = "branch"


class CallTraceTool(AnalysisTool):
    """Records only call and return transfers, for call-context-tree building."""

    name = "cct"

    def on_branch(self, kind: str, src: int, dst: int) -> None:
        if kind in ("call", "return"):
            self.records.append(BranchRecord(kind, src, dst))


TOOLS = {"branch": BranchProfiler, "cct": CallTraceTool}


def make_tool(name: str) -> AnalysisTool:
    try:
        return TOOLS[name]()
    except KeyError:
        raise ValueError(f"unknown tool {name!r}") from None


class CCTNode:
    __slots__ = ("entry", "children", "parent")

    def __init__(self, entry: int | None, parent: "CCTNode | None"):
        self.entry = entry  # routine entry address; None for the synthetic root
        self.parent = parent
        self.children: dict[int, CCTNode] = {}


class CallContextTree:
    """Context tree: one node per (path of callees from the root, routine entry)."""

    def __init__(self):
        self.root = CCTNode(None, None)
        self.node_count = 1
        self.edge_count = 0

    def dump(self) -> str:
        """Indented text form with a nodes/edges trailer."""
        lines: list[str] = []

        def walk(node: CCTNode, depth: int) -> None:
            label = "root" if node.entry is None else str(node.entry)
            lines.append("  " * depth + label)
            for child in node.children.values():
                walk(child, depth + 1)

        walk(self.root, 0)
        lines.append(f"nodes={self.node_count} edges={self.edge_count}")
        return "\n".join(lines) + "\n"


def build_cct(records) -> CallContextTree:
    """Build a call-context tree from an ordered record stream.

    A call descends to the child named by the callee entry, creating it if
    absent; a return ascends.  A return at the root is tolerated (budget
    truncation can orphan returns), as is a trailing unreturned call.
    """
    tree = CallContextTree()
    cursor = tree.root
    for rec in records:
        if rec.kind == "call":
            child = cursor.children.get(rec.dst)
            if child is None:
                child = CCTNode(rec.dst, cursor)
                cursor.children[rec.dst] = child
                tree.node_count += 1
                tree.edge_count += 1
            cursor = child
        elif rec.kind == "return":
            if cursor.parent is not None:
                cursor = cursor.parent
    return tree


def write_records(records, path) -> None:
    """Line-oriented kind,src,dst tool output file."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for rec in records:
            fh.write(f"{rec.kind},{rec.src},{rec.dst}\n")
