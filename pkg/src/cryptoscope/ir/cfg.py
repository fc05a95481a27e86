"""Statement-level control-flow graphs for method bodies."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from ..frontend import AstNode, Kind

FALLTHROUGH = "fallthrough"
TRUE = "true"
FALSE = "false"
LOOP_BACK = "loop-back"

ENTRY = 0
EXIT = 1

# statement kinds that become CFG nodes on their own
SIMPLE_STATEMENTS = frozenset(
    {Kind.LOCAL_VAR_DECL, Kind.ASSIGN, Kind.METHOD_CALL, Kind.CONSTRUCTOR_CALL, Kind.RETURN,
     Kind.BREAK, Kind.CONTINUE}
)


@dataclass(frozen=True)
class CfgEdge:
    src: int
    dst: int
    label: str


@dataclass
class Cfg:
    """Nodes are indices; 0 is entry, 1 is exit, the rest map to statements.

    Header nodes (If/While/For) stand for the evaluation of their condition,
    and catch parameters stand for binding the caught exception.
    """

    method_id: str
    nodes: list[Optional[AstNode]]
    edges: list[CfgEdge]
    index: dict[AstNode, int] = field(default_factory=dict)
    succ: dict[int, list[CfgEdge]] = field(default_factory=dict)
    pred: dict[int, list[CfgEdge]] = field(default_factory=dict)
    _reach: dict[int, frozenset] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.index = {n: i for i, n in enumerate(self.nodes) if n is not None}
        self.succ = {i: [] for i in range(len(self.nodes))}
        self.pred = {i: [] for i in range(len(self.nodes))}
        for e in self.edges:
            self.succ[e.src].append(e)
            self.pred[e.dst].append(e)

    @property
    def statements(self) -> list[AstNode]:
        return [n for n in self.nodes[2:] if n is not None]

    def __contains__(self, stmt: AstNode) -> bool:
        return stmt in self.index

    def reachable_from(self, i: int) -> frozenset:
        """Nodes reachable from ``i`` by one or more edges."""
        if i not in self._reach:
            seen: set[int] = set()
            todo = deque(e.dst for e in self.succ[i])
            while todo:
                j = todo.popleft()
                if j in seen:
                    continue
                seen.add(j)
                todo.extend(e.dst for e in self.succ[j])
            self._reach[i] = frozenset(seen)
        return self._reach[i]

    def precedes(self, a: AstNode, b: AstNode) -> bool:
        """True when some path runs from statement ``a`` to statement ``b``."""
        if a not in self.index or b not in self.index:
            return False
        return self.index[b] in self.reachable_from(self.index[a])

    def to_json(self) -> dict:
        def label(i: int) -> str:
            node = self.nodes[i]
            if node is None:
                return "entry" if i == ENTRY else "exit"
            return f"{node.kind.value}@{node.location.line}:{node.location.start_column}"

        return {
            "method": self.method_id,
            "nodes": [label(i) for i in range(len(self.nodes))],
            "edges": [[e.src, e.dst, e.label] for e in self.edges],
        }


class _Loop:
    def __init__(self, head: int):
        self.head = head
        self.breaks: list[tuple[int, str]] = []
        self.continues: list[tuple[int, str]] = []


class _Builder:
    def __init__(self) -> None:
        self.nodes: list[Optional[AstNode]] = [None, None]
        self.edges: set[tuple[int, int, str]] = set()

    def add(self, stmt: AstNode) -> int:
        self.nodes.append(stmt)
        return len(self.nodes) - 1

    def link(self, preds, dst: int, label: Optional[str] = None) -> None:
        for src, lab in preds:
            self.edges.add((src, dst, label or lab))

    def build(self, stmt: AstNode, preds: list, loop: Optional[_Loop]) -> list:
        kind = stmt.kind
        if kind is Kind.BLOCK:
            for child in stmt.children:
                preds = self.build(child, preds, loop)
            return preds
        if kind is Kind.IF:
            n = self.add(stmt)
            self.link(preds, n)
            out = self.build(stmt.children[1], [(n, TRUE)], loop)
            if len(stmt.children) > 2:
                out = out + self.build(stmt.children[2], [(n, FALSE)], loop)
            else:
                out = out + [(n, FALSE)]
            return out
        if kind is Kind.WHILE:
            n = self.add(stmt)
            self.link(preds, n)
            inner = _Loop(n)
            body_out = self.build(stmt.children[1], [(n, TRUE)], inner)
            self.link(body_out + inner.continues, n, LOOP_BACK)
            return [(n, FALSE)] + inner.breaks
        if kind is Kind.FOR:
            init = stmt.slot("init")
            if init is not None:
                preds = self.build(init, preds, loop)
            n = self.add(stmt)
            self.link(preds, n)
            inner = _Loop(n)
            body_out = self.build(stmt.slot("body"), [(n, TRUE)], inner)
            update = stmt.slot("update")
            tail = body_out + inner.continues
            if update is not None:
                tail = self.build(update, tail, loop)
            self.link(tail, n, LOOP_BACK)
            return [(n, FALSE)] + inner.breaks
        if kind is Kind.TRY_CATCH:
            children = stmt.children
            out = self.build(children[0], preds, loop)
            idx = 1
            while idx < len(children) and children[idx].kind is Kind.PARAM:
                p = self.add(children[idx])
                self.link(preds, p)
                out = out + self.build(children[idx + 1], [(p, FALLTHROUGH)], loop)
                idx += 2
            if idx < len(children):
                out = self.build(children[idx], out, loop)
            return out
        n = self.add(stmt)
        self.link(preds, n)
        if kind is Kind.RETURN:
            self.edges.add((n, EXIT, FALLTHROUGH))
            return []
        if kind is Kind.BREAK and loop is not None:
            loop.breaks.append((n, FALLTHROUGH))
            return []
        if kind is Kind.CONTINUE and loop is not None:
            loop.continues.append((n, FALLTHROUGH))
            return []
        return [(n, FALLTHROUGH)]


def build_cfg(method_id: str, body: AstNode) -> Cfg:
    """Build the CFG of ``body``; statements unreachable from entry are pruned."""
    b = _Builder()
    out = b.build(body, [(ENTRY, FALLTHROUGH)], None)
    b.link(out, EXIT)
    succ: dict[int, list[int]] = {}
    for src, dst, _ in b.edges:
        succ.setdefault(src, []).append(dst)
    live = {ENTRY}
    todo = [ENTRY]
    while todo:
        i = todo.pop()
        for j in succ.get(i, ()):
            if j not in live:
                live.add(j)
                todo.append(j)
    live.add(EXIT)
    order = sorted(live)
    remap = {old: new for new, old in enumerate(order)}
    nodes = [b.nodes[i] for i in order]
    edges = sorted(
        (CfgEdge(remap[s], remap[d], lab) for s, d, lab in b.edges if s in live and d in live),
        key=lambda e: (e.src, e.dst, e.label),
    )
    return Cfg(method_id, nodes, edges)


def own_expressions(stmt: AstNode) -> tuple[AstNode, ...]:
    """Expressions evaluated when control passes through CFG node ``stmt``."""
    kind = stmt.kind
    if kind in (Kind.IF, Kind.WHILE):
        return (stmt.children[0],)
    if kind is Kind.FOR:
        cond = stmt.slot("cond")
        return (cond,) if cond is not None else ()
    if kind in (Kind.METHOD_CALL, Kind.CONSTRUCTOR_CALL):
        return (stmt,)
    if kind in (Kind.LOCAL_VAR_DECL, Kind.ASSIGN, Kind.RETURN):
        return stmt.children
    return ()
