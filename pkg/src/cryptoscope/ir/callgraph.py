"""Call graph from declared receiver types (no dispatch analysis)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..frontend import AstNode, Kind
from .symbols import MethodRef, SymbolTable


@dataclass(frozen=True)
class CallEdge:
    call: AstNode
    caller: str
    callee: Optional[str]  # project method id, or None for library calls
    external_name: Optional[str] = None  # ``owner.method`` for library calls

    @property
    def is_external(self) -> bool:
        return self.callee is None


@dataclass
class CallGraph:
    nodes: list[str]
    edges: list[CallEdge]
    by_site: dict[AstNode, CallEdge] = field(default_factory=dict)
    callers_of: dict[str, list[CallEdge]] = field(default_factory=dict)
    callees_of: dict[str, list[CallEdge]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.by_site = {e.call: e for e in self.edges}
        self.callers_of = {m: [] for m in self.nodes}
        self.callees_of = {m: [] for m in self.nodes}
        for e in self.edges:
            self.callees_of.setdefault(e.caller, []).append(e)
            if e.callee is not None:
                self.callers_of.setdefault(e.callee, []).append(e)

    def to_json(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [
                {
                    "caller": e.caller,
                    "callee": e.callee if e.callee is not None else f"External({e.external_name})",
                    "site": e.call.location.to_json(),
                }
                for e in self.edges
            ],
        }


def resolve_call(call: AstNode, table: SymbolTable) -> tuple[Optional[MethodRef], Optional[str]]:
    """Resolve ``call`` to a project method or to a qualified library name."""
    if call.kind is Kind.CONSTRUCTOR_CALL:
        owner = table.resolve_type(call.type_name, call.location.file_name)
        target = table.find_constructor(owner, len(call.args))
        if target is not None:
            return target, None
        return None, f"{owner}.<init>"
    owner = table.call_owner(call)
    target = table.find_method(owner, call.name, len(call.args))
    if target is not None:
        return target, None
    if owner is None and call.receiver is not None:
        return None, f"{call.receiver.text}.{call.name}"
    return None, f"{owner}.{call.name}" if owner else call.name


def build_call_graph(table: SymbolTable) -> CallGraph:
    """One edge per syntactic call site in method bodies and field initializers."""
    nodes = list(table.methods)
    edges: list[CallEdge] = []
    for info in table.classes.values():
        init_id = f"{info.qualified_name}.<fields>()"
        roots: list[tuple[str, AstNode]] = []
        for member in info.decl.children:
            if member.kind is Kind.FIELD_DECL and member.children:
                roots.append((init_id, member.children[0]))
        if roots:
            nodes.append(init_id)
        roots.extend((ref.id, ref.body) for ref in info.methods)
        for caller, root in roots:
            for node in root.walk():
                if node.kind in (Kind.METHOD_CALL, Kind.CONSTRUCTOR_CALL):
                    target, external = resolve_call(node, table)
                    edges.append(CallEdge(node, caller, target.id if target else None, external))
    return CallGraph(nodes, edges)
