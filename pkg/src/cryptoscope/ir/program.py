"""Whole-program IR: symbols, per-method CFG and def-use, call graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..frontend import AstNode, Kind, SubjectProject
from .callgraph import CallGraph, build_call_graph
from .cfg import Cfg, build_cfg, own_expressions
from .defuse import DefUse, compute_defuse
from .symbols import MethodRef, ReturnTypeHook, Symbol, SymbolTable, resolve_symbols


@dataclass
class MethodInfo:
    ref: MethodRef
    params: tuple[Symbol, ...]
    cfg: Cfg
    defuse: DefUse

    @property
    def id(self) -> str:
        return self.ref.id


@dataclass
class ProgramIr:
    project: SubjectProject
    symbols: SymbolTable
    methods: dict[str, MethodInfo]
    call_graph: CallGraph
    stmt_of: dict[AstNode, AstNode] = field(default_factory=dict)
    method_of: dict[AstNode, str] = field(default_factory=dict)
    parent: dict[AstNode, AstNode] = field(default_factory=dict)

    def statement(self, node: AstNode) -> Optional[AstNode]:
        """The CFG statement evaluating ``node`` (None in dead code or initializers)."""
        return self.stmt_of.get(node)

    def method(self, node: AstNode) -> Optional[MethodInfo]:
        mid = self.method_of.get(node)
        return self.methods.get(mid) if mid else None

    def calls(self) -> Iterable[tuple[MethodInfo, AstNode, AstNode]]:
        """(method, statement, call) for every call in reachable code, in source order."""
        for info in self.methods.values():
            for stmt in info.cfg.statements:
                for expr in own_expressions(stmt):
                    for node in expr.walk():
                        if node.kind in (Kind.METHOD_CALL, Kind.CONSTRUCTOR_CALL):
                            yield info, stmt, node

    def to_json(self) -> dict:
        return {
            "files": [f.path for f in self.project.files],
            "classes": sorted(self.symbols.classes),
            "methods": [
                {"id": m.id, "params": [p.name for p in m.params], "cfg": m.cfg.to_json()}
                for m in self.methods.values()
            ],
            "callGraph": self.call_graph.to_json(),
            "unresolved": [
                {"name": u.name, "location": u.location.to_json()} for u in self.symbols.unresolved
            ],
        }


def build_ir(
    project: SubjectProject,
    known_types: Iterable[str] = (),
    external_return_type: Optional[ReturnTypeHook] = None,
) -> ProgramIr:
    table = resolve_symbols(project, known_types, external_return_type)
    methods: dict[str, MethodInfo] = {}
    stmt_of: dict[AstNode, AstNode] = {}
    method_of: dict[AstNode, str] = {}
    parent: dict[AstNode, AstNode] = {}
    for ref in table.methods.values():
        params = table.method_params.get(ref.id, ())
        cfg = build_cfg(ref.id, ref.body)
        du = compute_defuse(cfg, table, params)
        methods[ref.id] = MethodInfo(ref, params, cfg, du)
        for node in ref.decl.walk():
            method_of[node] = ref.id
            for child in node.children:
                parent[child] = node
        for stmt in cfg.statements:
            stmt_of[stmt] = stmt
            for expr in own_expressions(stmt):
                for node in expr.walk():
                    stmt_of.setdefault(node, stmt)
    for info in table.classes.values():
        for node in info.decl.walk():
            for child in node.children:
                parent.setdefault(child, node)
    return ProgramIr(project, table, methods, build_call_graph(table), stmt_of, method_of, parent)
