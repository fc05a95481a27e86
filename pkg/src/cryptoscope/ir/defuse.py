"""Reaching definitions and def-use chains over a method CFG."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional

from ..frontend import AstNode, Kind
from .cfg import ENTRY, Cfg, own_expressions
from .symbols import Storage, Symbol, SymbolTable


class _EntryDef:
    """Pseudo-definition standing for the value a variable has on entry."""

    _instance: Optional["_EntryDef"] = None

    def __new__(cls) -> "_EntryDef":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ENTRY"


ENTRY_DEF = _EntryDef()


class ExternalKind(str, Enum):
    PARAM = "Param"
    FIELD = "Field"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class ExternalInput:
    kind: ExternalKind
    symbol: Symbol


def _walk_expr(node: AstNode) -> Iterator[AstNode]:
    yield from node.walk()


def assigned_symbol(stmt: AstNode, table: SymbolTable) -> Optional[Symbol]:
    """The local or parameter symbol written by ``stmt``, if any."""
    if stmt.kind in (Kind.LOCAL_VAR_DECL, Kind.PARAM):
        if stmt.kind is Kind.LOCAL_VAR_DECL and not stmt.children:
            return None
        return table.decl_symbols.get(stmt)
    if stmt.kind is Kind.ASSIGN:
        target = stmt.children[0]
        if target.kind is Kind.IDENTIFIER:
            sym = table.bindings.get(target)
            if sym is not None and not sym.is_field:
                return sym
    return None


def used_nodes(stmt: AstNode, table: SymbolTable) -> list[tuple[AstNode, Symbol]]:
    """Variable occurrences read by ``stmt`` (plain assignment targets excluded)."""
    skip: Optional[AstNode] = None
    if stmt.kind is Kind.ASSIGN and stmt.op == "=":
        skip = stmt.children[0]
    out = []
    for expr in own_expressions(stmt):
        for node in _walk_expr(expr):
            if node is skip:
                continue
            sym = table.bindings.get(node)
            if sym is not None:
                out.append((node, sym))
    return out


@dataclass
class DefUse:
    cfg: Cfg
    gen: dict[int, Optional[Symbol]]
    reach_in: dict[int, frozenset]  # node -> {(symbol, def node index)}
    uses: dict[int, list[tuple[AstNode, Symbol]]]
    chains: dict[tuple[Symbol, AstNode], frozenset] = field(default_factory=dict)
    external: dict[tuple[Symbol, AstNode], ExternalInput] = field(default_factory=dict)

    def reaching(self, stmt: AstNode, sym: Symbol) -> frozenset:
        """Definitions of ``sym`` reaching ``stmt``: statements or ``ENTRY_DEF``."""
        i = self.cfg.index.get(stmt)
        if i is None:
            return frozenset()
        out = set()
        for s, d in self.reach_in[i]:
            if s == sym:
                out.add(ENTRY_DEF if d == ENTRY else self.cfg.nodes[d])
        return frozenset(out)

    def defines(self, stmt: AstNode) -> Optional[Symbol]:
        i = self.cfg.index.get(stmt)
        return self.gen.get(i) if i is not None else None


def compute_defuse(cfg: Cfg, table: SymbolTable, params: tuple[Symbol, ...], seed: Optional[int] = None) -> DefUse:
    """Solve reaching definitions with a worklist.

    ``seed`` shuffles the initial worklist order; the fixpoint is the same
    for every order, which the test-suite checks.
    """
    n = len(cfg.nodes)
    gen: dict[int, Optional[Symbol]] = {}
    uses: dict[int, list] = {}
    for i, stmt in enumerate(cfg.nodes):
        if stmt is None:
            continue
        gen[i] = assigned_symbol(stmt, table)
        uses[i] = used_nodes(stmt, table)
    entry_out = frozenset((p, ENTRY) for p in params)
    reach_in: dict[int, frozenset] = {i: frozenset() for i in range(n)}
    reach_out: dict[int, frozenset] = {i: frozenset() for i in range(n)}
    reach_out[ENTRY] = entry_out
    work = list(range(1, n))
    if seed is not None:
        random.Random(seed).shuffle(work)
    pending = set(work)
    while work:
        i = work.pop(0)
        pending.discard(i)
        new_in = frozenset().union(*(reach_out[e.src] for e in cfg.pred[i])) if cfg.pred[i] else frozenset()
        sym = gen.get(i)
        if sym is not None:
            new_out = frozenset(p for p in new_in if p[0] != sym) | {(sym, i)}
        else:
            new_out = new_in
        reach_in[i] = new_in
        if new_out != reach_out[i]:
            reach_out[i] = new_out
            for e in cfg.succ[i]:
                if e.dst not in pending:
                    pending.add(e.dst)
                    work.append(e.dst)
    du = DefUse(cfg, gen, reach_in, uses)
    chains: dict[tuple[Symbol, AstNode], set] = {}
    for i, occ in uses.items():
        stmt = cfg.nodes[i]
        for _, sym in occ:
            if sym.is_field:
                du.external[(sym, stmt)] = ExternalInput(ExternalKind.FIELD, sym)
                continue
            defs = [d for s, d in reach_in[i] if s == sym]
            for d in defs:
                if d == ENTRY:
                    continue
                chains.setdefault((sym, cfg.nodes[d]), set()).add(stmt)
            if not defs or ENTRY in defs:
                kind = ExternalKind.PARAM if sym.storage is Storage.PARAM else ExternalKind.UNKNOWN
                du.external[(sym, stmt)] = ExternalInput(kind, sym)
    du.chains = {k: frozenset(v) for k, v in chains.items()}
    return du
