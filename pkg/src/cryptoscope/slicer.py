"""Slicing criteria, context-split backward slices and material tracing.

A slice is built around one criterion call (``doFinal``, ``sign`` ...) in one
calling context. Besides the usual data and weak control dependences it
collects the library calls related to the criterion through the KB relation
rules:

* calls on the same crypto object (``getInstance``/``init``/``update``),
  found by comparing the *origins* of receiver expressions, i.e. the
  allocating calls reached through def-use chains, parameters and returns;
* producers whose result flows into a parameter of an included call
  (``generateKey`` into ``init``, ``new IvParameterSpec`` into ``init``);
* calls writing into an array that later reaches an included call
  (``random.nextBytes(iv)``).

Related calls are grouped into chains; chain 0 is the criterion's own
object, every producer opens a new chain.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .constprop import EMPTY, ConstProp, Context, context_json, enumerate_contexts
from .frontend import AstNode, Kind, Location
from .ir import ENTRY_DEF, ProgramIr, Storage, own_expressions
from .kb import ApiSpec, KnowledgeBase, match_call_site
from .values import ConstValue

DEFAULT_MAX_CONTEXTS = 64
DEFAULT_SLICE_BUDGET = 200_000

# parameter roles whose argument origins are followed for producer links
_TRACED_ROLES = frozenset({"key", "iv", "salt", "seed", "password", "random", "keysize", "data"})
_HEADERS = (Kind.IF, Kind.WHILE, Kind.FOR)


class SliceBudgetExceeded(Exception):
    """Raised internally when a slice exceeds its visit budget."""


@dataclass(frozen=True)
class SliceCriterion:
    call: AstNode
    statement: AstNode
    method_id: str
    api: ApiSpec
    functions: tuple[str, ...]

    @property
    def location(self) -> Location:
        return self.call.location

    def __post_init__(self) -> None:
        if self.api.kind != "criterion":
            raise ValueError(f"{self.api.id} is not a criterion API")


@dataclass(frozen=True)
class Site:
    """A statement analysed under one calling context of its method."""

    stmt: AstNode
    method_id: str
    ctx: Context

    def to_json(self) -> dict:
        return {
            "location": self.stmt.location.to_json(),
            "method": self.method_id,
            "context": context_json(self.ctx),
        }


@dataclass(frozen=True)
class Origin:
    """Where a value was created: a library call, an array allocation, a literal ..."""

    kind: str  # api | alloc | literal | param | external | unknown
    node: AstNode
    ctx: Context


@dataclass(frozen=True)
class SliceEdge:
    src: Site  # the dependency
    dst: Site  # the statement depending on it
    kind: str  # data | control | param | return | instance | flow | out-arg


@dataclass
class RelatedCall:
    api: ApiSpec
    call: AstNode
    method_id: str
    ctx: Context
    relation: str  # criterion | SameInstance | ResultFlowsToParam
    chain: int
    arg_values: tuple[ConstValue, ...]
    target: Optional[AstNode] = None  # consuming call of a producer
    param_index: Optional[int] = None  # consuming parameter of a producer
    via_role: Optional[str] = None  # role of the consuming parameter

    @property
    def location(self) -> Location:
        return self.call.location

    def to_json(self) -> dict:
        out = {
            "api": self.api.id,
            "location": self.location.to_json(),
            "relation": self.relation,
            "chain": self.chain,
            "context": context_json(self.ctx),
            "args": [v.to_json() for v in self.arg_values],
        }
        if self.target is not None:
            out["target"] = self.target.location.to_json()
            out["paramIndex"] = self.param_index
        return out


@dataclass
class MaterialBinding:
    """A piece of crypto material reaching a parameter of a related call."""

    kind: str
    state: str  # hardcoded | generated | external
    consumer: RelatedCall
    param_index: int
    value: Optional[ConstValue]
    introduced_at: Location
    snippet: str
    source_api: Optional[str] = None
    producer: Optional[RelatedCall] = None
    size_bits: Optional[int] = None
    consumed: bool = False

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "state": self.state,
            "consumer": self.consumer.api.id,
            "paramIndex": self.param_index,
            "introducedAt": self.introduced_at.to_json(),
            "consumed": self.consumed,
        }
        if self.source_api:
            out["sourceApi"] = self.source_api
        if self.size_bits is not None:
            out["sizeBits"] = self.size_bits
        return out


@dataclass
class Slice:
    criterion: SliceCriterion
    context: Context
    statements: list[Site] = field(default_factory=list)
    edges: list[SliceEdge] = field(default_factory=list)
    values: dict[AstNode, ConstValue] = field(default_factory=dict)
    related_calls: list[RelatedCall] = field(default_factory=list)
    materials: list[MaterialBinding] = field(default_factory=list)
    flows: dict = field(default_factory=dict)  # (call, param index) -> [producer RelatedCall]
    merged_context: bool = False
    truncated: bool = False

    @property
    def statement_locations(self) -> list[Location]:
        seen, out = set(), []
        for site in self.statements:
            if site.stmt not in seen:
                seen.add(site.stmt)
                out.append(site.stmt.location)
        return out

    def chain(self, chain_id: int) -> list[RelatedCall]:
        return [rc for rc in self.related_calls if rc.chain == chain_id]

    def to_json(self) -> dict:
        return {
            "criterion": {
                "api": self.criterion.api.id,
                "location": self.criterion.location.to_json(),
                "functions": list(self.criterion.functions),
            },
            "context": context_json(self.context),
            "mergedContext": self.merged_context,
            "truncated": self.truncated,
            "statements": [loc.to_json() for loc in self.statement_locations],
            "edges": [
                {"kind": e.kind, "from": e.src.stmt.location.short(), "to": e.dst.stmt.location.short()}
                for e in self.edges
            ],
            "relatedCalls": [rc.to_json() for rc in self.related_calls],
            "materials": [m.to_json() for m in self.materials],
        }


# -- KB matching over the IR ----------------------------------------------------------

class ApiIndex:
    """Cached KB matches for every call of a program."""

    def __init__(self, ir: ProgramIr, kb: KnowledgeBase):
        self.ir = ir
        self.kb = kb
        self._match: dict[AstNode, Optional[ApiSpec]] = {}
        self.by_method: dict[str, list[tuple[AstNode, AstNode, ApiSpec]]] = {}
        for info, stmt, call in ir.calls():
            api = self.match(call)
            if api is not None:
                self.by_method.setdefault(info.id, []).append((stmt, call, api))

    def match(self, call: AstNode) -> Optional[ApiSpec]:
        if call not in self._match:
            self._match[call] = match_call_site(call, self.ir.symbols, self.kb)
        return self._match[call]


def _sort_key(node: AstNode) -> tuple:
    loc = node.location
    return loc.file_name, loc.line, loc.start_column


def find_criteria(ir: ProgramIr, kb: KnowledgeBase, index: Optional[ApiIndex] = None) -> list[SliceCriterion]:
    """One criterion per reachable call site matching a criterion API, by (file, line)."""
    index = index or ApiIndex(ir, kb)
    out = []
    for mid, entries in index.by_method.items():
        for stmt, call, api in entries:
            if api.kind == "criterion":
                out.append(SliceCriterion(call, stmt, mid, api, api.functions))
    out.sort(key=lambda c: _sort_key(c.call))
    return out


# -- slicing ------------------------------------------------------------------------------

class _Builder:
    """Mutable state for one (criterion, context) slice."""

    def __init__(self, slicer: "Slicer", criterion: SliceCriterion, ctx: Context):
        self.s = slicer
        self.ir = slicer.ir
        self.criterion = criterion
        self.ctx = ctx
        self.visits = 0
        self.sites: dict[Site, None] = {}
        self.site_queue: deque[Site] = deque()
        self.edges: dict[SliceEdge, None] = {}
        self.related: dict[tuple[AstNode, Context], RelatedCall] = {}
        self.related_order: list[RelatedCall] = []
        self.processed: set = set()
        self.instance: dict[int, set[Origin]] = {}  # id(RelatedCall) -> receiver api origins
        self.scope: dict[str, set[Context]] = {}
        self.flows: dict[tuple[AstNode, int], list[RelatedCall]] = {}
        self.param_origins: dict[tuple[int, int], set[Origin]] = {}
        self.next_chain = 1
        self.origin_memo: dict = {}
        self.field_memo: dict = {}

    # -- bookkeeping --------------------------------------------------------------

    def tick(self, n: int = 1) -> None:
        self.visits += n
        if self.visits > self.s.budget:
            raise SliceBudgetExceeded()

    def visit_scope(self, method_id: Optional[str], ctx: Context) -> None:
        if method_id is not None:
            self.scope.setdefault(method_id, set()).add(ctx)

    def site_of(self, node: AstNode, ctx: Context) -> Optional[Site]:
        stmt = self.ir.stmt_of.get(node)
        mid = self.ir.method_of.get(node)
        if stmt is not None and mid is not None:
            return Site(stmt, mid, ctx)
        decl = node
        while decl is not None and decl.kind is not Kind.FIELD_DECL:
            decl = self.ir.parent.get(decl)
        if decl is None:
            return None
        cls = self.ir.symbols.node_class.get(decl) or self._class_of(decl)
        return Site(decl, f"{cls}.<fields>()", EMPTY)

    def _class_of(self, node: AstNode) -> str:
        cur = node
        while cur is not None and cur.kind is not Kind.CLASS_DECL:
            cur = self.ir.parent.get(cur)
        if cur is None:
            return "?"
        for q, info in self.ir.symbols.classes.items():
            if info.decl is cur:
                return q
        return cur.name or "?"

    def add_site(self, site: Optional[Site], dependent: Optional[Site], kind: str) -> None:
        if site is None:
            return
        if dependent is not None and site != dependent:
            self.edges.setdefault(SliceEdge(site, dependent, kind), None)
        if site not in self.sites:
            self.tick()
            self.sites[site] = None
            self.site_queue.append(site)
            self.visit_scope(site.method_id, site.ctx)

    def add_related(self, api: ApiSpec, call: AstNode, ctx: Context, relation: str, chain: int,
                    anchor: Optional[RelatedCall], edge_kind: str, target: Optional[AstNode] = None,
                    param_index: Optional[int] = None, via_role: Optional[str] = None) -> Optional[RelatedCall]:
        key = (call, ctx)
        site = self.site_of(call, ctx)
        if key in self.related:
            rc = self.related[key]
        else:
            mid = self.ir.method_of.get(call) or (site.method_id if site else "")
            values = tuple(self.s.cp.value(a, ctx) for a in call.args)
            rc = RelatedCall(api, call, mid, ctx, relation, chain, values, target, param_index, via_role)
            self.related[key] = rc
            self.related_order.append(rc)
        if anchor is not None:
            self.add_site(site, self.site_of(anchor.call, anchor.ctx), edge_kind)
        else:
            self.add_site(site, None, edge_kind)
        return rc

    # -- origins ----------------------------------------------------------------------

    def origins(self, expr: AstNode, ctx: Context) -> frozenset[Origin]:
        key = (expr, ctx)
        if key in self.origin_memo:
            return self.origin_memo[key]
        self.origin_memo[key] = frozenset()  # cycle guard
        self.tick()
        result = frozenset(self._origins(expr, ctx))
        self.origin_memo[key] = result
        return result

    def _origins(self, expr: AstNode, ctx: Context) -> set[Origin]:
        kind = expr.kind
        ir = self.ir
        if kind in (Kind.STRING_LIT, Kind.INT_LIT, Kind.BOOL_LIT, Kind.NULL_LIT):
            return {Origin("literal", expr, ctx)}
        if kind is Kind.ARRAY_CREATION:
            return {Origin("alloc", expr, ctx)}
        if kind is Kind.UNARY_OP and expr.op and expr.op.startswith("("):
            return set(self.origins(expr.children[0], ctx))
        if kind is Kind.ASSIGN:
            return set(self.origins(expr.children[-1], ctx))
        if kind in (Kind.METHOD_CALL, Kind.CONSTRUCTOR_CALL):
            if self.s.index.match(expr) is not None:
                return {Origin("api", expr, ctx)}
            edge = ir.call_graph.by_site.get(expr)
            if edge is not None and edge.callee is not None:
                callee = ir.methods.get(edge.callee)
                if callee is None:
                    return {Origin("unknown", expr, ctx)}
                inner = self.s.cp.push(ctx, expr)
                self.visit_scope(callee.id, inner)
                out: set[Origin] = set()
                for stmt in callee.cfg.statements:
                    if stmt.kind is Kind.RETURN and stmt.children:
                        out |= self.origins(stmt.children[0], inner)
                return out or {Origin("unknown", expr, ctx)}
            return {Origin("external", expr, ctx)}
        if kind in (Kind.IDENTIFIER, Kind.FIELD_ACCESS):
            sym = ir.symbols.bindings.get(expr)
            if sym is None:
                return {Origin("external", expr, ctx)}
            if sym.is_field:
                return set(self.field_origins(sym, expr))
            stmt = ir.stmt_of.get(expr)
            mid = ir.method_of.get(expr)
            if stmt is None or mid is None:
                return {Origin("unknown", expr, ctx)}
            self.visit_scope(mid, ctx)
            info = ir.methods[mid]
            out = set()
            for d in info.defuse.reaching(stmt, sym):
                if d is ENTRY_DEF:
                    if sym.storage is Storage.PARAM:
                        out |= self.param_origin_set(mid, info.params.index(sym), ctx)
                    else:
                        out.add(Origin("unknown", expr, ctx))
                elif d.kind is Kind.LOCAL_VAR_DECL:
                    out |= self.origins(d.children[0], ctx)
                elif d.kind is Kind.ASSIGN and d.op == "=":
                    out |= self.origins(d.children[1], ctx)
                else:
                    out.add(Origin("unknown", d, ctx))
            return out
        return {Origin("unknown", expr, ctx)}

    def param_origin_set(self, method_id: str, index: int, ctx: Context) -> set[Origin]:
        ir = self.ir
        if ctx:
            site = ctx[-1]
            if index < len(site.args):
                self.visit_scope(ir.method_of.get(site), ctx[:-1])
                return set(self.origins(site.args[index], ctx[:-1]))
            return set()
        out: set[Origin] = set()
        for edge in self.s.live_callers(method_id):
            if index < len(edge.call.args):
                self.visit_scope(edge.caller, EMPTY)
                out |= self.origins(edge.call.args[index], EMPTY)
        if not out:
            info = ir.methods[method_id]
            out.add(Origin("param", info.ref.param_nodes[index], EMPTY))
        return out

    def field_origins(self, sym, use: AstNode) -> frozenset[Origin]:
        if sym in self.field_memo:
            return self.field_memo[sym]
        self.field_memo[sym] = frozenset()
        out: set[Origin] = set()
        decl = self.ir.symbols.field_decls.get(sym)
        if decl is not None and decl.children:
            out |= self.origins(decl.children[0], EMPTY)
        for target, assign in self.s.field_writes.get(sym, ()):
            self.visit_scope(self.ir.method_of.get(assign), EMPTY)
            if assign.op == "=":
                out |= self.origins(assign.children[1], EMPTY)
        if not out:
            out.add(Origin("unknown", decl if decl is not None else use, EMPTY))
        result = frozenset(out)
        self.field_memo[sym] = result
        return result

    # -- dependence closure -----------------------------------------------------------

    def close_sites(self) -> bool:
        changed = False
        while self.site_queue:
            site = self.site_queue.popleft()
            changed = True
            self._close(site)
        return changed

    def _close(self, site: Site) -> None:
        ir = self.ir
        info = ir.methods.get(site.method_id)
        if info is None:
            return  # field initializer pseudo-site
        i = info.cfg.index.get(site.stmt)
        if i is None:
            return
        syms = ir.symbols
        for node, sym in info.defuse.uses.get(i, ()):
            if sym.is_field:
                decl = syms.field_decls.get(sym)
                if decl is not None and decl.children:
                    self.add_site(self.site_of(decl.children[0], EMPTY), site, "data")
                for _target, assign in self.s.field_writes.get(sym, ()):
                    self.add_site(self.site_of(assign, EMPTY), site, "data")
                continue
            for d in info.defuse.reaching(site.stmt, sym):
                if d is ENTRY_DEF:
                    if sym.storage is Storage.PARAM:
                        self._ascend(site, info.params.index(sym))
                    continue
                self.add_site(Site(d, site.method_id, site.ctx), site, "data")
        # results of project calls flow in through their return statements
        for expr in own_expressions(site.stmt):
            for node in expr.walk():
                if node.kind not in (Kind.METHOD_CALL, Kind.CONSTRUCTOR_CALL) or node is site.stmt:
                    continue
                edge = ir.call_graph.by_site.get(node)
                if edge is None or edge.callee is None or edge.callee not in ir.methods:
                    continue
                callee = ir.methods[edge.callee]
                inner = self.s.cp.push(site.ctx, node)
                for stmt in callee.cfg.statements:
                    if stmt.kind is Kind.RETURN:
                        self.add_site(Site(stmt, callee.id, inner), site, "return")
        # weak control dependence: enclosing branch and loop headers
        child = site.stmt
        parent = ir.parent.get(child)
        while parent is not None and parent.kind is not Kind.METHOD_DECL:
            if parent.kind in _HEADERS and parent in info.cfg.index:
                cond = parent.slot("cond") if parent.kind is Kind.FOR else parent.children[0]
                if child is not cond:
                    self.add_site(Site(parent, site.method_id, site.ctx), site, "control")
            child, parent = parent, ir.parent.get(parent)

    def _ascend(self, site: Site, index: int) -> None:
        if site.ctx:
            call = site.ctx[-1]
            caller = self.site_of(call, site.ctx[:-1])
            self.add_site(caller, site, "param")
            return
        for edge in self.s.live_callers(site.method_id):
            self.add_site(self.site_of(edge.call, EMPTY), site, "param")

    # -- relations -----------------------------------------------------------------

    def process_related(self) -> bool:
        changed = False
        for rc in list(self.related_order):
            if id(rc) in self.processed:
                continue
            self.processed.add(id(rc))
            changed = True
            self._link_receiver(rc)
            self._trace_params(rc)
        for rc in list(self.related_order):
            if rc.call.receiver is not None and self.instance.get(id(rc)):
                changed |= self._scan_instance(rc)
        changed |= self._scan_out_args()
        return changed

    def _rule(self, source: ApiSpec, target: ApiSpec, param_index: Optional[int]) -> Optional[str]:
        kb = self.s.kb
        if kb.related("SameInstance", source.id, target.id) or kb.related("SameInstance", target.id, source.id):
            return "SameInstance"
        for rule in kb.related("ResultFlowsToParam", source.id, target.id):
            if rule.param_index is None or param_index is None or rule.param_index == param_index:
                return "ResultFlowsToParam"
        return None

    def _link_receiver(self, rc: RelatedCall) -> None:
        receiver = rc.call.receiver
        if receiver is None:
            self.instance[id(rc)] = set()
            return
        origins = {o for o in self.origins(receiver, rc.ctx) if o.kind == "api"}
        self.instance[id(rc)] = origins
        for o in sorted(origins, key=lambda o: _sort_key(o.node)):
            api = self.s.index.match(o.node)
            relation = self._rule(api, rc.api, None)
            if relation is None:
                continue
            self.add_related(api, o.node, o.ctx, relation, rc.chain, rc, "instance")

    def _trace_params(self, rc: RelatedCall) -> None:
        args = rc.call.args
        for p in rc.api.params:
            if p.role not in _TRACED_ROLES or p.index >= len(args):
                continue
            origins = self.origins(args[p.index], rc.ctx)
            self.param_origins[(id(rc), p.index)] = set(origins)
            for o in sorted(origins, key=lambda o: _sort_key(o.node)):
                if o.kind != "api" or (o.node, o.ctx) == (rc.call, rc.ctx):
                    continue
                api = self.s.index.match(o.node)
                if self._rule(api, rc.api, p.index) != "ResultFlowsToParam":
                    continue
                self._add_producer(api, o.node, o.ctx, rc, p.index, p.role, "flow")

    def _add_producer(self, api: ApiSpec, call: AstNode, ctx: Context, consumer: RelatedCall,
                      index: int, role: str, edge_kind: str) -> None:
        existing = self.related.get((call, ctx))
        chain = existing.chain if existing is not None else self.next_chain
        if existing is None:
            self.next_chain += 1
        rc = self.add_related(api, call, ctx, "ResultFlowsToParam", chain, consumer, edge_kind,
                              target=consumer.call, param_index=index, via_role=role)
        producers = self.flows.setdefault((consumer.call, index), [])
        if rc not in producers:
            producers.append(rc)

    def _candidates(self) -> Iterable[tuple[AstNode, AstNode, ApiSpec, str, Context]]:
        for mid in sorted(self.scope):
            entries = self.s.index.by_method.get(mid, ())
            for ctx in sorted(self.scope[mid], key=lambda c: [_sort_key(n) for n in c]):
                for stmt, call, api in entries:
                    yield stmt, call, api, mid, ctx

    def _scan_instance(self, rc: RelatedCall) -> bool:
        mine = self.instance[id(rc)]
        rc_site = self.site_of(rc.call, rc.ctx)
        found: list[tuple[AstNode, AstNode, ApiSpec, Context]] = []
        for stmt, call, api, mid, ctx in list(self._candidates()):
            if call.receiver is None or (call, ctx) == (rc.call, rc.ctx) or api.kind == "criterion":
                continue
            if (call, ctx) in self.related:
                continue
            if self._rule(api, rc.api, None) != "SameInstance":
                continue
            theirs = {o for o in self.origins(call.receiver, ctx) if o.kind == "api"}
            if not theirs & mine:
                continue
            if rc_site is not None and mid == rc_site.method_id:
                cfg = self.ir.methods[mid].cfg
                if not cfg.precedes(stmt, rc_site.stmt):
                    continue
            found.append((stmt, call, api, ctx))
        if not found:
            return False
        # an initialization is dropped when every path from it to the anchor re-initializes
        inits = {stmt for stmt, _c, api, _x in found if api.kind == "initialization"}
        for stmt, call, api, ctx in found:
            if api.kind == "initialization" and rc_site is not None and self.ir.method_of.get(call) == rc_site.method_id:
                if not self._reaches_avoiding(rc_site.method_id, stmt, rc_site.stmt, inits - {stmt}):
                    continue
            self.add_related(api, call, ctx, "SameInstance", rc.chain, rc, "instance")
        return True

    def _reaches_avoiding(self, method_id: str, src: AstNode, dst: AstNode, blocked: set) -> bool:
        cfg = self.ir.methods[method_id].cfg
        start, goal = cfg.index[src], cfg.index[dst]
        blocked_ix = {cfg.index[b] for b in blocked if b in cfg.index and b is not dst}
        seen, todo = set(), deque(e.dst for e in cfg.succ[start])
        while todo:
            j = todo.popleft()
            if j == goal:
                return True
            if j in seen or j in blocked_ix:
                continue
            seen.add(j)
            todo.extend(e.dst for e in cfg.succ[j])
        return False

    def _scan_out_args(self) -> bool:
        wanted: dict[Origin, list[tuple[RelatedCall, int]]] = {}
        for rc in self.related_order:
            for p in rc.api.params:
                for o in self.param_origins.get((id(rc), p.index), ()):
                    if o.kind == "alloc":
                        wanted.setdefault(o, []).append((rc, p.index))
        if not wanted:
            return False
        changed = False
        for stmt, call, api, mid, ctx in list(self._candidates()):
            outs = [p for p in api.params if p.out and p.index < len(call.args)]
            if not outs:
                continue
            for p in outs:
                for o in self.origins(call.args[p.index], ctx):
                    for consumer, index in wanted.get(o, ()):
                        if (call, ctx) == (consumer.call, consumer.ctx):
                            continue
                        if self._rule(api, consumer.api, index) != "ResultFlowsToParam":
                            continue
                        csite = self.site_of(consumer.call, consumer.ctx)
                        if csite is not None and csite.method_id == mid:
                            if not self.ir.methods[mid].cfg.precedes(stmt, csite.stmt):
                                continue
                        before = len(self.related_order)
                        self._add_producer(api, call, ctx, consumer, index, "out", "out-arg")
                        changed |= len(self.related_order) != before
        return changed


class Slicer:
    """Backward slicer over one program; shares constant propagation across criteria."""

    def __init__(self, ir: ProgramIr, kb: KnowledgeBase, cp: Optional[ConstProp] = None,
                 context_depth: int = 3, max_contexts: int = DEFAULT_MAX_CONTEXTS,
                 budget: int = DEFAULT_SLICE_BUDGET, index: Optional[ApiIndex] = None):
        if max_contexts < 1:
            raise ValueError("max_contexts must be >= 1")
        if budget <= 0:
            raise ValueError("slice budget must be positive")
        self.ir = ir
        self.kb = kb
        self.k = context_depth
        self.cp = cp or ConstProp(ir, kb, context_depth)
        self.max_contexts = max_contexts
        self.budget = budget
        self.index = index or ApiIndex(ir, kb)
        self.field_writes: dict = {}
        for info in ir.methods.values():
            for stmt in info.cfg.statements:
                for expr in own_expressions(stmt):
                    for node in expr.walk():
                        if node.kind is Kind.ASSIGN:
                            sym = ir.symbols.bindings.get(node.children[0])
                            if sym is not None and sym.is_field:
                                self.field_writes.setdefault(sym, []).append((node.children[0], node))
                if stmt.kind is Kind.ASSIGN:
                    sym = ir.symbols.bindings.get(stmt.children[0])
                    if sym is not None and sym.is_field:
                        entry = (stmt.children[0], stmt)
                        if entry not in self.field_writes.setdefault(sym, []):
                            self.field_writes[sym].append(entry)

    def live_callers(self, method_id: str) -> list:
        return [
            e for e in self.ir.call_graph.callers_of.get(method_id, ())
            if e.call in self.ir.stmt_of or self.ir.method_of.get(e.call) is None
        ]

    def find_criteria(self) -> list[SliceCriterion]:
        return find_criteria(self.ir, self.kb, self.index)

    def contexts(self, criterion: SliceCriterion) -> tuple[list[Context], bool]:
        return enumerate_contexts(self.ir, criterion.method_id, self.k, self.max_contexts)

    def backward_slice(self, criterion: SliceCriterion) -> list[Slice]:
        """One slice per distinguishable calling context of the criterion."""
        contexts, merged = self.contexts(criterion)
        out = []
        for ctx in contexts:
            sl = self.slice_in_context(criterion, ctx)
            sl.merged_context = merged and ctx == EMPTY
            out.append(sl)
        return out

    def slice_in_context(self, criterion: SliceCriterion, ctx: Context) -> Slice:
        b = _Builder(self, criterion, ctx)
        truncated = False
        try:
            b.add_related(criterion.api, criterion.call, ctx, "criterion", 0, None, "data")
            while True:
                changed = b.close_sites()
                changed |= b.process_related()
                changed |= b.close_sites()
                if not changed:
                    break
        except SliceBudgetExceeded:
            truncated = True
        sl = Slice(criterion, ctx, truncated=truncated)
        sl.statements = sorted(b.sites, key=lambda s: (_sort_key(s.stmt), [_sort_key(n) for n in s.ctx]))
        sl.edges = list(b.edges)
        sl.related_calls = sorted(b.related_order, key=lambda rc: (rc.chain, _sort_key(rc.call)))
        for rc in sl.related_calls:
            for arg, val in zip(rc.call.args, rc.arg_values):
                prev = sl.values.get(arg)
                sl.values[arg] = val if prev is None else prev.join(val)
        sl.flows = {k: list(v) for k, v in b.flows.items()}
        forward_trace_materials(sl, self.ir)
        return sl

    def slice_all(self) -> list[Slice]:
        out = []
        for criterion in self.find_criteria():
            out.extend(self.backward_slice(criterion))
        return out


def backward_slice(criterion: SliceCriterion, ir: ProgramIr, kb: KnowledgeBase, k: int = 3,
                   cp: Optional[ConstProp] = None, max_contexts: int = DEFAULT_MAX_CONTEXTS,
                   budget: int = DEFAULT_SLICE_BUDGET) -> list[Slice]:
    return Slicer(ir, kb, cp, k, max_contexts, budget).backward_slice(criterion)


# -- material tracing ------------------------------------------------------------------

def _bytes_len(value: Optional[ConstValue]) -> Optional[int]:
    if value is None or not value.is_constant:
        return None
    if value.kind == "bytes":
        return len(value.value) * 8
    return None


def _literal_site(value: ConstValue, fallback: Location) -> Location:
    if value.provenance:
        return min(value.provenance)
    return fallback


def _flows_forward(ir: ProgramIr, producer: RelatedCall, consumer: RelatedCall, index: int) -> bool:
    """Follow def-use chains forward from the producer's statement to the consumer argument."""
    stmt = ir.stmt_of.get(producer.call)
    mid = ir.method_of.get(producer.call)
    target_arg = consumer.call.args[index] if index < len(consumer.call.args) else None
    if target_arg is None:
        return False
    if stmt is None or mid is None:
        return False
    if any(n is producer.call for n in target_arg.walk()):
        return True  # nested directly in the argument
    info = ir.methods[mid]
    todo = deque([stmt])
    seen = set()
    while todo:
        cur = todo.popleft()
        if cur in seen:
            continue
        seen.add(cur)
        sym = info.defuse.defines(cur)
        if sym is None:
            continue
        for use_stmt in info.defuse.chains.get((sym, cur), ()):
            if any(ir.symbols.bindings.get(n) == sym for n in target_arg.walk()) and \
                    ir.stmt_of.get(target_arg) is use_stmt:
                return True
            todo.append(use_stmt)
    return False


def forward_trace_materials(sl: Slice, ir: ProgramIr) -> Slice:
    """Bind crypto material to the material parameters of the slice's calls.

    Each material parameter is classified as hardcoded (a constant byte,
    char or string value), generated (produced by a key source, a key
    generator or a random writer) or external. Producer results are traced
    forward through def-use chains to mark materials consumed by the chain.
    """
    materials: list[MaterialBinding] = []
    for rc in sl.related_calls:
        if rc.api.kind == "materialCtor" and not any(rc in v for v in sl.flows.values()):
            continue
        for p in rc.api.params:
            if not p.material or p.index >= len(rc.call.args):
                continue
            arg = rc.call.args[p.index]
            value = rc.arg_values[p.index]
            producers = sl.flows.get((rc.call, p.index), [])
            if value.is_constant and value.kind in ("bytes", "chars", "string"):
                materials.append(MaterialBinding(
                    p.material, "hardcoded", rc, p.index, value, _literal_site(value, arg.location), arg.text,
                    size_bits=_bytes_len(value), consumed=True))
                continue
            if producers:
                for prod in producers:
                    if prod.api.kind == "materialCtor":
                        continue  # the constructor's own parameters carry the material
                    consumed = _flows_forward(ir, prod, rc, p.index) or prod.via_role is not None
                    state = prod.api.material_state
                    source = prod.api.id
                    if prod.api.passthrough or prod.via_role == "out":
                        state = "generated"
                        if prod.via_role == "out":
                            source = _random_api(sl, prod) or prod.api.id
                    kind = p.material
                    if prod.api.produces_material and prod.api.produces_material != "keyPair":
                        kind = prod.api.produces_material
                    materials.append(MaterialBinding(
                        kind, state, rc, p.index, value, prod.location, prod.call.text,
                        source_api=source, producer=prod, consumed=consumed))
                continue
            materials.append(MaterialBinding(p.material, "external", rc, p.index, value, arg.location, arg.text,
                                             consumed=True))
    sl.materials = materials
    return sl


def _random_api(sl: Slice, writer: RelatedCall) -> Optional[str]:
    for rc in sl.chain(writer.chain):
        if rc.api.kind == "randomsource":
            return rc.api.id
    return None
