"""Interprocedural, context-sensitive constant propagation.

Contexts are k-suffix call strings: a tuple of call-site nodes, most recent
last. A context ``c`` for method ``m`` stands for every call path into ``m``
that ends with ``c``; the empty context therefore means "any caller". The
value of parameter ``i`` in context ``c`` is the argument at ``c[-1]``
evaluated in the caller under ``c[:-1]``; in the empty context it is the
join over all callers.

Evaluation is demand-driven. Each queried quantity is a key
(expression, definition, parameter, return value or field under a context);
cycles through recursion or loops are resolved by re-running the demanded
computation until no key read mid-cycle changes (chaotic iteration on a
finite-height lattice).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional

from .frontend import AstNode, Kind, Location
from .ir import ENTRY_DEF, ProgramIr, Storage, Symbol
from .values import BUDGET, EXTERNAL_INPUT, NON_CONSTANT, ConstValue, join_all

Context = tuple  # tuple[AstNode, ...]
EMPTY: Context = ()

DEFAULT_K = 3
DEFAULT_BUDGET = 2_000_000
MAX_DEPTH = 1500
INT_MIN, INT_MAX = -(2 ** 31), 2 ** 31 - 1


def push(ctx: Context, site: AstNode, k: int) -> Context:
    if k <= 0:
        return EMPTY
    return (ctx + (site,))[-k:]


def context_json(ctx: Context) -> list[str]:
    return [site.location.short() for site in ctx]


def wrap_int(v: int) -> int:
    v &= 0xFFFFFFFF
    return v - (1 << 32) if v > INT_MAX else v


def java_string(kind: str, value: object) -> Optional[str]:
    """Java string conversion used by ``+`` concatenation."""
    if kind == "string":
        return value
    if kind == "int":
        return str(value)
    if kind == "bool":
        return "true" if value else "false"
    if kind == "null":
        return "null"
    return None  # arrays print as identity hashes


def _div(a: int, b: int) -> Optional[int]:
    if b == 0:
        return None
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _mod(a: int, b: int) -> Optional[int]:
    if b == 0:
        return None
    return a - b * _div(a, b)


_INT_OPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "%": _mod,
    "<<": lambda a, b: a << (b & 31),
    ">>": lambda a, b: a >> (b & 31),
    ">>>": lambda a, b: (a & 0xFFFFFFFF) >> (b & 31),
    "&": lambda a, b: a & b,
    "|": lambda a, b: a | b,
    "^": lambda a, b: a ^ b,
}
_CMP_OPS = {
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def fold_binary(op: str, left: tuple, right: tuple) -> Optional[tuple]:
    """Fold one pair of constants; None when the result is not a constant."""
    (lk, lv), (rk, rv) = left, right
    if op == "+" and "string" in (lk, rk):
        ls, rs = java_string(lk, lv), java_string(rk, rv)
        if ls is None or rs is None:
            return None
        return "string", ls + rs
    if lk == "int" and rk == "int":
        if op in _INT_OPS:
            res = _INT_OPS[op](lv, rv)
            return None if res is None else ("int", wrap_int(res))
        if op in _CMP_OPS:
            return "bool", _CMP_OPS[op](lv, rv)
    if lk == "bool" and rk == "bool":
        if op in ("&&", "&"):
            return "bool", lv and rv
        if op in ("||", "|"):
            return "bool", lv or rv
        if op in ("==", "!="):
            return "bool", (lv == rv) == (op == "==")
        if op == "^":
            return "bool", lv != rv
    return None


_CASTS = {
    "(int)": lambda v: wrap_int(v),
    "(long)": lambda v: v,
    "(short)": lambda v: ((v + 0x8000) & 0xFFFF) - 0x8000,
    "(byte)": lambda v: ((v + 0x80) & 0xFF) - 0x80,
    "(char)": lambda v: v & 0xFFFF,
}


def fold_unary(op: str, operand: tuple) -> Optional[tuple]:
    kind, value = operand
    if kind == "int":
        if op == "-":
            return "int", wrap_int(-value)
        if op == "+":
            return operand
        if op == "~":
            return "int", wrap_int(~value)
        if op in _CASTS:
            return "int", _CASTS[op](value)
    if kind == "bool" and op == "!":
        return "bool", not value
    if op.startswith("(") and op not in _CASTS and op not in ("(float)", "(double)"):
        return operand
    return None


@dataclass
class ConstPropStats:
    visits: int = 0
    budget_exceeded: bool = False
    depth_exceeded: bool = False
    passes: int = 0


class ConstProp:
    """Demand-driven constant values over a ProgramIr.

    ``kb`` supplies named library constants (``Cipher.ENCRYPT_MODE``); it is
    optional so the analysis can run on plain programs.
    """

    def __init__(self, ir: ProgramIr, kb=None, context_depth: int = DEFAULT_K, budget: int = DEFAULT_BUDGET):
        if context_depth < 0:
            raise ValueError("context depth must be >= 0")
        if budget <= 0:
            raise ValueError("budget must be positive")
        self.ir = ir
        self.k = context_depth
        self.budget = budget
        self.constants = dict(kb.constants) if kb is not None else {}
        self.stats = ConstPropStats()
        self._final: dict = {}
        self._tentative: dict = {}
        self._pass: dict = {}
        self._stack: set = set()
        self._stale: list = []
        self._depth = 0
        self._assigned_fields = self._find_assigned_fields()

    def _find_assigned_fields(self) -> set:
        out = set()
        syms = self.ir.symbols
        for info in self.ir.methods.values():
            for node in info.ref.body.walk():
                if node.kind is Kind.ASSIGN:
                    sym = syms.bindings.get(node.children[0])
                    if sym is not None and sym.is_field:
                        out.add(sym)
        return out

    # -- public queries ------------------------------------------------------

    def value(self, expr: AstNode, ctx: Context = EMPTY) -> ConstValue:
        """Value of ``expr`` in calling context ``ctx`` of its method."""
        return self._query(("expr", expr, ctx))

    def arg_values(self, call: AstNode, ctx: Context = EMPTY) -> list[ConstValue]:
        return [self.value(a, ctx) for a in call.args]

    def param_value(self, method_id: str, index: int, ctx: Context = EMPTY) -> ConstValue:
        return self._query(("param", method_id, index, ctx))

    def return_value(self, method_id: str, ctx: Context = EMPTY) -> ConstValue:
        return self._query(("ret", method_id, ctx))

    def push(self, ctx: Context, site: AstNode) -> Context:
        return push(ctx, site, self.k)

    # -- fixpoint driver -----------------------------------------------------

    def _query(self, key) -> ConstValue:
        if key in self._final:
            return self._final[key]
        old_limit = sys.getrecursionlimit()
        if old_limit < 20000:
            sys.setrecursionlimit(20000)
        try:
            while True:
                self.stats.passes += 1
                self._pass = {}
                self._stale = []
                value = self._get(key)
                if all(self._tentative.get(k, ConstValue.bottom()).same_value(v) for k, v in self._stale):
                    break
            self._final.update(self._pass)
            self._tentative = {}
            return value
        finally:
            sys.setrecursionlimit(old_limit)

    def _get(self, key) -> ConstValue:
        if key in self._final:
            return self._final[key]
        if key in self._pass:
            return self._pass[key]
        if key in self._stack:
            seen = self._tentative.get(key, ConstValue.bottom())
            self._stale.append((key, seen))
            return seen
        if self._depth >= MAX_DEPTH:
            self.stats.depth_exceeded = True
            return ConstValue.unknown(BUDGET, self._key_locations(key))
        self._stack.add(key)
        self._depth += 1
        try:
            new = self._compute(key)
        finally:
            self._depth -= 1
            self._stack.discard(key)
        merged = self._tentative.get(key, ConstValue.bottom()).join(new)
        self._tentative[key] = merged
        self._pass[key] = merged
        return merged

    def _key_locations(self, key) -> list[Location]:
        for part in key[1:]:
            if isinstance(part, AstNode):
                return [part.location]
        return []

    def _compute(self, key) -> ConstValue:
        self.stats.visits += 1
        if self.stats.visits > self.budget:
            self.stats.budget_exceeded = True
            return ConstValue.unknown(BUDGET, self._key_locations(key))
        tag = key[0]
        if tag == "expr":
            return self._eval(key[1], key[2])
        if tag == "def":
            return self._definition(key[1], key[2])
        if tag == "param":
            return self._param(key[1], key[2], key[3])
        if tag == "ret":
            return self._return(key[1], key[2])
        if tag == "field":
            return self._field(key[1])
        raise KeyError(tag)

    # -- key computations ----------------------------------------------------

    def _definition(self, stmt: AstNode, ctx: Context) -> ConstValue:
        kind = stmt.kind
        if kind is Kind.LOCAL_VAR_DECL:
            return self._get(("expr", stmt.children[0], ctx))
        if kind is Kind.ASSIGN:
            if stmt.op == "=":
                return self._get(("expr", stmt.children[1], ctx))
            old = self._get(("expr", stmt.children[0], ctx))
            if stmt.op in ("++", "--"):
                rhs = ConstValue.constant("int", 1, stmt.location)
                op = stmt.op[0]
            else:
                rhs = self._get(("expr", stmt.children[1], ctx))
                op = stmt.op[:-1]
            return self._combine(op, old, rhs, stmt.location)
        return ConstValue.unknown(NON_CONSTANT, [stmt.location])

    def _param(self, method_id: str, index: int, ctx: Context) -> ConstValue:
        graph = self.ir.call_graph
        info = self.ir.methods.get(method_id)
        where = [info.params[index].decl_site] if info is not None and index < len(info.params) else []
        if ctx:
            edge = graph.by_site.get(ctx[-1])
            if edge is None or edge.callee != method_id or index >= len(ctx[-1].args):
                return ConstValue.unknown(NON_CONSTANT, where)
            return self._get(("expr", ctx[-1].args[index], ctx[:-1]))
        values = []
        for edge in graph.callers_of.get(method_id, ()):
            if edge.call not in self.ir.stmt_of and self.ir.method_of.get(edge.call) is not None:
                continue  # call site in dead code
            if index < len(edge.call.args):
                values.append(self._get(("expr", edge.call.args[index], EMPTY)))
        if not values:
            return ConstValue.unknown(EXTERNAL_INPUT, where)
        return join_all(values)

    def _return(self, method_id: str, ctx: Context) -> ConstValue:
        info = self.ir.methods.get(method_id)
        if info is None:
            return ConstValue.unknown(EXTERNAL_INPUT)
        values = [
            self._get(("expr", stmt.children[0], ctx))
            for stmt in info.cfg.statements
            if stmt.kind is Kind.RETURN and stmt.children
        ]
        if not values:
            return ConstValue.unknown(NON_CONSTANT, [info.ref.decl.location])
        return join_all(values)

    def _field(self, sym: Symbol) -> ConstValue:
        decl = self.ir.symbols.field_decls.get(sym)
        if decl is None or not decl.is_final or not decl.children or sym in self._assigned_fields:
            return ConstValue.unknown(EXTERNAL_INPUT, [sym.decl_site])
        return self._get(("expr", decl.children[0], EMPTY))

    # -- expressions -----------------------------------------------------------

    def _combine(self, op: str, left: ConstValue, right: ConstValue, at: Location) -> ConstValue:
        if left.is_bottom or right.is_bottom:
            return ConstValue.bottom()
        if left.is_unknown or right.is_unknown:
            reason = left.reason if left.is_unknown else right.reason
            return ConstValue.unknown(reason or NON_CONSTANT, left.provenance | right.provenance)
        out = []
        for lp in left.values:
            for rp in right.values:
                res = fold_binary(op, lp, rp)
                if res is None:
                    return ConstValue.unknown(NON_CONSTANT, left.provenance | right.provenance | {at})
                out.append(res)
        return ConstValue.of(out, left.provenance | right.provenance)

    def _use(self, node: AstNode, sym: Symbol, ctx: Context) -> ConstValue:
        stmt = self.ir.stmt_of.get(node)
        method_id = self.ir.method_of.get(node)
        if stmt is None or method_id is None:
            return ConstValue.unknown(NON_CONSTANT, [node.location])
        info = self.ir.methods[method_id]
        values = []
        for d in info.defuse.reaching(stmt, sym):
            if d is ENTRY_DEF:
                if sym.storage is Storage.PARAM:
                    values.append(self._get(("param", method_id, info.params.index(sym), ctx)))
                else:
                    values.append(ConstValue.unknown(NON_CONSTANT, [node.location]))
            else:
                values.append(self._get(("def", d, ctx)))
        if not values:
            return ConstValue.unknown(NON_CONSTANT, [node.location])
        return join_all(values)

    def _eval(self, expr: AstNode, ctx: Context) -> ConstValue:
        kind = expr.kind
        loc = expr.location
        if kind is Kind.STRING_LIT:
            return ConstValue.constant("string", expr.value, loc)
        if kind is Kind.INT_LIT:
            return ConstValue.constant("int", expr.value, loc)
        if kind is Kind.BOOL_LIT:
            return ConstValue.constant("bool", expr.value, loc)
        if kind is Kind.NULL_LIT:
            return ConstValue.constant("null", None, loc)
        syms = self.ir.symbols
        if kind in (Kind.IDENTIFIER, Kind.FIELD_ACCESS):
            sym = syms.bindings.get(expr)
            if sym is not None:
                if sym.is_field:
                    return self._get(("field", sym))
                return self._use(expr, sym, ctx)
            qualified = syms.static_refs.get(expr)
            if qualified is not None and qualified in self.constants:
                value = self.constants[qualified]
                vkind = "bool" if isinstance(value, bool) else "int" if isinstance(value, int) else "string"
                return ConstValue.constant(vkind, value, loc)
            return ConstValue.unknown(EXTERNAL_INPUT, [loc])
        if kind is Kind.BINARY_OP:
            left = self._get(("expr", expr.children[0], ctx))
            right = self._get(("expr", expr.children[1], ctx))
            return self._combine(expr.op, left, right, loc)
        if kind is Kind.UNARY_OP:
            inner = self._get(("expr", expr.children[0], ctx))
            return inner.map(lambda k, v: fold_unary(expr.op, (k, v)), [loc])
        if kind is Kind.ARRAY_CREATION:
            return self._array(expr, ctx)
        if kind is Kind.METHOD_CALL:
            return self._call(expr, ctx)
        if kind is Kind.ASSIGN:
            return self._definition(expr, ctx)
        return ConstValue.unknown(NON_CONSTANT, [loc])

    def _array(self, expr: AstNode, ctx: Context) -> ConstValue:
        loc = expr.location
        if expr.op != "init" or expr.type_name not in ("byte", "char"):
            return ConstValue.unknown(NON_CONSTANT, [loc])
        elems = [self._get(("expr", c, ctx)) for c in expr.children]
        if not all(e.is_constant and e.kind == "int" for e in elems):
            return ConstValue.unknown(NON_CONSTANT, [loc])
        prov = {loc}
        for e in elems:
            prov |= e.provenance
        if expr.type_name == "byte":
            return ConstValue.of([("bytes", bytes(e.value & 0xFF for e in elems))], prov)
        return ConstValue.of([("chars", "".join(chr(e.value & 0xFFFF) for e in elems))], prov)

    def _call(self, call: AstNode, ctx: Context) -> ConstValue:
        loc = call.location
        edge = self.ir.call_graph.by_site.get(call)
        if edge is not None and edge.callee is not None:
            return self._get(("ret", edge.callee, self.push(ctx, call)))
        receiver = call.receiver
        if receiver is not None and call.name in ("getBytes", "toCharArray"):
            if call.name == "toCharArray" and call.args:
                return ConstValue.unknown(EXTERNAL_INPUT, [loc])
            base = self._get(("expr", receiver, ctx))

            def convert(k: str, v: object):
                if k != "string":
                    return None
                if call.name == "getBytes":
                    return "bytes", v.encode("utf-8")
                return "chars", v

            return base.map(convert, [loc])
        return ConstValue.unknown(EXTERNAL_INPUT, [loc])


def enumerate_contexts(ir: ProgramIr, method_id: str, k: int, max_contexts: int = 64) -> tuple[list[Context], bool]:
    """Maximal call strings (length ≤ k) reaching ``method_id``.

    Walks callers upward from the method; a string ends when it reaches
    length k or a method without live callers. When more than
    ``max_contexts`` strings exist the first ``max_contexts - 1`` are kept
    and the empty context (the join of every caller) stands for the rest;
    the second result is True in that case.
    """
    if k <= 0:
        return [EMPTY], False
    results: list[Context] = []
    overflow = False
    graph = ir.call_graph

    def up(mid: str, suffix: Context) -> None:
        nonlocal overflow
        if overflow:
            return
        if len(suffix) >= k:
            results.append(suffix)
        else:
            callers = [
                e for e in graph.callers_of.get(mid, ())
                if e.call in ir.stmt_of or ir.method_of.get(e.call) is None
            ]
            if not callers:
                results.append(suffix)
            for e in callers:
                up(e.caller, (e.call,) + suffix)
                if overflow:
                    return
        if len(results) > max_contexts:
            overflow = True

    up(method_id, EMPTY)
    if overflow:
        return results[: max_contexts - 1] + [EMPTY], True
    return results, False


@dataclass
class PropagationResult:
    values: dict = field(default_factory=dict)  # (call node, context) -> list[ConstValue]
    stats: Optional[ConstPropStats] = None


def propagate(ir: ProgramIr, kb, context_depth: int = DEFAULT_K, budget: int = DEFAULT_BUDGET,
              max_contexts: int = 64) -> tuple[ConstProp, PropagationResult]:
    """Argument values of every KB-matched call, per enumerated context."""
    from .kb import match_call_site

    cp = ConstProp(ir, kb, context_depth, budget)
    result = PropagationResult(stats=cp.stats)
    for info, _stmt, call in ir.calls():
        if match_call_site(call, ir.symbols, kb) is None:
            continue
        contexts, _ = enumerate_contexts(ir, info.id, context_depth, max_contexts)
        for ctx in contexts:
            result.values[(call, ctx)] = cp.arg_values(call, ctx)
    return cp, result
