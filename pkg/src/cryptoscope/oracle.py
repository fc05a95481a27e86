"""Brute-force reference analyses for the test-suite.

Everything here works by enumerating CFG paths (loops unrolled a bounded
number of times) and executing literal arithmetic along each path. It
deliberately shares no code with constant propagation or the slicer; it
reads only the AST, the CFG and the call graph. Slow by design.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .frontend import AstNode, Kind
from .ir import ENTRY, EXIT, Cfg, ProgramIr
from .ir.cfg import LOOP_BACK

DEFAULT_UNROLL = 2
DEFAULT_MAX_PATHS = 20_000


class PathBudgetExceeded(Exception):
    """More paths than allowed."""


class NonLiteralEncountered(Exception):
    """A value could not be derived from literals alone."""


class _Unknown:
    def __repr__(self) -> str:
        return "UNKNOWN"


UNKNOWN = _Unknown()
ENTRY_VALUE = "ENTRY"  # pseudo-definition for a variable's value on method entry


# -- paths -------------------------------------------------------------------------------

def enumerate_paths(cfg: Cfg, max_paths: int = DEFAULT_MAX_PATHS, unroll: int = DEFAULT_UNROLL) -> list[tuple[int, ...]]:
    """Every entry-to-exit node sequence taking each loop back edge at most ``unroll`` times."""
    paths: list[tuple[int, ...]] = []
    back_counts: dict[tuple[int, int], int] = {}
    path = [ENTRY]

    def walk(node: int) -> None:
        if node == EXIT:
            paths.append(tuple(path))
            if len(paths) > max_paths:
                raise PathBudgetExceeded(f"more than {max_paths} paths in {cfg.method_id}")
            return
        for edge in cfg.succ[node]:
            key = (edge.src, edge.dst)
            back = edge.label == LOOP_BACK
            if back:
                if back_counts.get(key, 0) >= unroll:
                    continue
                back_counts[key] = back_counts.get(key, 0) + 1
            path.append(edge.dst)
            walk(edge.dst)
            path.pop()
            if back:
                back_counts[key] -= 1

    walk(ENTRY)
    return paths


# -- names read and written ------------------------------------------------------------------

def local_names(method_decl: AstNode) -> frozenset:
    """Names of parameters and locals declared in a method."""
    names = set()
    for node in method_decl.walk():
        if node.kind in (Kind.PARAM, Kind.LOCAL_VAR_DECL) and node.name:
            names.add(node.name)
    return frozenset(names)


def _exprs(stmt: AstNode) -> tuple[AstNode, ...]:
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


def defined_name(stmt: AstNode, locals_: frozenset) -> Optional[str]:
    if stmt.kind is Kind.LOCAL_VAR_DECL:
        return stmt.name if stmt.children else None
    if stmt.kind is Kind.PARAM:
        return stmt.name
    if stmt.kind is Kind.ASSIGN:
        target = stmt.children[0]
        if target.kind is Kind.IDENTIFIER and target.name in locals_:
            return target.name
    return None


def used_names(stmt: AstNode, locals_: frozenset) -> list[tuple[AstNode, str]]:
    skip = stmt.children[0] if stmt.kind is Kind.ASSIGN and stmt.op == "=" else None
    out = []
    for expr in _exprs(stmt):
        for node in expr.walk():
            if node is not skip and node.kind is Kind.IDENTIFIER and node.name in locals_:
                out.append((node, node.name))
    return out


def path_reaching_defs(cfg: Cfg, method_decl: AstNode, paths: Iterable[tuple[int, ...]]) -> dict:
    """(use node, name) -> definitions seen last on some path: statements or ``ENTRY_VALUE``."""
    locals_ = local_names(method_decl)
    out: dict[tuple[AstNode, str], set] = {}
    for path in paths:
        last: dict[str, object] = {}
        for i in path:
            stmt = cfg.nodes[i]
            if stmt is None:
                continue
            for node, name in used_names(stmt, locals_):
                out.setdefault((node, name), set()).add(last.get(name, ENTRY_VALUE))
            name = defined_name(stmt, locals_)
            if name is not None:
                last[name] = stmt
    return {k: frozenset(v) for k, v in out.items()}


# -- literal interpretation ---------------------------------------------------------------

def _wrap(v: int) -> int:
    v &= 0xFFFFFFFF
    return v - 0x100000000 if v >= 0x80000000 else v


def _to_string(v) -> Optional[str]:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (str, int)) and not isinstance(v, _Chars):
        return str(v)
    if v is None:
        return "null"
    return None


class _Chars(str):
    """A char[] value; kept apart from strings so concatenation refuses it."""


def _binary(op: str, a, b):
    if op == "+" and (type(a) is str or type(b) is str):
        sa, sb = _to_string(a), _to_string(b)
        if sa is None or sb is None:
            raise NonLiteralEncountered("array in concatenation")
        return sa + sb
    if type(a) is int and type(b) is int:
        if op == "+":
            return _wrap(a + b)
        if op == "-":
            return _wrap(a - b)
        if op == "*":
            return _wrap(a * b)
        if op in ("/", "%"):
            if b == 0:
                raise NonLiteralEncountered("division by zero")
            q = int(a / b)
            return _wrap(q) if op == "/" else _wrap(a - b * q)
        if op == "<<":
            return _wrap(a << (b & 31))
        if op == ">>":
            return _wrap(a >> (b & 31))
        if op == ">>>":
            return _wrap((a & 0xFFFFFFFF) >> (b & 31))
        if op == "&":
            return _wrap(a & b)
        if op == "|":
            return _wrap(a | b)
        if op == "^":
            return _wrap(a ^ b)
        cmp = {"<": a < b, ">": a > b, "<=": a <= b, ">=": a >= b, "==": a == b, "!=": a != b}
        if op in cmp:
            return cmp[op]
    if type(a) is bool and type(b) is bool:
        if op in ("&&", "&"):
            return a and b
        if op in ("||", "|"):
            return a or b
        if op == "==":
            return a == b
        if op in ("!=", "^"):
            return a != b
    raise NonLiteralEncountered(f"operator {op} on {type(a).__name__}, {type(b).__name__}")


def _unary(op: str, a):
    if type(a) is int:
        if op == "-":
            return _wrap(-a)
        if op == "+":
            return a
        if op == "~":
            return _wrap(~a)
        if op == "(int)":
            return _wrap(a)
        if op == "(long)":
            return a
        if op == "(byte)":
            return ((a + 128) & 0xFF) - 128
        if op == "(short)":
            return ((a + 0x8000) & 0xFFFF) - 0x8000
        if op == "(char)":
            return a & 0xFFFF
    if type(a) is bool and op == "!":
        return not a
    if op.startswith("(") and op not in ("(float)", "(double)") and type(a) is not int:
        return a  # reference casts
    raise NonLiteralEncountered(f"unary {op}")


@dataclass
class OracleTrace:
    """One executed path: the statements in order and the variable values before each."""

    path: tuple[AstNode, ...]
    env: dict  # final environment: name -> value or UNKNOWN
    before: list[dict] = field(default_factory=list)  # environment before each statement of ``path``
    returns: list = field(default_factory=list)


class Oracle:
    """Path-by-path literal interpreter over a ProgramIr.

    ``constants`` maps qualified library constants (``javax.crypto.Cipher.ENCRYPT_MODE``)
    to values; they are looked up by the dotted suffix written in the source.
    """

    def __init__(self, ir: ProgramIr, constants: Optional[dict] = None, unroll: int = DEFAULT_UNROLL,
                 max_paths: int = DEFAULT_MAX_PATHS, call_depth: int = 4):
        self.ir = ir
        self.constants = dict(constants or {})
        self.unroll = unroll
        self.max_paths = max_paths
        self.call_depth = call_depth
        self._paths: dict[str, list] = {}
        self._traces: dict[tuple, list] = {}
        self._active: set = set()  # (method id, call path) pairs being interpreted
        self._assigned = self._assigned_field_names()

    def _assigned_field_names(self) -> set:
        out = set()
        for info in self.ir.methods.values():
            locals_ = local_names(info.ref.decl)
            for node in info.ref.body.walk():
                if node.kind is Kind.ASSIGN:
                    target = node.children[0]
                    if target.kind is Kind.IDENTIFIER and target.name not in locals_:
                        out.add((info.ref.class_name, target.name))
                    elif target.kind is Kind.FIELD_ACCESS:
                        out.add((None, target.name))
        return out

    def paths(self, method_id: str) -> list[tuple[int, ...]]:
        if method_id not in self._paths:
            self._paths[method_id] = enumerate_paths(self.ir.methods[method_id].cfg, self.max_paths, self.unroll)
        return self._paths[method_id]

    # -- execution -----------------------------------------------------------------------

    def interpret_path(self, method_id: str, call_path: tuple = (), literals_only: bool = False) -> list[OracleTrace]:
        """Execute every bounded path of a method.

        ``call_path`` is the chain of call sites (outermost first) through
        which the method is entered; the last site calls ``method_id``.
        Parameters take the argument values of that chain, or UNKNOWN when
        the chain is empty. With ``literals_only`` an UNKNOWN value raises
        NonLiteralEncountered instead.
        """
        key = (method_id, tuple(call_path), literals_only)
        if key in self._traces:
            return self._traces[key]
        if key[:2] in self._active:
            # the caller replay reached this same call again; its value is not literal
            raise NonLiteralEncountered(f"recursive evaluation of {method_id}")
        self._active.add(key[:2])
        try:
            info = self.ir.methods[method_id]
            names = [p.name for p in info.ref.param_nodes]
            traces = []
            for args in self._arg_tuples(method_id, tuple(call_path), len(names)):
                env0 = dict(zip(names, args))
                for path in self.paths(method_id):
                    traces.append(self._run(info, path, dict(env0), tuple(call_path), literals_only))
        finally:
            self._active.discard(key[:2])
        self._traces[key] = traces
        return traces

    def _arg_tuples(self, method_id: str, call_path: tuple, arity: int) -> list[tuple]:
        if not call_path:
            return [(UNKNOWN,) * arity]
        if arity == 0:
            return [()]
        site = call_path[-1]
        edge = self.ir.call_graph.by_site.get(site)
        if edge is None or edge.callee != method_id:
            return [(UNKNOWN,) * arity]
        caller = self.ir.method_of.get(site)
        if caller is None or len(call_path) > self.call_depth + 1:
            return [(UNKNOWN,) * arity]
        out = []
        for trace in self.interpret_path(caller, call_path[:-1]):
            for stmt, env in zip(trace.path, trace.before):
                if self._contains(stmt, site):
                    out.append(tuple(self._eval_safe(a, env, caller, call_path[:-1]) for a in site.args))
        return list(dict.fromkeys(out)) or [(UNKNOWN,) * arity]

    @staticmethod
    def _contains(stmt: AstNode, node: AstNode) -> bool:
        return any(n is node for e in _exprs(stmt) for n in e.walk())

    def _run(self, info, path, env, call_path, literals_only) -> OracleTrace:
        locals_ = local_names(info.ref.decl)
        stmts, before, returns = [], [], []
        for i in path:
            stmt = info.cfg.nodes[i]
            if stmt is None:
                continue
            stmts.append(stmt)
            before.append(dict(env))
            kind = stmt.kind
            if kind is Kind.LOCAL_VAR_DECL:
                env[stmt.name] = self._eval_safe(stmt.children[0], env, info.id, call_path) if stmt.children else UNKNOWN
            elif kind is Kind.PARAM:
                env[stmt.name] = UNKNOWN
            elif kind is Kind.ASSIGN:
                self._assign(stmt, env, locals_, info.id, call_path)
            elif kind is Kind.RETURN and stmt.children:
                returns.append(self._eval_safe(stmt.children[0], env, info.id, call_path))
            if literals_only and any(v is UNKNOWN for v in env.values()):
                raise NonLiteralEncountered(f"non-literal value at {stmt.location.short()}")
        return OracleTrace(tuple(stmts), env, before, returns)

    def _assign(self, stmt, env, locals_, method_id, call_path) -> None:
        target = stmt.children[0]
        if target.kind is not Kind.IDENTIFIER or target.name not in locals_:
            return
        name = target.name
        try:
            if stmt.op == "=":
                env[name] = self.eval(stmt.children[1], env, method_id, call_path)
            elif stmt.op in ("++", "--"):
                env[name] = _binary(stmt.op[0], self._need(env.get(name, UNKNOWN)), 1)
            else:
                rhs = self.eval(stmt.children[1], env, method_id, call_path)
                env[name] = _binary(stmt.op[:-1], self._need(env.get(name, UNKNOWN)), self._need(rhs))
        except NonLiteralEncountered:
            env[name] = UNKNOWN

    @staticmethod
    def _need(v):
        if v is UNKNOWN:
            raise NonLiteralEncountered("unknown operand")
        return v

    def _eval_safe(self, expr, env, method_id, call_path):
        try:
            return self.eval(expr, env, method_id, call_path)
        except NonLiteralEncountered:
            return UNKNOWN

    def eval(self, expr: AstNode, env: dict, method_id: str, call_path: tuple = ()):
        """Value of ``expr`` under ``env``; raises NonLiteralEncountered when not literal."""
        kind = expr.kind
        if kind in (Kind.STRING_LIT, Kind.INT_LIT, Kind.BOOL_LIT, Kind.NULL_LIT):
            return expr.value
        if kind is Kind.IDENTIFIER:
            if expr.name in env:
                return self._need(env[expr.name])
            if expr.name in local_names(self.ir.methods[method_id].ref.decl):
                raise NonLiteralEncountered(f"unset local {expr.name}")
            return self._field(self.ir.methods[method_id].ref.class_name, expr.name)
        if kind is Kind.FIELD_ACCESS:
            return self._field_access(expr, method_id)
        if kind is Kind.BINARY_OP:
            a = self.eval(expr.children[0], env, method_id, call_path)
            b = self.eval(expr.children[1], env, method_id, call_path)
            return _binary(expr.op, a, b)
        if kind is Kind.UNARY_OP:
            return _unary(expr.op, self.eval(expr.children[0], env, method_id, call_path))
        if kind is Kind.ARRAY_CREATION and expr.op == "init" and expr.type_name in ("byte", "char"):
            items = [self.eval(c, env, method_id, call_path) for c in expr.children]
            if not all(type(v) is int for v in items):
                raise NonLiteralEncountered("array element")
            if expr.type_name == "byte":
                return bytes(v & 0xFF for v in items)
            return _Chars("".join(chr(v & 0xFFFF) for v in items))
        if kind is Kind.METHOD_CALL:
            return self._call(expr, env, method_id, call_path)
        raise NonLiteralEncountered(f"{kind.value} at {expr.location.short()}")

    def _call(self, call: AstNode, env: dict, method_id: str, call_path: tuple):
        edge = self.ir.call_graph.by_site.get(call)
        if edge is not None and edge.callee is not None:
            if len(call_path) >= self.call_depth:
                raise NonLiteralEncountered("call depth")
            values = set()
            for trace in self.interpret_path(edge.callee, call_path + (call,)):
                values.update(trace.returns)
            if len(values) != 1 or UNKNOWN in values:
                raise NonLiteralEncountered(f"return of {edge.callee}")
            return values.pop()
        receiver = call.receiver
        if receiver is not None and not call.args and call.name in ("getBytes", "toCharArray"):
            base = self.eval(receiver, env, method_id, call_path)
            if type(base) is not str:
                raise NonLiteralEncountered("conversion of a non-string")
            return base.encode("utf-8") if call.name == "getBytes" else _Chars(base)
        raise NonLiteralEncountered(f"library call {call.name}")

    def _field(self, class_name: Optional[str], name: str):
        info = self.ir.symbols.classes.get(class_name) if class_name else None
        if info is None:
            raise NonLiteralEncountered(f"field {name}")
        for node in info.decl.children:
            if node.kind is Kind.FIELD_DECL and node.name == name:
                if not node.is_final or not node.children or (class_name, name) in self._assigned \
                        or (None, name) in self._assigned:
                    raise NonLiteralEncountered(f"mutable field {name}")
                return self._field_init(node.children[0], class_name)
        raise NonLiteralEncountered(f"field {name}")

    def _field_init(self, expr: AstNode, class_name: str):
        # initializers only see other fields of the class
        methods = [m for m in self.ir.methods.values() if m.ref.class_name == class_name]
        if not methods:
            raise NonLiteralEncountered("initializer without method context")
        return self.eval(expr, {}, methods[0].id, ())

    def _field_access(self, expr: AstNode, method_id: str):
        dotted = expr.text.replace(" ", "")
        if dotted.startswith("this."):
            return self._field(self.ir.methods[method_id].ref.class_name, expr.name)
        for qualified, value in self.constants.items():
            if qualified == dotted or qualified.endswith("." + dotted):
                return value
        owner = dotted.rpartition(".")[0]
        for class_name in self.ir.symbols.classes:
            if class_name == owner or class_name.endswith("." + owner):
                return self._field(class_name, expr.name)
        raise NonLiteralEncountered(f"field access {dotted}")

    # -- queries ------------------------------------------------------------------------

    def complete_call_paths(self, call_path: tuple) -> Optional[list[tuple]]:
        """Full call chains (starting in a method nobody calls) that end with ``call_path``.

        A k-limited context stands for every chain with that suffix. None when
        the chains cannot be bounded by ``call_depth`` (recursion).
        """
        if not call_path:
            return [()]
        out: list[tuple] = []
        todo = [tuple(call_path)]
        while todo:
            path = todo.pop()
            outer = self.ir.method_of.get(path[0])
            callers = [e.call for e in self.ir.call_graph.callers_of.get(outer, ())] if outer else []
            if not callers:
                out.append(path)
                continue
            if len(path) > self.call_depth:
                return None
            todo.extend((site,) + path for site in callers)
        return sorted(out, key=lambda p: [n.location for n in p])

    def values_at(self, expr: AstNode, call_path: tuple = ()) -> Optional[frozenset]:
        """Every value ``expr`` takes over all paths, or None when some path is not literal.

        A non-empty ``call_path`` is completed to every full chain it is a
        suffix of, and the values of all of them are collected.
        """
        chains = self.complete_call_paths(tuple(call_path))
        if chains is None:
            return None
        values: set = set()
        for chain in chains:
            found = self._values_on_chain(expr, chain)
            if found is None:
                return None
            values |= found
        return frozenset(values)

    def _values_on_chain(self, expr: AstNode, call_path: tuple) -> Optional[frozenset]:
        method_id = self.ir.method_of.get(expr)
        stmt = self.ir.stmt_of.get(expr)
        if method_id is None or stmt is None:
            return None
        values = set()
        seen = False
        for trace in self.interpret_path(method_id, call_path):
            for s, env in zip(trace.path, trace.before):
                if s is not stmt:
                    continue
                seen = True
                v = self._eval_safe(expr, env, method_id, call_path)
                if v is UNKNOWN:
                    return None
                values.add(v)
        return frozenset(values) if seen else None


def as_pair(value) -> tuple[str, object]:
    """Oracle value to the (kind, value) pairs used by the analyses."""
    if isinstance(value, bool):
        return "bool", value
    if isinstance(value, int):
        return "int", value
    if isinstance(value, bytes):
        return "bytes", value
    if isinstance(value, _Chars):
        return "chars", str(value)
    if value is None:
        return "null", None
    return "string", value

