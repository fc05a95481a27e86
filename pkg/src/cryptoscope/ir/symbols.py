"""Name and declared-type resolution over parsed compilation units."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional

from ..frontend import AstNode, Kind, Location, SubjectProject

PRIMITIVES = frozenset({"boolean", "byte", "char", "short", "int", "long", "float", "double", "void"})
JAVA_LANG = frozenset(
    {"String", "Object", "Integer", "Long", "Short", "Byte", "Character", "Boolean", "System",
     "Math", "StringBuilder", "Exception", "RuntimeException", "Throwable", "Error", "Thread",
     "Iterable", "CharSequence", "Number", "Class", "Void"}
)


class Storage(str, Enum):
    LOCAL = "Local"
    PARAM = "Param"
    FIELD = "Field"
    STATIC_FIELD = "StaticField"


@dataclass(frozen=True)
class Symbol:
    name: str
    declared_type: str
    decl_site: Location
    storage: Storage
    owner: str  # method id for locals/params, class name for fields

    @property
    def is_field(self) -> bool:
        return self.storage in (Storage.FIELD, Storage.STATIC_FIELD)

    def __repr__(self) -> str:
        return f"<{self.storage.value} {self.name}: {self.declared_type} @{self.decl_site.short()}>"


@dataclass(frozen=True)
class MethodRef:
    id: str
    class_name: str
    name: str
    decl: AstNode
    file: str
    param_types: tuple[str, ...]
    return_type: Optional[str]
    is_static: bool

    @property
    def arity(self) -> int:
        return len(self.param_types)

    @property
    def body(self) -> AstNode:
        return self.decl.children[-1]

    @property
    def param_nodes(self) -> tuple[AstNode, ...]:
        return self.decl.children[:-1]


@dataclass
class FileScope:
    path: str
    package: str = ""
    imports: dict[str, str] = field(default_factory=dict)  # simple -> qualified
    wildcards: list[str] = field(default_factory=list)


@dataclass
class ClassInfo:
    qualified_name: str
    name: str
    file: str
    decl: AstNode
    fields: dict[str, Symbol] = field(default_factory=dict)
    methods: list[MethodRef] = field(default_factory=list)


@dataclass
class Unresolved:
    location: Location
    name: str


ReturnTypeHook = Callable[[str, str, int], Optional[str]]


@dataclass
class SymbolTable:
    """Resolution facts for the whole project.

    ``bindings`` maps Identifier/FieldAccess nodes to variables; ``type_refs``
    maps nodes that name a type (static receivers) to the qualified type;
    ``static_refs`` holds qualified ``Type.FIELD`` accesses on non-project types.
    """

    classes: dict[str, ClassInfo] = field(default_factory=dict)
    scopes: dict[str, FileScope] = field(default_factory=dict)
    bindings: dict[AstNode, Symbol] = field(default_factory=dict)
    type_refs: dict[AstNode, str] = field(default_factory=dict)
    static_refs: dict[AstNode, str] = field(default_factory=dict)
    this_refs: dict[AstNode, str] = field(default_factory=dict)
    decl_symbols: dict[AstNode, Symbol] = field(default_factory=dict)
    field_decls: dict[Symbol, AstNode] = field(default_factory=dict)
    constant_fields: dict[Symbol, AstNode] = field(default_factory=dict)
    method_params: dict[str, tuple[Symbol, ...]] = field(default_factory=dict)
    methods: dict[str, MethodRef] = field(default_factory=dict)
    node_method: dict[AstNode, str] = field(default_factory=dict)
    node_class: dict[AstNode, str] = field(default_factory=dict)
    unresolved: list[Unresolved] = field(default_factory=list)
    known_types: frozenset = frozenset()
    external_return_type: Optional[ReturnTypeHook] = None

    # -- type names ----------------------------------------------------------

    def resolve_type(self, name: Optional[str], path: str) -> Optional[str]:
        if name is None:
            return None
        dims = ""
        while name.endswith("[]"):
            name, dims = name[:-2], dims + "[]"
        if name in PRIMITIVES:
            return name + dims
        scope = self.scopes.get(path) or FileScope(path)
        head, _, rest = name.partition(".")
        if rest:
            qualified_head = self._resolve_simple(head, scope)
            if qualified_head is not None and qualified_head != head:
                return f"{qualified_head}.{rest}{dims}"
            return name + dims
        resolved = self._resolve_simple(name, scope)
        return (resolved or name) + dims

    def _resolve_simple(self, name: str, scope: FileScope) -> Optional[str]:
        if name in scope.imports:
            return scope.imports[name]
        local = f"{scope.package}.{name}" if scope.package else name
        if local in self.classes:
            return local
        for prefix in scope.wildcards:
            cand = f"{prefix}.{name}"
            if cand in self.classes or cand in self.known_types:
                return cand
        if name in JAVA_LANG:
            return f"java.lang.{name}"
        matches = [q for q, c in self.classes.items() if c.name == name]
        if len(matches) == 1:
            return matches[0]
        return None

    def is_type_name(self, name: str, path: str) -> Optional[str]:
        scope = self.scopes.get(path) or FileScope(path)
        resolved = self._resolve_simple(name, scope)
        if resolved is not None:
            return resolved
        if name[:1].isupper() and not name.isupper():
            return name
        return None

    # -- method lookup -------------------------------------------------------

    def find_method(self, class_name: Optional[str], name: str, arity: int) -> Optional[MethodRef]:
        info = self.classes.get(class_name or "")
        if info is None:
            return None
        for ref in info.methods:
            if ref.name == name and ref.arity == arity:
                return ref
        return None

    def find_constructor(self, class_name: Optional[str], arity: int) -> Optional[MethodRef]:
        info = self.classes.get(class_name or "")
        if info is None:
            return None
        return self.find_method(class_name, info.name, arity)

    # -- expression typing ---------------------------------------------------

    def receiver_type(self, node: AstNode) -> tuple[Optional[str], bool]:
        """Declared type of ``node`` and whether it denotes the type itself."""
        if node in self.type_refs:
            return self.type_refs[node], True
        return self.expr_type(node), False

    def expr_type(self, node: AstNode) -> Optional[str]:
        kind = node.kind
        if kind in (Kind.IDENTIFIER, Kind.FIELD_ACCESS):
            if node in self.bindings:
                return self.bindings[node].declared_type
            if node in self.this_refs:
                return self.this_refs[node]
            return None
        if kind is Kind.STRING_LIT:
            return "java.lang.String"
        if kind is Kind.INT_LIT:
            return "int"
        if kind is Kind.BOOL_LIT:
            return "boolean"
        if kind is Kind.CONSTRUCTOR_CALL:
            return self.resolve_type(node.type_name, node.location.file_name)
        if kind is Kind.ARRAY_CREATION:
            elem = self.resolve_type(node.type_name, node.location.file_name)
            return f"{elem}[]"
        if kind is Kind.ARRAY_ACCESS:
            base = self.expr_type(node.children[0])
            return base[:-2] if base and base.endswith("[]") else None
        if kind is Kind.UNARY_OP:
            if node.op and node.op.startswith("("):
                return node.op[1:-1]
            return self.expr_type(node.children[0])
        if kind is Kind.BINARY_OP:
            if node.op in ("==", "!=", "<", ">", "<=", ">=", "&&", "||"):
                return "boolean"
            left, right = (self.expr_type(c) for c in node.children)
            if node.op == "+" and "java.lang.String" in (left, right):
                return "java.lang.String"
            return left if left == right else left or right
        if kind is Kind.METHOD_CALL:
            owner = self.call_owner(node)
            target = self.find_method(owner, node.name, len(node.args))
            if target is not None:
                return self.resolve_type(target.return_type, target.file)
            if owner and self.external_return_type is not None:
                return self.external_return_type(owner, node.name, len(node.args))
            return None
        return None

    def call_owner(self, call: AstNode) -> Optional[str]:
        """Declared type on which ``call`` is invoked (current class if implicit)."""
        if call.kind is Kind.CONSTRUCTOR_CALL:
            return self.resolve_type(call.type_name, call.location.file_name)
        receiver = call.receiver
        if receiver is None:
            return self.node_class.get(call)
        owner, _ = self.receiver_type(receiver)
        return owner


def _method_id(class_name: str, decl: AstNode, param_types: Iterable[str]) -> str:
    return f"{class_name}.{decl.name}({','.join(param_types)})"


class _Resolver:
    def __init__(self, table: SymbolTable):
        self.t = table

    def declare_classes(self, project: SubjectProject) -> None:
        for source in project.files:
            scope = FileScope(source.path)
            for child in source.unit.children:
                if child.kind is Kind.PACKAGE:
                    scope.package = child.name
                elif child.kind is Kind.IMPORT:
                    if child.name.endswith(".*"):
                        scope.wildcards.append(child.name[:-2])
                    else:
                        scope.imports[child.name.rsplit(".", 1)[-1]] = child.name
            self.t.scopes[source.path] = scope
            for child in source.unit.children:
                if child.kind is Kind.CLASS_DECL:
                    qname = f"{scope.package}.{child.name}" if scope.package else child.name
                    if qname not in self.t.classes:
                        self.t.classes[qname] = ClassInfo(qname, child.name, source.path, child)

    def declare_members(self) -> None:
        for qname, info in self.t.classes.items():
            for member in info.decl.children:
                if member.kind is Kind.FIELD_DECL:
                    storage = Storage.STATIC_FIELD if member.is_static else Storage.FIELD
                    sym = Symbol(member.name, self.t.resolve_type(member.type_name, info.file), member.location, storage, qname)
                    info.fields.setdefault(member.name, sym)
                    self.t.decl_symbols[member] = sym
                    self.t.field_decls[sym] = member
                    if member.is_static and member.is_final and member.children:
                        self.t.constant_fields[sym] = member.children[0]
                elif member.kind is Kind.METHOD_DECL:
                    params = member.children[:-1]
                    ptypes = tuple(self.t.resolve_type(p.type_name, info.file) for p in params)
                    ref = MethodRef(
                        _method_id(qname, member, ptypes), qname, member.name, member, info.file, ptypes,
                        member.type_name, member.is_static,
                    )
                    if ref.id in self.t.methods:
                        continue
                    info.methods.append(ref)
                    self.t.methods[ref.id] = ref

    def resolve_bodies(self) -> None:
        for info in self.t.classes.values():
            for member in info.decl.children:
                if member.kind is Kind.FIELD_DECL and member.children:
                    self.expr(member.children[0], [], info, None)
            for ref in info.methods:
                scopes: list[dict[str, Symbol]] = [{}]
                params = []
                for p in ref.param_nodes:
                    sym = Symbol(p.name, self.t.resolve_type(p.type_name, info.file), p.location, Storage.PARAM, ref.id)
                    scopes[0][p.name] = sym
                    self.t.decl_symbols[p] = sym
                    params.append(sym)
                self.t.method_params[ref.id] = tuple(params)
                self.stmt(ref.body, scopes, info, ref)

    # statements keep a scope stack; inner blocks push a new frame
    def stmt(self, node: AstNode, scopes: list[dict], info: ClassInfo, ref: Optional[MethodRef]) -> None:
        kind = node.kind
        if ref is not None:
            self.t.node_method[node] = ref.id
        self.t.node_class[node] = info.qualified_name
        if kind is Kind.BLOCK:
            scopes.append({})
            for child in node.children:
                self.stmt(child, scopes, info, ref)
            scopes.pop()
        elif kind is Kind.LOCAL_VAR_DECL:
            if node.children:
                self.expr(node.children[0], scopes, info, ref)
            sym = Symbol(node.name, self.t.resolve_type(node.type_name, info.file), node.location, Storage.LOCAL, ref.id)
            scopes[-1][node.name] = sym
            self.t.decl_symbols[node] = sym
        elif kind is Kind.FOR:
            scopes.append({})
            for slot, child in zip(node.slots, node.children):
                if slot == "cond":
                    self.expr(child, scopes, info, ref)
                else:
                    self.stmt(child, scopes, info, ref)
            scopes.pop()
        elif kind is Kind.TRY_CATCH:
            children = node.children
            self.stmt(children[0], scopes, info, ref)
            idx = 1
            while idx < len(children):
                child = children[idx]
                if child.kind is Kind.PARAM:
                    sym = Symbol(child.name, self.t.resolve_type(child.type_name, info.file), child.location, Storage.LOCAL, ref.id)
                    self.t.decl_symbols[child] = sym
                    self.t.node_method[child] = ref.id
                    scopes.append({child.name: sym})
                    self.stmt(children[idx + 1], scopes, info, ref)
                    scopes.pop()
                    idx += 2
                else:
                    self.stmt(child, scopes, info, ref)
                    idx += 1
        elif kind in (Kind.IF, Kind.WHILE):
            self.expr(node.children[0], scopes, info, ref)
            for child in node.children[1:]:
                self.stmt(child, scopes, info, ref)
        elif kind in (Kind.BREAK, Kind.CONTINUE):
            pass
        elif kind in (Kind.RETURN,):
            for child in node.children:
                self.expr(child, scopes, info, ref)
        else:
            self.expr(node, scopes, info, ref)

    def lookup(self, name: str, scopes: list[dict]) -> Optional[Symbol]:
        for frame in reversed(scopes):
            if name in frame:
                return frame[name]
        return None

    def expr(self, node: AstNode, scopes: list[dict], info: ClassInfo, ref: Optional[MethodRef]) -> None:
        if ref is not None:
            self.t.node_method[node] = ref.id
        self.t.node_class[node] = info.qualified_name
        kind = node.kind
        if kind is Kind.IDENTIFIER:
            self.identifier(node, scopes, info)
            return
        if kind is Kind.FIELD_ACCESS:
            self.field_access(node, scopes, info, ref)
            return
        for child in node.children:
            self.expr(child, scopes, info, ref)

    def identifier(self, node: AstNode, scopes: list[dict], info: ClassInfo) -> None:
        name = node.name
        if name == "this":
            self.t.this_refs[node] = info.qualified_name
            return
        sym = self.lookup(name, scopes)
        if sym is None:
            sym = info.fields.get(name)
        if sym is not None:
            self.t.bindings[node] = sym
            return
        as_type = self.t.is_type_name(name, info.file)
        if as_type is not None:
            self.t.type_refs[node] = as_type
            return
        self.t.unresolved.append(Unresolved(node.location, name))

    def field_access(self, node: AstNode, scopes: list[dict], info: ClassInfo, ref: Optional[MethodRef]) -> None:
        dotted = _dotted(node)
        base = node.children[0]
        if dotted is not None and self.lookup(dotted[0], scopes) is None and dotted[0] not in info.fields and dotted[0] != "this":
            # package-qualified names: javax.crypto.Cipher[.FIELD]
            for cut in range(len(dotted), 0, -1):
                cand = ".".join(dotted[:cut])
                if cand in self.t.classes or cand in self.t.known_types or (
                    cut > 1 and dotted[cut - 1][:1].isupper() and all(p[:1].islower() for p in dotted[:cut - 1])
                ):
                    self._mark_qualified(node, dotted, cut, cand, info)
                    return
        self.expr(base, scopes, info, ref)
        if base in self.t.this_refs:
            sym = info.fields.get(node.name)
            if sym is not None:
                self.t.bindings[node] = sym
            return
        if base in self.t.type_refs:
            owner = self.t.type_refs[base]
            cls = self.t.classes.get(owner)
            if cls is not None and node.name in cls.fields:
                self.t.bindings[node] = cls.fields[node.name]
            elif node.name[:1].isupper() and not node.name.isupper() and cls is None:
                self.t.type_refs[node] = f"{owner}.{node.name}"
            else:
                self.t.static_refs[node] = f"{owner}.{node.name}"

    def _mark_qualified(self, node: AstNode, dotted: list[str], cut: int, type_name: str, info: ClassInfo) -> None:
        # walk down the FieldAccess chain; the prefix of length ``cut`` is a type
        chain = []
        cur = node
        while cur.kind is Kind.FIELD_ACCESS:
            chain.append(cur)
            cur = cur.children[0]
        chain.append(cur)
        chain.reverse()  # chain[i] spells dotted[: i + 1]
        for i, n in enumerate(chain):
            self.t.node_class[n] = info.qualified_name
        type_node = chain[cut - 1]
        self.t.type_refs[type_node] = type_name
        owner = type_name
        for n in chain[cut:]:
            cls = self.t.classes.get(owner)
            if cls is not None and n.name in cls.fields:
                self.t.bindings[n] = cls.fields[n.name]
                return
            self.t.static_refs[n] = f"{owner}.{n.name}"
            owner = f"{owner}.{n.name}"


def _dotted(node: AstNode) -> Optional[list[str]]:
    parts = []
    cur = node
    while cur.kind is Kind.FIELD_ACCESS:
        parts.append(cur.name)
        cur = cur.children[0]
    if cur.kind is not Kind.IDENTIFIER:
        return None
    parts.append(cur.name)
    parts.reverse()
    return parts


def resolve_symbols(
    project: SubjectProject,
    known_types: Iterable[str] = (),
    external_return_type: Optional[ReturnTypeHook] = None,
) -> SymbolTable:
    """Bind every identifier occurrence to a variable, a type, or Unresolved.

    ``known_types`` lists qualified library types (normally the knowledge-base
    owner types) so wildcard imports can be expanded; ``external_return_type``
    gives result types of library calls such as ``Cipher.getInstance``.
    """
    table = SymbolTable(known_types=frozenset(known_types), external_return_type=external_return_type)
    resolver = _Resolver(table)
    resolver.declare_classes(project)
    resolver.declare_members()
    resolver.resolve_bodies()
    return table
