"""AST node and source location types for the Java-subset frontend."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional


@dataclass(frozen=True, order=True)
class Location:
    """A source span. Columns are 1-based UTF-8 byte offsets, end inclusive.

    ``end_line`` is only different from ``line`` for nodes spanning several
    lines (blocks, method declarations); evidence locations are single-line.
    """

    file_name: str
    line: int
    start_column: int
    end_column: int
    end_line: int = 0

    def __post_init__(self) -> None:
        if not self.end_line:
            object.__setattr__(self, "end_line", self.line)
        if not self.file_name:
            raise ValueError("file_name must be non-empty")
        if self.line < 1 or self.start_column < 1:
            raise ValueError(f"invalid location {self!r}")
        if self.end_line == self.line and self.end_column < self.start_column:
            raise ValueError(f"invalid column span {self!r}")

    def to_json(self) -> dict:
        return {
            "fileName": self.file_name,
            "line": self.line,
            "startColumn": self.start_column,
            "endColumn": self.end_column,
        }

    def short(self) -> str:
        return f"{self.file_name}:{self.line}:{self.start_column}"


class Kind(str, Enum):
    COMPILATION_UNIT = "CompilationUnit"
    PACKAGE = "Package"
    IMPORT = "Import"
    CLASS_DECL = "ClassDecl"
    FIELD_DECL = "FieldDecl"
    METHOD_DECL = "MethodDecl"
    PARAM = "Param"
    BLOCK = "Block"
    LOCAL_VAR_DECL = "LocalVarDecl"
    ASSIGN = "Assign"
    METHOD_CALL = "MethodCall"
    CONSTRUCTOR_CALL = "ConstructorCall"
    ARRAY_CREATION = "ArrayCreation"
    ARRAY_ACCESS = "ArrayAccess"
    FIELD_ACCESS = "FieldAccess"
    IDENTIFIER = "Identifier"
    STRING_LIT = "StringLit"
    INT_LIT = "IntLit"
    BOOL_LIT = "BoolLit"
    NULL_LIT = "NullLit"
    BINARY_OP = "BinaryOp"
    UNARY_OP = "UnaryOp"
    IF = "If"
    WHILE = "While"
    FOR = "For"
    RETURN = "Return"
    BREAK = "Break"
    CONTINUE = "Continue"
    TRY_CATCH = "TryCatch"

    def __str__(self) -> str:
        return self.value


STATEMENT_KINDS = frozenset(
    {
        Kind.BLOCK,
        Kind.LOCAL_VAR_DECL,
        Kind.ASSIGN,
        Kind.METHOD_CALL,
        Kind.CONSTRUCTOR_CALL,
        Kind.IF,
        Kind.WHILE,
        Kind.FOR,
        Kind.RETURN,
        Kind.BREAK,
        Kind.CONTINUE,
        Kind.TRY_CATCH,
    }
)


@dataclass(frozen=True, eq=False)
class AstNode:
    """Immutable AST node; identity-hashed so equal-looking nodes stay distinct.

    Kind-specific attributes:

    * ``name``: declared/called/accessed identifier, class or method name.
    * ``value``: decoded literal value (str, int, bool or None).
    * ``op``: operator of BinaryOp/UnaryOp/Assign (``=``, ``+=``, ``++`` ...).
    * ``type_name``: declared type (LocalVarDecl, FieldDecl, Param, MethodDecl
      return type, ConstructorCall/ArrayCreation element type).
    * ``has_receiver``: MethodCall only; when true ``children[0]`` is the receiver.
    * ``slots``: For only; which of ``init``/``cond``/``update`` are present,
      in child order, followed by the body.
    """

    kind: Kind
    children: tuple["AstNode", ...]
    location: Location
    text: str
    name: Optional[str] = None
    value: object = None
    op: Optional[str] = None
    type_name: Optional[str] = None
    modifiers: frozenset = field(default_factory=frozenset)
    has_receiver: bool = False
    slots: tuple = ()

    @property
    def receiver(self) -> Optional["AstNode"]:
        if self.kind is Kind.METHOD_CALL and self.has_receiver:
            return self.children[0]
        return None

    @property
    def args(self) -> tuple["AstNode", ...]:
        if self.kind is Kind.METHOD_CALL:
            return self.children[1:] if self.has_receiver else self.children
        if self.kind is Kind.CONSTRUCTOR_CALL:
            return self.children
        raise AttributeError(f"{self.kind} has no arguments")

    @property
    def is_static(self) -> bool:
        return "static" in self.modifiers

    @property
    def is_final(self) -> bool:
        return "final" in self.modifiers

    def slot(self, name: str) -> Optional["AstNode"]:
        if name in self.slots:
            return self.children[self.slots.index(name)]
        return None

    def walk(self) -> Iterator["AstNode"]:
        """Pre-order traversal including ``self``."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def __repr__(self) -> str:
        label = self.name if self.name is not None else self.op or ""
        return f"<{self.kind.value} {label} @{self.location.short()}>"

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind.value, "location": self.location.to_json()}
        if self.location.end_line != self.location.line:
            out["location"]["endLine"] = self.location.end_line
        for attr in ("name", "op", "type_name"):
            val = getattr(self, attr)
            if val is not None:
                out[attr] = val
        if self.kind in (Kind.STRING_LIT, Kind.INT_LIT, Kind.BOOL_LIT):
            out["value"] = self.value
        if self.modifiers:
            out["modifiers"] = sorted(self.modifiers)
        if self.has_receiver:
            out["hasReceiver"] = True
        if self.slots:
            out["slots"] = list(self.slots)
        out["children"] = [c.to_json() for c in self.children]
        return out
