"""Recursive-descent parser for the supported Java subset.

Unsupported constructs (generics, lambdas, annotations, nested or inheriting
types, ...) raise a syntax error inside the member being parsed; the parser
then skips to the next member boundary so sibling members and other files
are unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .ast import AstNode, Kind, Location
from .lexer import Token, tokenize

PRIMITIVE_TYPES = frozenset({"boolean", "byte", "char", "short", "int", "long", "float", "double"})
MEMBER_MODIFIERS = frozenset(
    {"public", "private", "protected", "static", "final", "abstract", "synchronized",
     "transient", "volatile", "native", "strictfp"}
)
_BINARY_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "<": 7, ">": 7, "<=": 7, ">=": 7,
    "+": 8, "-": 8, "*": 9, "/": 9, "%": 9,
}
_ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^="})


@dataclass(frozen=True)
class ParseError:
    location: Location
    message: str


class SyntaxErrorAt(Exception):
    def __init__(self, token: Token, expected: str):
        super().__init__(f"expected {expected}, found {token.value!r}")
        self.token = token
        self.expected = expected


class Parser:
    def __init__(self, data: bytes, tokens: list[Token], file_name: str):
        self.data = data
        self.tokens = tokens
        self.file_name = file_name
        self.i = 0
        self.errors: list[ParseError] = []

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect_op(self, op: str) -> Token:
        if not self.tok.is_op(op):
            raise SyntaxErrorAt(self.tok, repr(op))
        return self.advance()

    def expect_kw(self, word: str) -> Token:
        if not self.tok.is_kw(word):
            raise SyntaxErrorAt(self.tok, repr(word))
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            raise SyntaxErrorAt(self.tok, "identifier")
        return self.advance()

    def unsupported(self, what: str) -> SyntaxErrorAt:
        return SyntaxErrorAt(self.tok, f"supported construct ({what} not supported)")

    def span(self, first: Token, last: Token) -> tuple[Location, str]:
        loc = Location(
            self.file_name,
            first.location.line,
            first.location.start_column,
            last.location.end_column,
            last.location.line,
        )
        text = self.data[first.start:last.end].decode("utf-8", errors="replace")
        return loc, text

    def node(self, kind: Kind, first: Token, last: Token, children=(), **attrs) -> AstNode:
        loc, text = self.span(first, last)
        return AstNode(kind, tuple(children), loc, text, **attrs)

    def record(self, err: SyntaxErrorAt) -> None:
        self.errors.append(ParseError(err.token.location, str(err)))

    # -- compilation unit ----------------------------------------------------

    def parse_unit(self) -> AstNode:
        first = self.tok
        children: list[AstNode] = []
        if self.tok.is_kw("package"):
            start = self.advance()
            name = self.qualified_name()
            end = self.expect_op(";")
            children.append(self.node(Kind.PACKAGE, start, end, name=name))
        while self.tok.is_kw("import"):
            start = self.i
            try:
                children.append(self.import_decl())
            except SyntaxErrorAt as err:
                self.record(err)
                self.i = start
                self.skip_past(";")
        while self.tok.kind != "eof":
            start = self.i
            if self.tok.is_op(";"):
                self.advance()
                continue
            try:
                children.append(self.class_decl())
            except SyntaxErrorAt as err:
                self.record(err)
                self.i = start
                self.skip_member()
                if self.i == start:
                    self.advance()
        if not children:
            loc = Location(self.file_name, 1, 1, 1)
            return AstNode(Kind.COMPILATION_UNIT, (), loc, "")
        last = self.tokens[max(self.i - 1, 0)]
        return self.node(Kind.COMPILATION_UNIT, first, last, children)

    def import_decl(self) -> AstNode:
        start = self.expect_kw("import")
        if self.tok.is_kw("static"):
            raise self.unsupported("static import")
        name = self.qualified_name()
        if self.tok.is_op(".") and self.peek().is_op("*"):
            self.advance()
            self.advance()
            name += ".*"
        end = self.expect_op(";")
        return self.node(Kind.IMPORT, start, end, name=name)

    def qualified_name(self) -> str:
        parts = [self.expect_ident().value]
        while self.tok.is_op(".") and self.peek().kind == "ident":
            self.advance()
            parts.append(self.advance().value)
        return ".".join(parts)

    def modifiers(self) -> frozenset:
        mods = set()
        while self.tok.kind == "keyword" and self.tok.value in MEMBER_MODIFIERS:
            mods.add(self.advance().value)
        if self.tok.is_op("@"):
            raise self.unsupported("annotation")
        return frozenset(mods)

    def class_decl(self) -> AstNode:
        first = self.tok
        mods = self.modifiers()
        if self.tok.is_kw("interface", "enum") or (self.tok.kind == "ident" and self.tok.value == "record"):
            raise self.unsupported(f"{self.tok.value} declaration")
        self.expect_kw("class")
        name = self.expect_ident().value
        if self.tok.is_op("<"):
            raise self.unsupported("generic type parameters")
        if self.tok.is_kw("extends", "implements"):
            raise self.unsupported("inheritance")
        self.expect_op("{")
        members: list[AstNode] = []
        while not self.tok.is_op("}"):
            if self.tok.kind == "eof":
                raise SyntaxErrorAt(self.tok, "'}'")
            if self.tok.is_op(";"):
                self.advance()
                continue
            members.extend(self.member(name))
        last = self.advance()
        return self.node(Kind.CLASS_DECL, first, last, members, name=name, modifiers=mods)

    # -- members -------------------------------------------------------------

    def member(self, class_name: str) -> list[AstNode]:
        start = self.i
        try:
            return [self.member_strict(class_name)]
        except SyntaxErrorAt as err:
            self.record(err)
            self.i = start
            end = self.skip_member()
            fallback = self.recover_method_header(start, end)
            return [fallback] if fallback is not None else []

    def member_strict(self, class_name: str) -> AstNode:
        first = self.tok
        mods = self.modifiers()
        if self.tok.is_kw("class", "interface", "enum"):
            raise self.unsupported("nested type")
        if self.tok.is_op("{"):
            raise self.unsupported("initializer block")
        if self.tok.kind == "ident" and self.tok.value == class_name and self.peek().is_op("("):
            name_tok = self.advance()
            return self.method_rest(first, mods, None, name_tok)
        if self.tok.is_op("<"):
            raise self.unsupported("generic method")
        if self.tok.is_kw("void"):
            self.advance()
            type_name = "void"
        else:
            type_name = self.parse_type()
        name_tok = self.expect_ident()
        if self.tok.is_op("("):
            return self.method_rest(first, mods, type_name, name_tok)
        children = []
        if self.tok.is_op("="):
            self.advance()
            children.append(self.variable_initializer(type_name))
        if self.tok.is_op(","):
            raise self.unsupported("multiple declarators")
        end = self.expect_op(";")
        return self.node(Kind.FIELD_DECL, first, end, children, name=name_tok.value, type_name=type_name, modifiers=mods)

    def method_rest(self, first: Token, mods: frozenset, type_name: Optional[str], name_tok: Token) -> AstNode:
        params = self.param_list()
        if self.tok.is_kw("throws"):
            self.advance()
            self.qualified_name()
            while self.tok.is_op(","):
                self.advance()
                self.qualified_name()
        if self.tok.is_op(";"):
            raise self.unsupported("abstract method")
        body = self.block()
        last = self.tokens[self.i - 1]
        return self.node(Kind.METHOD_DECL, first, last, [*params, body], name=name_tok.value,
                         type_name=type_name, modifiers=mods)

    def param_list(self) -> list[AstNode]:
        self.expect_op("(")
        params: list[AstNode] = []
        if not self.tok.is_op(")"):
            while True:
                first = self.tok
                mods = frozenset({"final"}) if self.tok.is_kw("final") else frozenset()
                if mods:
                    self.advance()
                if self.tok.is_op("@"):
                    raise self.unsupported("annotation")
                type_name = self.parse_type()
                if self.tok.is_op("..."):
                    raise self.unsupported("varargs")
                name_tok = self.expect_ident()
                params.append(self.node(Kind.PARAM, first, name_tok, name=name_tok.value, type_name=type_name, modifiers=mods))
                if not self.tok.is_op(","):
                    break
                self.advance()
        self.expect_op(")")
        return params

    def parse_type(self) -> str:
        if self.tok.kind == "keyword" and self.tok.value in PRIMITIVE_TYPES:
            name = self.advance().value
        elif self.tok.is_kw("var"):
            raise self.unsupported("'var' declarations")
        else:
            name = self.qualified_name()
        if self.tok.is_op("<"):
            raise self.unsupported("generics")
        while self.tok.is_op("[") and self.peek().is_op("]"):
            self.advance()
            self.advance()
            name += "[]"
        return name

    def skip_member(self) -> int:
        """Advance past the member starting at ``self.i``; returns the end index."""
        depth = parens = 0
        while self.tok.kind != "eof":
            tok = self.tok
            if tok.is_op("("):
                parens += 1
            elif tok.is_op(")"):
                parens = max(parens - 1, 0)
            elif tok.is_op("{"):
                depth += 1
            elif tok.is_op("}"):
                if depth == 0:
                    return self.i
                depth -= 1
                if depth == 0 and parens == 0:
                    self.advance()
                    return self.i
            elif tok.is_op(";") and depth == 0 and parens == 0:
                self.advance()
                return self.i
            self.advance()
        return self.i

    def skip_past(self, op: str) -> None:
        while self.tok.kind != "eof" and not self.tok.is_op(op):
            self.advance()
        self.advance()

    def recover_method_header(self, start: int, end: int) -> Optional[AstNode]:
        """Build a body-less MethodDecl for a member whose body failed to parse."""
        toks = self.tokens[start:end]
        if not toks or not toks[-1].is_op("}"):
            return None
        paren_at = None
        parens = 0
        for idx, tok in enumerate(toks):
            if tok.is_op("{") and parens == 0:
                break
            if tok.is_op("(") and parens == 0 and idx > 0 and toks[idx - 1].kind == "ident":
                if not (idx > 1 and toks[idx - 2].is_op("@")):
                    paren_at = idx
                    break
            if tok.is_op("("):
                parens += 1
            elif tok.is_op(")"):
                parens -= 1
        if paren_at is None:
            return None
        name_tok = toks[paren_at - 1]
        body_start = None
        depth = 0
        for idx in range(paren_at, len(toks)):
            if toks[idx].is_op("("):
                depth += 1
            elif toks[idx].is_op(")"):
                depth -= 1
            elif toks[idx].is_op("{") and depth == 0:
                body_start = idx
                break
        if body_start is None:
            return None
        params: list[AstNode] = []
        saved, saved_errors = self.i, list(self.errors)
        self.i = start + paren_at
        try:
            params = self.param_list()
        except SyntaxErrorAt:
            params = []
        self.i, self.errors = saved, saved_errors
        mods = frozenset(t.value for t in toks[:paren_at] if t.kind == "keyword" and t.value in MEMBER_MODIFIERS)
        type_name = None
        if paren_at >= 2 and toks[paren_at - 2].kind in ("ident", "keyword") and toks[paren_at - 2].value not in MEMBER_MODIFIERS:
            type_name = toks[paren_at - 2].value
        body = self.node(Kind.BLOCK, toks[body_start], toks[-1])
        first_idx = 0
        while first_idx < paren_at and toks[first_idx].is_op("@"):
            first_idx += 2
            while first_idx + 1 < paren_at and toks[first_idx].is_op(".") and toks[first_idx + 1].kind == "ident":
                first_idx += 2
            if toks[first_idx].is_op("(") and first_idx < paren_at - 1:
                depth = 0
                while first_idx < paren_at:
                    depth += toks[first_idx].is_op("(") - toks[first_idx].is_op(")")
                    first_idx += 1
                    if depth == 0:
                        break
        first = toks[min(first_idx, paren_at - 1)]
        return self.node(Kind.METHOD_DECL, first, toks[-1], [*params, body], name=name_tok.value,
                         type_name=type_name, modifiers=mods)

    # -- statements ----------------------------------------------------------

    def block(self) -> AstNode:
        first = self.expect_op("{")
        stmts: list[AstNode] = []
        while not self.tok.is_op("}"):
            if self.tok.kind == "eof":
                raise SyntaxErrorAt(self.tok, "'}'")
            stmt = self.statement()
            if stmt is not None:
                stmts.append(stmt)
        last = self.advance()
        return self.node(Kind.BLOCK, first, last, stmts)

    def statement(self) -> Optional[AstNode]:
        tok = self.tok
        if tok.is_op("{"):
            return self.block()
        if tok.is_op(";"):
            self.advance()
            return None
        if tok.is_kw("if"):
            return self.if_stmt()
        if tok.is_kw("while"):
            self.advance()
            self.expect_op("(")
            cond = self.expression()
            self.expect_op(")")
            body = self.statement_or_empty()
            return self.node(Kind.WHILE, tok, self.tokens[self.i - 1], [cond, body])
        if tok.is_kw("for"):
            return self.for_stmt()
        if tok.is_kw("return"):
            self.advance()
            children = [] if self.tok.is_op(";") else [self.expression()]
            end = self.expect_op(";")
            return self.node(Kind.RETURN, tok, end, children)
        if tok.is_kw("break", "continue"):
            self.advance()
            if self.tok.kind == "ident":
                raise self.unsupported("labelled jump")
            end = self.expect_op(";")
            return self.node(Kind.BREAK if tok.value == "break" else Kind.CONTINUE, tok, end)
        if tok.is_kw("try"):
            return self.try_stmt()
        if tok.is_kw("do", "switch", "throw", "synchronized", "assert", "class"):
            raise self.unsupported(f"'{tok.value}' statement")
        decl = self.try_local_var_decl()
        if decl is not None:
            return decl
        stmt = self.expression_statement()
        self.expect_op(";")
        return stmt

    def statement_or_empty(self) -> AstNode:
        first = self.tok
        stmt = self.statement()
        if stmt is None:
            return self.node(Kind.BLOCK, first, first)
        return stmt

    def if_stmt(self) -> AstNode:
        first = self.expect_kw("if")
        self.expect_op("(")
        cond = self.expression()
        self.expect_op(")")
        children = [cond, self.statement_or_empty()]
        if self.tok.is_kw("else"):
            self.advance()
            children.append(self.statement_or_empty())
        return self.node(Kind.IF, first, self.tokens[self.i - 1], children)

    def for_stmt(self) -> AstNode:
        first = self.expect_kw("for")
        self.expect_op("(")
        children, slots = [], []
        if not self.tok.is_op(";"):
            init = self.try_local_var_decl(require_semicolon=False)
            if init is None:
                init = self.expression_statement()
            if self.tok.is_op(":"):
                raise self.unsupported("enhanced for")
            children.append(init)
            slots.append("init")
        self.expect_op(";")
        if not self.tok.is_op(";"):
            children.append(self.expression())
            slots.append("cond")
        self.expect_op(";")
        if not self.tok.is_op(")"):
            upd_first = self.tok
            updates = [self.expression_statement()]
            while self.tok.is_op(","):
                self.advance()
                updates.append(self.expression_statement())
            children.append(self.node(Kind.BLOCK, upd_first, self.tokens[self.i - 1], updates))
            slots.append("update")
        self.expect_op(")")
        children.append(self.statement_or_empty())
        slots.append("body")
        return self.node(Kind.FOR, first, self.tokens[self.i - 1], children, slots=tuple(slots))

    def try_stmt(self) -> AstNode:
        first = self.expect_kw("try")
        if self.tok.is_op("("):
            raise self.unsupported("try-with-resources")
        children = [self.block()]
        catches = 0
        while self.tok.is_kw("catch"):
            self.advance()
            self.expect_op("(")
            p_first = self.tok
            if self.tok.is_kw("final"):
                self.advance()
            type_name = self.parse_type()
            if self.tok.is_op("|"):
                raise self.unsupported("multi-catch")
            name_tok = self.expect_ident()
            children.append(self.node(Kind.PARAM, p_first, name_tok, name=name_tok.value, type_name=type_name))
            self.expect_op(")")
            children.append(self.block())
            catches += 1
        has_finally = False
        if self.tok.is_kw("finally"):
            self.advance()
            children.append(self.block())
            has_finally = True
        if not catches and not has_finally:
            raise SyntaxErrorAt(self.tok, "'catch' or 'finally'")
        return self.node(Kind.TRY_CATCH, first, self.tokens[self.i - 1], children,
                         op="finally" if has_finally else None)

    def try_local_var_decl(self, require_semicolon: bool = True) -> Optional[AstNode]:
        start = self.i
        first = self.tok
        mods = frozenset()
        if self.tok.is_kw("final"):
            self.advance()
            mods = frozenset({"final"})
        if self.tok.is_kw("var"):
            raise self.unsupported("'var' declarations")
        is_type_start = self.tok.kind == "ident" or (self.tok.kind == "keyword" and self.tok.value in PRIMITIVE_TYPES)
        if not is_type_start:
            if mods:
                raise SyntaxErrorAt(self.tok, "type")
            return None
        try:
            type_name = self.parse_type()
        except SyntaxErrorAt:
            if mods or self.tok.is_op("<"):
                raise
            self.i = start
            return None
        if self.tok.kind != "ident":
            if mods:
                raise SyntaxErrorAt(self.tok, "identifier")
            self.i = start
            return None
        name_tok = self.advance()
        children = []
        if self.tok.is_op("="):
            self.advance()
            children.append(self.variable_initializer(type_name))
        if self.tok.is_op(","):
            raise self.unsupported("multiple declarators")
        if require_semicolon:
            end = self.expect_op(";")
        else:
            end = self.tokens[self.i - 1]
        return self.node(Kind.LOCAL_VAR_DECL, first, end, children, name=name_tok.value, type_name=type_name, modifiers=mods)

    def variable_initializer(self, type_name: str) -> AstNode:
        if self.tok.is_op("{"):
            if not type_name.endswith("[]"):
                raise SyntaxErrorAt(self.tok, "expression")
            return self.array_initializer(self.tok, type_name[:-2])
        return self.expression()

    def array_initializer(self, first: Token, elem_type: str) -> AstNode:
        self.expect_op("{")
        elems: list[AstNode] = []
        while not self.tok.is_op("}"):
            if self.tok.is_op("{"):
                raise self.unsupported("nested array initializer")
            elems.append(self.expression())
            if not self.tok.is_op(","):
                break
            self.advance()
        last = self.expect_op("}")
        return self.node(Kind.ARRAY_CREATION, first, last, elems, type_name=elem_type, op="init")

    def expression_statement(self) -> AstNode:
        first = self.tok
        if self.tok.is_op("++", "--"):
            op = self.advance().value
            target = self.unary()
            self.check_assignable(target)
            return self.node(Kind.ASSIGN, first, self.tokens[self.i - 1], [target], op=op)
        expr = self.expression()
        if self.tok.kind == "op" and self.tok.value in _ASSIGN_OPS:
            self.check_assignable(expr)
            op = self.advance().value
            value = self.expression()
            return self.node(Kind.ASSIGN, first, self.tokens[self.i - 1], [expr, value], op=op)
        if self.tok.is_op("++", "--"):
            self.check_assignable(expr)
            op = self.advance().value
            return self.node(Kind.ASSIGN, first, self.tokens[self.i - 1], [expr], op=op)
        if expr.kind not in (Kind.METHOD_CALL, Kind.CONSTRUCTOR_CALL):
            raise SyntaxErrorAt(self.tok, "statement")
        return expr

    def check_assignable(self, expr: AstNode) -> None:
        if expr.kind not in (Kind.IDENTIFIER, Kind.FIELD_ACCESS, Kind.ARRAY_ACCESS):
            raise SyntaxErrorAt(self.tok, "assignable expression")

    # -- expressions ---------------------------------------------------------

    def expression(self, min_prec: int = 1) -> AstNode:
        left = self.unary()
        while True:
            tok = self.tok
            if tok.kind == "op" and tok.value in ("?", "->"):
                raise self.unsupported("conditional or lambda expression")
            if tok.is_kw("instanceof"):
                raise self.unsupported("instanceof")
            prec = _BINARY_PRECEDENCE.get(tok.value) if tok.kind == "op" else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.expression(prec + 1)
            loc = Location(self.file_name, left.location.line, left.location.start_column,
                           right.location.end_column, right.location.end_line)
            text = self.data[self._start_offset(left):self.tokens[self.i - 1].end].decode("utf-8", errors="replace")
            left = AstNode(Kind.BINARY_OP, (left, right), loc, text, op=tok.value)

    def unary(self) -> AstNode:
        tok = self.tok
        if tok.is_op("!", "-", "+", "~"):
            self.advance()
            operand = self.unary()
            return self.node(Kind.UNARY_OP, tok, self.tokens[self.i - 1], [operand], op=tok.value)
        if tok.is_op("++", "--"):
            raise self.unsupported("increment inside expression")
        if tok.is_op("(") and self.peek().kind == "keyword" and self.peek().value in PRIMITIVE_TYPES and self.peek(2).is_op(")"):
            self.advance()
            type_tok = self.advance()
            self.advance()
            operand = self.unary()
            return self.node(Kind.UNARY_OP, tok, self.tokens[self.i - 1], [operand], op=f"({type_tok.value})")
        return self.postfix(self.primary())

    def postfix(self, expr: AstNode) -> AstNode:
        while True:
            if self.tok.is_op("."):
                self.advance()
                if self.tok.is_op("<"):
                    raise self.unsupported("explicit type arguments")
                if self.tok.is_kw("new", "class", "this", "super"):
                    raise self.unsupported(f"'.{self.tok.value}'")
                name_tok = self.expect_ident()
                if self.tok.is_op("("):
                    args = self.arguments()
                    last = self.tokens[self.i - 1]
                    expr = self._extend(expr, Kind.METHOD_CALL, last, [expr, *args], name=name_tok.value, has_receiver=True)
                else:
                    expr = self._extend(expr, Kind.FIELD_ACCESS, name_tok, [expr], name=name_tok.value)
            elif self.tok.is_op("["):
                self.advance()
                index = self.expression()
                last = self.expect_op("]")
                expr = self._extend(expr, Kind.ARRAY_ACCESS, last, [expr, index])
            elif self.tok.is_op("::"):
                raise self.unsupported("method reference")
            else:
                return expr

    def _extend(self, base: AstNode, kind: Kind, last: Token, children, **attrs) -> AstNode:
        loc = Location(self.file_name, base.location.line, base.location.start_column,
                       last.location.end_column, last.location.end_line)
        start = self._start_offset(base)
        text = self.data[start:last.end].decode("utf-8", errors="replace")
        return AstNode(kind, tuple(children), loc, text, **attrs)

    def _start_offset(self, node: AstNode) -> int:
        # map a node's (line, column) back to a byte offset via its first token
        lo, hi = 0, self.i
        key = (node.location.line, node.location.start_column)
        while lo < hi:
            mid = (lo + hi) // 2
            t = self.tokens[mid].location
            if (t.line, t.start_column) < key:
                lo = mid + 1
            else:
                hi = mid
        return self.tokens[lo].start

    def arguments(self) -> list[AstNode]:
        self.expect_op("(")
        args: list[AstNode] = []
        if not self.tok.is_op(")"):
            while True:
                args.append(self.expression())
                if not self.tok.is_op(","):
                    break
                self.advance()
        self.expect_op(")")
        return args

    def primary(self) -> AstNode:
        tok = self.tok
        if tok.kind == "str":
            self.advance()
            return self.node(Kind.STRING_LIT, tok, tok, value=tok.value)
        if tok.kind == "int":
            self.advance()
            return self.node(Kind.INT_LIT, tok, tok, value=tok.value)
        if tok.kind == "char":
            self.advance()
            if len(tok.value) != 1:
                raise SyntaxErrorAt(tok, "character literal")
            return self.node(Kind.INT_LIT, tok, tok, value=ord(tok.value))
        if tok.kind == "float":
            raise self.unsupported("floating-point literal")
        if tok.is_kw("true", "false"):
            self.advance()
            return self.node(Kind.BOOL_LIT, tok, tok, value=tok.value == "true")
        if tok.is_kw("null"):
            self.advance()
            return self.node(Kind.NULL_LIT, tok, tok)
        if tok.is_kw("this"):
            self.advance()
            if self.tok.is_op("("):
                raise self.unsupported("constructor chaining")
            return self.node(Kind.IDENTIFIER, tok, tok, name="this")
        if tok.kind == "ident":
            self.advance()
            if self.tok.is_op("("):
                args = self.arguments()
                return self.node(Kind.METHOD_CALL, tok, self.tokens[self.i - 1], args, name=tok.value)
            return self.node(Kind.IDENTIFIER, tok, tok, name=tok.value)
        if tok.is_kw("new"):
            return self.creation()
        if tok.is_op("("):
            self.advance()
            inner = self.expression()
            last = self.expect_op(")")
            loc, text = self.span(tok, last)
            return replace(inner, location=loc, text=text)
        if tok.kind == "keyword" and tok.value in PRIMITIVE_TYPES:
            raise self.unsupported("class literal")
        raise SyntaxErrorAt(tok, "expression")

    def creation(self) -> AstNode:
        first = self.expect_kw("new")
        if self.tok.kind == "keyword" and self.tok.value in PRIMITIVE_TYPES:
            type_name = self.advance().value
        else:
            type_name = self.qualified_name()
        if self.tok.is_op("<"):
            raise self.unsupported("generics")
        if self.tok.is_op("["):
            self.advance()
            if self.tok.is_op("]"):
                self.advance()
                if self.tok.is_op("["):
                    raise self.unsupported("multi-dimensional array")
                return self.array_initializer(first, type_name)
            dim = self.expression()
            last = self.expect_op("]")
            if self.tok.is_op("["):
                raise self.unsupported("multi-dimensional array")
            return self.node(Kind.ARRAY_CREATION, first, last, [dim], type_name=type_name, op="dims")
        args = self.arguments()
        if self.tok.is_op("{"):
            raise self.unsupported("anonymous class")
        return self.node(Kind.CONSTRUCTOR_CALL, first, self.tokens[self.i - 1], args, type_name=type_name)


def parse_compilation_unit(tokens: list[Token], data: bytes, file_name: str) -> tuple[AstNode, list[ParseError]]:
    """Parse a token stream from :func:`tokenize` into a CompilationUnit."""
    parser = Parser(data, tokens, file_name)
    unit = parser.parse_unit()
    return unit, parser.errors


def parse_source(source: str | bytes, file_name: str) -> tuple[AstNode, list[ParseError]]:
    data = source.encode("utf-8") if isinstance(source, str) else source
    tokens, lex_errors = tokenize(data, file_name)
    unit, errors = parse_compilation_unit(tokens, data, file_name)
    return unit, [ParseError(e.location, e.message) for e in lex_errors] + errors
