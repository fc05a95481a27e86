"""Tokenizer for the Java subset.

Lexing runs over the UTF-8 bytes of the source so token columns are byte
offsets, matching the evidence coordinates written into reports.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import Location

KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null var
    """.split()
)

_OPERATORS = sorted(
    """
    >>>= <<= >>= >>> -> :: ++ -- && || == != <= >= += -= *= /= %= &= |= ^= << >>
    ( ) { } [ ] ; , . @ = < > ! ~ ? : + - * / & | ^ %
    """.split(),
    key=len,
    reverse=True,
)

_TOKEN_RE = re.compile(
    rb"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<char>'(?:[^'\\\n]|\\.)+')
  | (?P<num>0[xX][0-9a-fA-F_]+[lL]?|\d[\d_]*(?:\.\d+)?(?:[eE][+-]?\d+)?[fFdDlL]?)
  | (?P<ident>[A-Za-z_$\x80-\xff][A-Za-z0-9_$\x80-\xff]*)
  | (?P<op>"""
    + b"|".join(re.escape(op.encode()) for op in _OPERATORS)
    + rb""")
    """,
    re.VERBOSE | re.DOTALL,
)

_ESCAPES = {"n": "\n", "t": "\t", "b": "\b", "r": "\r", "f": "\f", "s": " ",
            "'": "'", '"': '"', "\\": "\\"}
_ESCAPE_RE = re.compile(r"\\(u+[0-9a-fA-F]{4}|[0-7]{1,3}|.)")


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | int | float | str | char | op | eof
    value: object
    location: Location
    start: int  # byte offset, inclusive
    end: int  # byte offset, exclusive

    def is_op(self, *ops: str) -> bool:
        return self.kind == "op" and self.value in ops

    def is_kw(self, *words: str) -> bool:
        return self.kind == "keyword" and self.value in words

    def __repr__(self) -> str:
        if self.kind == "op":
            return repr(self.value)
        return f"{self.kind.capitalize()}({self.value!r})"


@dataclass(frozen=True)
class LexError:
    location: Location
    message: str


def decode_escapes(body: str) -> str:
    def repl(m: re.Match) -> str:
        esc = m.group(1)
        if esc[0] == "u":
            return chr(int(esc.lstrip("u"), 16))
        if esc[0] in "01234567":
            return chr(int(esc, 8))
        return _ESCAPES.get(esc, esc)

    return _ESCAPE_RE.sub(repl, body)


def _parse_int(raw: str) -> int | None:
    text = raw.replace("_", "").rstrip("lL")
    try:
        if text[:2] in ("0x", "0X"):
            return int(text, 16)
        if len(text) > 1 and text.startswith("0") and text.isdigit():
            return int(text, 8)
        return int(text)
    except ValueError:
        return None


def tokenize(source: str | bytes, file_name: str) -> tuple[list[Token], list[LexError]]:
    """Split ``source`` into tokens; comments and whitespace are dropped.

    Illegal characters are recorded and lexing resumes on the next line.
    The returned list always ends with an ``eof`` token.
    """
    data = source.encode("utf-8") if isinstance(source, str) else source
    tokens: list[Token] = []
    errors: list[LexError] = []
    pos, line, line_start = 0, 1, 0
    n = len(data)

    def loc(start: int, end: int) -> Location:
        return Location(file_name, line, start - line_start + 1, max(end - line_start, start - line_start + 1))

    while pos < n:
        m = _TOKEN_RE.match(data, pos)
        if m is None:
            bad = loc(pos, pos + 1)
            if data.startswith(b"/*", pos):
                errors.append(LexError(bad, "unterminated block comment"))
                break
            ch = data[pos:pos + 1]
            if ch in (b'"', b"'"):
                errors.append(LexError(bad, "unterminated literal"))
            else:
                errors.append(LexError(bad, f"illegal character {ch.decode('latin-1')!r}"))
            nl = data.find(b"\n", pos)
            if nl < 0:
                break
            pos = nl
            continue
        group = m.lastgroup
        start, end = m.span()
        raw = m.group()
        if group == "nl":
            line += 1
            line_start = end
        elif group == "bcomment":
            count = raw.count(b"\n")
            if count:
                line += count
                line_start = start + raw.rfind(b"\n") + 1
        elif group in ("ws", "lcomment"):
            pass
        else:
            text = raw.decode("utf-8", errors="replace")
            location = loc(start, end)
            if group == "ident":
                kind = "keyword" if text in KEYWORDS else "ident"
                tokens.append(Token(kind, text, location, start, end))
            elif group == "str":
                tokens.append(Token("str", decode_escapes(text[1:-1]), location, start, end))
            elif group == "char":
                tokens.append(Token("char", decode_escapes(text[1:-1]), location, start, end))
            elif group == "num":
                value = _parse_int(text)
                if value is None:
                    tokens.append(Token("float", text, location, start, end))
                else:
                    tokens.append(Token("int", value, location, start, end))
            else:
                tokens.append(Token("op", text, location, start, end))
        pos = end

    eof_col = max(pos - line_start, 0) + 1
    tokens.append(Token("eof", None, Location(file_name, line, eof_col, eof_col), n, n))
    return tokens, errors
