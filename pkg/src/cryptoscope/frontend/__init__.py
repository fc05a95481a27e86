from .ast import AstNode, Kind, Location, STATEMENT_KINDS
from .lexer import LexError, Token, tokenize
from .parser import ParseError, parse_compilation_unit, parse_source
from .project import ProjectError, SourceFile, SubjectProject, list_sources, parse_project

__all__ = [
    "AstNode",
    "Kind",
    "LexError",
    "Location",
    "ParseError",
    "ProjectError",
    "STATEMENT_KINDS",
    "SourceFile",
    "SubjectProject",
    "Token",
    "list_sources",
    "parse_compilation_unit",
    "parse_project",
    "parse_source",
    "tokenize",
]
