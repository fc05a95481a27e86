from .callgraph import CallEdge, CallGraph, build_call_graph, resolve_call
from .cfg import ENTRY, EXIT, Cfg, CfgEdge, build_cfg, own_expressions
from .defuse import ENTRY_DEF, DefUse, ExternalInput, ExternalKind, compute_defuse
from .program import MethodInfo, ProgramIr, build_ir
from .symbols import ClassInfo, MethodRef, Storage, Symbol, SymbolTable, resolve_symbols

__all__ = [
    "CallEdge",
    "CallGraph",
    "Cfg",
    "CfgEdge",
    "ClassInfo",
    "DefUse",
    "ENTRY",
    "ENTRY_DEF",
    "EXIT",
    "ExternalInput",
    "ExternalKind",
    "MethodInfo",
    "MethodRef",
    "ProgramIr",
    "Storage",
    "Symbol",
    "SymbolTable",
    "build_call_graph",
    "build_cfg",
    "build_ir",
    "compute_defuse",
    "own_expressions",
    "resolve_call",
    "resolve_symbols",
]
