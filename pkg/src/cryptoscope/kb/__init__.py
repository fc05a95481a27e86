from .loader import (
    KB_DIR_ENV,
    DuplicateId,
    KbError,
    SchemaError,
    builtin_dir,
    default_kb_paths,
    load_kb,
    read_kb_file,
)
from .model import (
    FUNCTIONS,
    AlgorithmInfo,
    ApiSpec,
    KnowledgeBase,
    ParamRole,
    PolicySet,
    RelationRule,
    SemanticsRule,
)
from .semantics import (
    MaterialDescriptor,
    PropertyValue,
    SemanticsResult,
    choose_overload,
    interpret_value,
    match_call_site,
    normalize_padding,
    parse_transformation,
    resolve_semantics,
)

__all__ = [
    "AlgorithmInfo",
    "ApiSpec",
    "DuplicateId",
    "FUNCTIONS",
    "KB_DIR_ENV",
    "KbError",
    "KnowledgeBase",
    "MaterialDescriptor",
    "ParamRole",
    "PolicySet",
    "PropertyValue",
    "RelationRule",
    "SchemaError",
    "SemanticsResult",
    "SemanticsRule",
    "builtin_dir",
    "choose_overload",
    "default_kb_paths",
    "interpret_value",
    "load_kb",
    "match_call_site",
    "normalize_padding",
    "parse_transformation",
    "read_kb_file",
    "resolve_semantics",
]
