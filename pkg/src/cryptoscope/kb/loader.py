"""Loading, validating and merging knowledge-base files."""

from __future__ import annotations

import bisect
import json
import os
import re
from functools import lru_cache
from importlib import resources
from json.decoder import scanstring
from pathlib import Path
from typing import Iterable, Optional, Sequence

import jsonschema

from .model import (
    AlgorithmInfo,
    ApiSpec,
    KnowledgeBase,
    ParamRole,
    RelationRule,
    SemanticsRule,
)

KB_DIR_ENV = "CRYPTOSCOPE_KB_DIR"
BUILTIN_FILES = ("jca.json", "bouncycastle.json", "policy-default.json")


class KbError(Exception):
    pass


class SchemaError(KbError):
    def __init__(self, file: str, pointer: str, message: str, line: Optional[int] = None):
        self.file, self.pointer, self.message, self.line = file, pointer, message, line
        where = f"{file}:{line}" if line else file
        super().__init__(f"{where}: {pointer or '/'}: {message}")


class DuplicateId(KbError):
    def __init__(self, file: str, api_id: str, line: Optional[int] = None):
        self.file, self.api_id, self.line = file, api_id, line
        where = f"{file}:{line}" if line else file
        super().__init__(f"{where}: duplicate API id {api_id!r}")


@lru_cache(maxsize=1)
def kb_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("data/kb.schema.json").read_text("utf-8"))


def builtin_dir() -> Path:
    return Path(str(resources.files(__package__).joinpath("data")))


def default_kb_dir() -> Path:
    env = os.environ.get(KB_DIR_ENV)
    return Path(env) if env else builtin_dir()


def default_kb_paths(kb_dir: Optional[Path] = None) -> list[Path]:
    base = Path(kb_dir) if kb_dir else default_kb_dir()
    return [base / name for name in BUILTIN_FILES if (base / name).exists()]


# -- line numbers for error messages ------------------------------------------

_WS = re.compile(r"[ \t\n\r]*")
_SCALAR = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?|true|false|null")


def _escape(token: str) -> str:
    return token.replace("~", "~0").replace("/", "~1")


def pointer_lines(text: str) -> dict[str, int]:
    """Map each JSON pointer in ``text`` to the line its value starts on."""
    newlines = [i for i, ch in enumerate(text) if ch == "\n"]
    out: dict[str, int] = {}

    def skip(i: int) -> int:
        return _WS.match(text, i).end()

    def value(i: int, ptr: str) -> int:
        i = skip(i)
        out[ptr] = bisect.bisect_right(newlines, i - 1) + 1
        ch = text[i]
        if ch == "{":
            i = skip(i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = scanstring(text, skip(i) + 1)
                i = skip(i) + 1  # ':'
                i = skip(value(i, f"{ptr}/{_escape(key)}"))
                if text[i] == "}":
                    return i + 1
                i += 1
        if ch == "[":
            i = skip(i + 1)
            if text[i] == "]":
                return i + 1
            n = 0
            while True:
                i = skip(value(i, f"{ptr}/{n}"))
                n += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        if ch == '"':
            return scanstring(text, i + 1)[1]
        return _SCALAR.match(text, i).end()

    try:
        value(0, "")
    except (IndexError, ValueError, AttributeError):
        pass
    return out


# -- single-file parsing -------------------------------------------------------

def read_kb_file(path: Path | str) -> dict:
    """Parse and schema-check one file; returns the raw document."""
    path = Path(path)
    name = str(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise KbError(f"{name}: cannot read ({exc.strerror or exc})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(name, "", exc.msg, exc.lineno) from exc
    validator = jsonschema.Draft202012Validator(kb_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        pointer = "".join(f"/{_escape(str(p))}" for p in err.absolute_path)
        raise SchemaError(name, pointer, err.message, pointer_lines(text).get(pointer))
    seen: dict[str, int] = {}
    for i, api in enumerate(doc.get("apis", [])):
        if api["id"] in seen:
            raise DuplicateId(name, api["id"], pointer_lines(text).get(f"/apis/{i}"))
        seen[api["id"]] = i
    doc["__text__"] = text
    return doc


def _api_from_json(raw: dict, source: str) -> ApiSpec:
    params = tuple(
        ParamRole(
            index=p["index"],
            role=p["role"],
            value_kind=p.get("valueKind", "any"),
            domain=p.get("domain"),
            material=p.get("material"),
            type=p.get("type"),
            out=p.get("out", False),
        )
        for p in raw.get("params", [])
    )
    arity = raw.get("arity", len(params))
    return ApiSpec(
        id=raw["id"],
        owner_type=raw["owner"],
        method_name=raw["method"],
        arity=arity,
        kind=raw["kind"],
        params=params,
        static=raw.get("static", False),
        produces_instance_of=raw.get("producesInstanceOf"),
        functions=tuple(raw.get("functions", ())),
        produces_material=raw.get("producesMaterial"),
        material_state=raw.get("materialState", "generated"),
        passthrough=raw.get("passthrough", False),
        properties=_props(raw.get("properties", {})),
        source=source,
    )


def _props(raw: dict) -> tuple:
    return tuple(sorted(raw.items()))


def _rule_from_json(raw: dict, source: str) -> SemanticsRule:
    pattern = re.compile(raw["pattern"]) if "pattern" in raw else None
    return SemanticsRule(
        properties=_props(raw["properties"]),
        domain=raw.get("domain"),
        api=raw.get("api"),
        exact=raw.get("exact"),
        pattern=pattern,
        source=source,
    )


_POLICY_FIELDS = {
    "weakVariants": ("weak_variants", frozenset),
    "weakModes": ("weak_modes", frozenset),
    "weakHashes": ("weak_hashes", frozenset),
    "quantumUnsafe": ("quantum_unsafe", frozenset),
    "reportQuantumUnsafe": ("report_quantum_unsafe", bool),
    "strongPrngApis": ("strong_prng_apis", frozenset),
    "minAsymKeyBits": ("min_asym_key_bits", dict),
    "minPbeIterations": ("min_pbe_iterations", int),
    "severities": ("severities", dict),
    "allowedVariants": ("allowed_variants", frozenset),
    "blockcipherPrimitives": ("blockcipher_primitives", frozenset),
}


def merge_document(kb: KnowledgeBase, doc: dict, source: str) -> None:
    """Overlay ``doc`` onto ``kb``: later definitions win by id or key."""
    for raw in doc.get("apis", []):
        kb.apis[raw["id"]] = _api_from_json(raw, source)
    for raw in doc.get("semantics", []):
        rule = _rule_from_json(raw, source)
        if rule.is_exact:
            kb.semantics = [
                r for r in kb.semantics
                if not (r.is_exact and r.domain == rule.domain and r.api == rule.api and r.exact == rule.exact)
            ]
        kb.semantics.append(rule)
    for raw in doc.get("relations", []):
        rel = RelationRule(raw["kind"], raw["sourceApi"], raw["targetApi"], raw.get("paramIndex"))
        if rel not in kb.relations:
            kb.relations.append(rel)
    for name, props in doc.get("algorithms", {}).items():
        kb.algorithms[name.upper()] = AlgorithmInfo(name, _props(props))
    kb.aliases.update(doc.get("aliases", {}))
    kb.padding_aliases.update(doc.get("paddingAliases", {}))
    if "aeModes" in doc:
        kb.ae_modes = kb.ae_modes | frozenset(doc["aeModes"])
    kb.constants.update(doc.get("constants", {}))
    for key, value in doc.get("policy", {}).items():
        attr, conv = _POLICY_FIELDS[key]
        if conv is dict:
            merged = dict(getattr(kb.policy, attr))
            merged.update(value)
            setattr(kb.policy, attr, merged)
        else:
            setattr(kb.policy, attr, conv(value))
    kb.sources.append(source)


def _check_closure(kb: KnowledgeBase, docs: Sequence[tuple[str, dict]]) -> None:
    ids = list(kb.apis)

    def exists(glob: str) -> bool:
        from fnmatch import fnmatchcase

        return any(fnmatchcase(i, glob) for i in ids)

    for source, doc in docs:
        lines = None
        for i, raw in enumerate(doc.get("relations", [])):
            for key in ("sourceApi", "targetApi"):
                if not exists(raw[key]):
                    lines = lines or pointer_lines(doc["__text__"])
                    ptr = f"/relations/{i}/{key}"
                    raise SchemaError(source, ptr, f"no API matches {raw[key]!r}", lines.get(ptr))
        for i, raw in enumerate(doc.get("semantics", [])):
            if "api" in raw and raw["api"] not in kb.apis:
                lines = lines or pointer_lines(doc["__text__"])
                ptr = f"/semantics/{i}/api"
                raise SchemaError(source, ptr, f"unknown API {raw['api']!r}", lines.get(ptr))
        for i, api_id in enumerate(doc.get("policy", {}).get("strongPrngApis", [])):
            if api_id not in kb.apis:
                lines = lines or pointer_lines(doc["__text__"])
                ptr = f"/policy/strongPrngApis/{i}"
                raise SchemaError(source, ptr, f"unknown API {api_id!r}", lines.get(ptr))
    overlap = kb.policy.allowed_variants & (kb.policy.weak_variants | kb.policy.quantum_unsafe)
    if overlap:
        raise SchemaError(docs[-1][0] if docs else "<kb>", "/policy/allowedVariants",
                          f"variants both allowed and flagged: {sorted(overlap)}")


def load_kb(paths: Optional[Iterable[Path | str]] = None) -> KnowledgeBase:
    """Load and merge KB files in order (the builtin set when ``paths`` is None)."""
    paths = default_kb_paths() if paths is None else [Path(p) for p in paths]
    kb = KnowledgeBase()
    docs = []
    for path in paths:
        doc = read_kb_file(path)
        merge_document(kb, doc, str(path))
        docs.append((str(path), doc))
    _check_closure(kb, docs)
    kb.reindex()
    return kb
