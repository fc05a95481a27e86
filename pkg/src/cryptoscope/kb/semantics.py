"""Call-site matching and value-to-property semantics."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..values import ConstValue
from .model import INT_PROPERTIES, ApiSpec, KnowledgeBase, SemanticsRule

NUMERIC = frozenset({"int", "long", "short", "byte", "char"})
# roles whose constant value feeds properties; Unknown values here make an asset incomplete
VALUE_ROLES = frozenset({"transformation", "keysize", "opmode", "iterations", "taglen"})
TRANSFORMATION_DOMAINS = frozenset({"cipher", "keygen-secret"})
_TEMPLATE = re.compile(r"\{(\w+)\}")


@dataclass(frozen=True)
class PropertyValue:
    value: object
    param_index: Optional[int]  # None when the value is an API-level default


@dataclass(frozen=True)
class MaterialDescriptor:
    kind: str
    role: str
    param_index: int
    value: Optional[ConstValue]


@dataclass
class SemanticsResult:
    properties: dict[str, PropertyValue] = field(default_factory=dict)
    materials: list[MaterialDescriptor] = field(default_factory=list)
    unknown_roles: list[str] = field(default_factory=list)
    unrecognized: bool = False

    def get(self, name: str, default=None):
        pv = self.properties.get(name)
        return pv.value if pv is not None else default


# -- call-site matching --------------------------------------------------------

def _compatible(param_type: str, arg_type: Optional[str]) -> Optional[bool]:
    """True/False when both types are known, None when the argument type is unknown."""
    if arg_type is None:
        return None
    if param_type in NUMERIC and arg_type in NUMERIC:
        return True
    return param_type == arg_type


def choose_overload(candidates: Sequence[ApiSpec], arg_types: Sequence[Optional[str]]) -> Optional[ApiSpec]:
    """Pick among same-arity overloads by declared argument types.

    Candidates whose typed parameters contradict a known argument type are
    dropped; among the rest the one with most confirmed parameters wins,
    ties going to the first in KB order.
    """
    best, best_score = None, -1
    for spec in candidates:
        score = 0
        ok = True
        for p in spec.params:
            if p.type is None or p.index >= len(arg_types):
                continue
            verdict = _compatible(p.type, arg_types[p.index])
            if verdict is False:
                ok = False
                break
            if verdict:
                score += 1
        if ok and score > best_score:
            best, best_score = spec, score
    return best


def match_call_site(call, symbols, kb: KnowledgeBase) -> Optional[ApiSpec]:
    """The ApiSpec for a MethodCall/ConstructorCall node, or None.

    ``symbols`` is the project symbol table; only the declared receiver type
    (or constructed type), method name and arity are consulted, then
    argument types to separate overloads.
    """
    owner = symbols.call_owner(call)
    is_ctor = call.kind.value == "ConstructorCall"
    name = "<init>" if is_ctor else call.name
    args = call.args
    candidates = kb.candidates(owner, name, len(args))
    if not candidates:
        return None
    if len(candidates) == 1:
        return candidates[0]
    return choose_overload(candidates, [symbols.expr_type(a) for a in args])


# -- value semantics -------------------------------------------------------------

def normalize_padding(padding: str, kb: KnowledgeBase) -> str:
    key = padding.upper()
    if key in kb.padding_aliases:
        return kb.padding_aliases[key]
    if key.startswith("OAEP"):
        return "OAEP"
    return padding


def parse_transformation(value: str, kb: KnowledgeBase) -> tuple[dict, bool]:
    """Split ``alg[/mode[/padding]]`` and fill library defaults.

    Returns ``(properties, unrecognized)``. A bare algorithm name gets the
    full default set; an explicit mode or padding replaces the default one.
    """
    parts = value.split("/")
    alg = parts[0].strip()
    info = kb.algorithms.get(alg.upper())
    props: dict = {}
    unrecognized = info is None
    if info is not None:
        props.update(info.properties)
    else:
        props["variant"] = alg
    if len(parts) >= 2:
        props["mode"] = parts[1].strip()
        props.pop("padding", None)
    if len(parts) >= 3:
        props["padding"] = normalize_padding(parts[2].strip(), kb)
    mode = props.get("mode")
    if mode is not None and mode.upper() in kb.ae_modes and not unrecognized:
        props["primitive"] = "ae"
    return props, unrecognized


def _same_literal(a: object, b: object) -> bool:
    return type(a) is type(b) and a == b


def _ordered_patterns(kb: KnowledgeBase) -> list[SemanticsRule]:
    # later files win; within one file the listed order is kept
    order = {src: i for i, src in enumerate(kb.sources)}
    rules = [r for r in kb.semantics if not r.is_exact]
    return sorted(rules, key=lambda r: -order.get(r.source, 0))


def _fill(props: Sequence[tuple[str, object]], groups: dict, whole: str, kb: KnowledgeBase) -> dict:
    out = {}
    for key, val in props:
        if isinstance(val, str) and "{" in val:
            def sub(m: re.Match) -> str:
                name = m.group(1)
                if name == "0":
                    return whole
                return kb.canonical(groups.get(name) or "")

            val = _TEMPLATE.sub(sub, val)
            if key == "variant":
                val = kb.canonical(val)
        if key in INT_PROPERTIES and isinstance(val, str) and val.isdigit():
            val = int(val)
        out[key] = val
    return out


def interpret_value(domain: Optional[str], api_id: str, value: object, kb: KnowledgeBase) -> tuple[dict, bool]:
    """Properties implied by one constant argument value.

    Exact rules for the API come first, then exact rules for the domain,
    then pattern rules, then transformation parsing for cipher-like domains.
    """
    for scope in ("api", "domain"):
        for rule in kb.semantics:
            if not rule.is_exact or not _same_literal(rule.exact, value):
                continue
            if (scope == "api" and rule.api == api_id) or (scope == "domain" and rule.api is None and rule.domain == domain):
                return _fill(rule.properties, {}, str(value), kb), False
    if isinstance(value, str):
        for rule in _ordered_patterns(kb):
            if rule.api not in (None, api_id) or (rule.api is None and rule.domain != domain):
                continue
            m = rule.pattern.search(value)
            if m:
                return _fill(rule.properties, m.groupdict(), value, kb), False
        if domain in TRANSFORMATION_DOMAINS:
            props, unrec = parse_transformation(value, kb)
            if domain == "keygen-secret":
                props = {k: v for k, v in props.items() if k in ("primitive", "variant", "keySize")}
            return props, unrec
    return {}, domain is not None


def resolve_semantics(api: ApiSpec, arg_values: Sequence[Optional[ConstValue]], kb: KnowledgeBase) -> SemanticsResult:
    """Properties and material descriptors for one call.

    ``arg_values[i]`` is the constant-lattice value of argument ``i`` in the
    context of interest (None when not computed). Only single Constants are
    interpreted; anything else leaves the property absent.
    """
    result = SemanticsResult()
    for key, val in api.properties:
        result.properties[key] = PropertyValue(val, None)
    for p in api.params:
        value = arg_values[p.index] if p.index < len(arg_values) else None
        if p.material:
            result.materials.append(MaterialDescriptor(p.material, p.role, p.index, value))
        if p.role not in VALUE_ROLES:
            continue
        if value is None or not value.is_constant:
            result.unknown_roles.append(p.role)
            continue
        literal = value.value
        if p.domain is not None:
            props, unrec = interpret_value(p.domain, api.id, literal, kb)
            result.unrecognized = result.unrecognized or unrec
            for key, val in props.items():
                result.properties[key] = PropertyValue(val, p.index)
        elif p.role == "keysize" and isinstance(literal, int) and not isinstance(literal, bool):
            result.properties["keySize"] = PropertyValue(literal, p.index)
        elif p.role == "iterations" and isinstance(literal, int):
            result.properties["iterations"] = PropertyValue(literal, p.index)
        elif p.role == "taglen" and isinstance(literal, int):
            result.properties["tagLength"] = PropertyValue(literal, p.index)
    return result
