"""Crypto assets built from slices.

Each slice yields one asset: the properties implied by the calls of the
criterion's chain (instantiation, initialization, updates), the crypto
material reaching those calls and the code evidence for every value.
Assets are plain data; the vulnerability rules and the CBOM writer only
see this module's types.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .frontend import AstNode, Kind, Location
from .kb import KnowledgeBase, resolve_semantics
from .slicer import MaterialBinding, RelatedCall, Slice
from .values import render_value

FINDING_TYPES = ("FUNCTION_CALL", "ARGUMENT", "PROPERTY_SOURCE")
# properties reported on an asset, in output order
ASSET_PROPERTIES = ("primitive", "variant", "mode", "padding", "keySize", "blockSize", "digest", "curve",
                    "iterations", "tagLength")
_KIND_ORDER = {"instantiation": 0, "randomsource": 0, "materialCtor": 1, "keysource": 1, "initialization": 2,
               "update": 3, "criterion": 4}
# override levels: transformation defaults < explicit arguments
_DEFAULT, _EXPLICIT = 1, 2
_EXPLICIT_KEYS = frozenset({"keySize", "iterations", "tagLength", "curve", "function"})


class ConflictingProperties(Exception):
    """Two calls of one chain imply different values for a property."""

    def __init__(self, name: str, first: "Evidence", second: "Evidence"):
        super().__init__(f"conflicting {name}: {first.location.short()} vs {second.location.short()}")
        self.name = name
        self.first = first
        self.second = second


@dataclass(frozen=True)
class Evidence:
    finding_type: str
    location: Location
    snippet: str

    def __post_init__(self) -> None:
        if self.finding_type not in FINDING_TYPES:
            raise ValueError(f"unknown finding type {self.finding_type}")

    def to_json(self) -> dict:
        return {"findingType": self.finding_type, "location": self.location.to_json(), "snippet": self.snippet}


@dataclass(frozen=True)
class PropertySource:
    """Where one property value came from."""

    name: str
    value: object
    call: Evidence  # the API call implying the value
    argument: Optional[Evidence] = None  # the argument or constant holding it


@dataclass(frozen=True)
class CryptoMaterial:
    kind: str
    value_state: str  # hardcoded | generated | external
    evidence: Evidence
    size_bits: Optional[int] = None
    value: Optional[str] = None  # rendered constant for hardcoded material
    source_api: Optional[str] = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "valueState": self.value_state, "evidence": self.evidence.to_json()}
        if self.size_bits is not None:
            out["sizeBits"] = self.size_bits
        if self.value is not None:
            out["value"] = self.value
        if self.source_api is not None:
            out["sourceApi"] = self.source_api
        return out


@dataclass(frozen=True)
class RandomSource:
    api: str
    evidence: Evidence
    algorithm: Optional[str] = None

    def to_json(self) -> dict:
        out = {"api": self.api, "evidence": self.evidence.to_json()}
        if self.algorithm:
            out["algorithm"] = self.algorithm
        return out


@dataclass
class CryptoAsset:
    asset_id: str
    function: str
    criterion_api: str  # KB id of the criterion call
    api_name: str  # short qualified call name, e.g. ``Cipher.doFinal``
    location: Location  # criterion call
    properties: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)  # property -> list[PropertySource]
    materials: list[CryptoMaterial] = field(default_factory=list)
    random_sources: list[RandomSource] = field(default_factory=list)
    evidence: list[Evidence] = field(default_factory=list)
    contexts: list[list[str]] = field(default_factory=list)
    incomplete: bool = False
    merged: bool = False
    merge_count: int = 1
    notes: list[str] = field(default_factory=list)
    asset_type: str = "algorithm"

    def get(self, name: str, default=None):
        return self.properties.get(name, default)

    @property
    def primitive(self) -> Optional[str]:
        return self.properties.get("primitive")

    @property
    def variant(self) -> Optional[str]:
        return self.properties.get("variant")

    @property
    def mode(self) -> Optional[str]:
        return self.properties.get("mode")

    @property
    def padding(self) -> Optional[str]:
        return self.properties.get("padding")

    @property
    def key_size(self) -> Optional[int]:
        return self.properties.get("keySize")

    @property
    def context_note(self) -> str:
        if not self.contexts or self.contexts == [[]]:
            return "any caller"
        return "; ".join(" > ".join(c) if c else "any caller" for c in self.contexts)

    def crypto_key(self) -> tuple:
        """Everything that makes two assets the same crypto usage."""
        return (
            self.location,
            self.function,
            tuple(sorted((k, str(v)) for k, v in self.properties.items())),
            tuple(sorted((m.kind, m.value_state, m.size_bits or 0, m.value or "", m.evidence.location)
                         for m in self.materials)),
            tuple(sorted((r.api, r.evidence.location) for r in self.random_sources)),
        )

    def to_json(self) -> dict:
        out: dict = {
            "assetId": self.asset_id,
            "assetType": self.asset_type,
            "function": self.function,
            "api": self.api_name,
            "location": self.location.to_json(),
        }
        for name in ASSET_PROPERTIES:
            if name in self.properties:
                out[name] = self.properties[name]
        out["materials"] = [m.to_json() for m in self.materials]
        if self.random_sources:
            out["randomSources"] = [r.to_json() for r in self.random_sources]
        out["evidence"] = [e.to_json() for e in self.evidence]
        out["contextNote"] = self.context_note
        out["incomplete"] = self.incomplete
        out["merged"] = self.merged
        if self.merge_count > 1:
            out["mergeCount"] = self.merge_count
        if self.notes:
            out["notes"] = list(self.notes)
        return out


@dataclass
class CallChain:
    chain_id: int
    calls: list[RelatedCall]
    # (consumer call, parameter index, role) this chain's producer feeds; None for the criterion chain
    feeds: Optional[tuple[AstNode, int, Optional[str]]] = None
    consumer_chain: Optional[int] = None
    root: Optional[RelatedCall] = None  # the criterion, or the producer feeding another chain


# -- evidence helpers --------------------------------------------------------------

def call_span(call: AstNode) -> tuple[Location, str]:
    """Location and text of a call from its method name to the closing parenthesis.

    Constructor calls and receiver-less calls keep their full span. Calls
    spanning several lines also keep their full span.
    """
    loc = call.location
    if call.kind is not Kind.METHOD_CALL or call.receiver is None or loc.end_line != loc.line:
        return loc, call.text
    data = call.text.encode("utf-8")
    recv = call.receiver.text.encode("utf-8")
    offset = data.find(call.name.encode("utf-8"), len(recv))
    if offset < 0 or call.receiver.location.end_line != loc.line:
        return loc, call.text
    new = Location(loc.file_name, loc.line, loc.start_column + offset, loc.end_column)
    return new, data[offset:].decode("utf-8", errors="replace")


def call_evidence(call: AstNode) -> Evidence:
    loc, text = call_span(call)
    return Evidence("FUNCTION_CALL", loc, text)


def argument_evidence(arg: AstNode) -> Evidence:
    return Evidence("ARGUMENT", arg.location, arg.text)


# -- chains --------------------------------------------------------------------------

def relate_api_calls(sl: Slice, kb: Optional[KnowledgeBase] = None) -> list[CallChain]:
    """Partition the slice's related calls into chains rooted at the criterion.

    Chain 0 holds the criterion and the calls on the same object; every
    other chain starts at a producer and records which call and parameter
    it feeds.
    """
    by_id: dict[int, list[RelatedCall]] = {}
    for rc in sl.related_calls:
        by_id.setdefault(rc.chain, []).append(rc)
    chain_of_call = {rc.call: rc.chain for rc in sl.related_calls}
    chains = []
    for cid in sorted(by_id):
        calls = sorted(by_id[cid], key=lambda rc: (_KIND_ORDER.get(rc.api.kind, 5), _loc_key(rc.location)))
        chain = CallChain(cid, calls)
        for rc in calls:
            if cid == 0 and rc.relation == "criterion":
                chain.root = rc
            elif rc.target is not None and rc.relation == "ResultFlowsToParam" and chain_of_call.get(rc.target) != cid:
                chain.feeds = (rc.target, rc.param_index, rc.via_role)
                chain.consumer_chain = chain_of_call.get(rc.target)
                chain.root = rc
                break
        chains.append(chain)
    return chains


def _loc_key(loc: Location) -> tuple:
    return loc.file_name, loc.line, loc.start_column


# -- property resolution ---------------------------------------------------------------

class _Props:
    def __init__(self) -> None:
        self.values: dict[str, tuple[int, object, PropertySource]] = {}
        self.conflicts: list[ConflictingProperties] = []
        self.extra_sources: dict[str, list[PropertySource]] = {}

    def offer(self, name: str, value: object, level: int, source: PropertySource) -> None:
        current = self.values.get(name)
        if current is None or level > current[0]:
            self.values[name] = (level, value, source)
            return
        if level < current[0]:
            return
        if current[1] == value:
            self.extra_sources.setdefault(name, []).append(source)
            return
        if current[2].call.location == source.call.location:
            return  # a call never conflicts with itself
        self.conflicts.append(ConflictingProperties(name, current[2].call, source.call))
        self.extra_sources.setdefault(name, []).append(source)

    def get(self, name: str):
        entry = self.values.get(name)
        return entry[1] if entry else None

    def level(self, name: str) -> int:
        entry = self.values.get(name)
        return entry[0] if entry else 0


def _call_properties(rc: RelatedCall, kb: KnowledgeBase, props: _Props, suppressed: set,
                     default_level: int = _DEFAULT) -> tuple[list[str], bool]:
    """Offer the properties implied by one call; returns (unknown roles, unrecognized)."""
    sem = resolve_semantics(rc.api, rc.arg_values, kb)
    call_ev = call_evidence(rc.call)
    args = rc.call.args
    for name, pv in sem.properties.items():
        arg_ev = None
        if pv.param_index is not None and pv.param_index < len(args):
            arg_ev = argument_evidence(args[pv.param_index])
        explicit = rc.api.kind in ("initialization", "materialCtor") and name in _EXPLICIT_KEYS
        level = _EXPLICIT if explicit or (name == "function" and pv.param_index is not None) else default_level
        props.offer(name, pv.value, level, PropertySource(name, pv.value, call_ev, arg_ev))
    unknown = []
    for p in rc.api.params:
        if p.role in sem.unknown_roles and (rc.call, p.index) not in suppressed:
            unknown.append(f"{rc.api.short_name}:{p.role}")
    return unknown, sem.unrecognized


def _chain_properties(chain: CallChain, chains: list[CallChain], kb: KnowledgeBase) -> tuple[_Props, list[str], bool]:
    """Resolve a chain's properties, folding in spec objects fed to its calls."""
    props = _Props()
    unknown: list[str] = []
    unrecognized = False
    fed = [c for c in chains if c.consumer_chain == chain.chain_id and c.feeds is not None]
    suppressed = {(c.feeds[0], c.feeds[1]) for c in fed}
    for rc in chain.calls:
        u, unrec = _call_properties(rc, kb, props, suppressed)
        unknown.extend(u)
        unrecognized |= unrec
    for c in fed:
        root = c.root
        if root is None or root.api.kind != "materialCtor":
            continue
        u, unrec = _call_properties(root, kb, props, set())
        unknown.extend(u)
        unrecognized |= unrec
    return props, unknown, unrecognized


def _chain_key_size(chain: CallChain, chains: list[CallChain], kb: KnowledgeBase, seen: Optional[set] = None) -> Optional[int]:
    """Key size of whatever a producer chain generates (through passthroughs)."""
    seen = seen or set()
    if chain.chain_id in seen:
        return None
    seen.add(chain.chain_id)
    props, _u, _r = _chain_properties(chain, chains, kb)
    size = props.get("keySize")
    return size if isinstance(size, int) else None


def asset_id(location: Location, contexts: Iterable[Iterable[str]]) -> str:
    key = location.short() + "|" + "|".join(">".join(c) for c in contexts)
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


def _context_strings(ctx) -> list[str]:
    return [site.location.short() for site in ctx]


def _material_from_binding(m: MaterialBinding, chains: list[CallChain], kb: KnowledgeBase,
                           chain_by_id: dict) -> CryptoMaterial:
    size = m.size_bits
    if m.state == "hardcoded":
        ev = Evidence("ARGUMENT", m.introduced_at, m.snippet)
        value = render_value(m.value.kind, m.value.value) if m.value is not None and m.value.is_constant else None
        return CryptoMaterial(m.kind, "hardcoded", ev, size, value, None)
    if m.producer is not None:
        chain = chain_by_id.get(m.producer.chain)
        if chain is not None and size is None:
            size = _chain_key_size(chain, chains, kb)
        ev = call_evidence(m.producer.call)
        return CryptoMaterial(m.kind, m.state, ev, size, None, m.source_api)
    return CryptoMaterial(m.kind, m.state, Evidence("ARGUMENT", m.introduced_at, m.snippet), size, None, m.source_api)


def _data_only_chains(chains: list[CallChain]) -> set[int]:
    """Chains linked to the criterion only through plain data (a digest fed into update)."""
    out: set[int] = set()
    changed = True
    while changed:
        changed = False
        for c in chains:
            if c.chain_id == 0 or c.chain_id in out or c.feeds is None:
                continue
            if c.feeds[2] == "data" or c.consumer_chain in out:
                out.add(c.chain_id)
                changed = True
    return out


def build_asset(sl: Slice, chains: list[CallChain], kb: KnowledgeBase) -> CryptoAsset:
    """One asset from one slice.

    Properties come from chain 0 (plus spec objects fed to it); the
    function comes from the initialization's operation mode when the
    criterion can complete several functions; keySize prefers an explicit
    argument, then the key material size, then the transformation default.
    Conflicts are kept, flagged and evidenced.
    """
    crit = sl.criterion
    chain0 = next(c for c in chains if c.chain_id == 0)
    chain_by_id = {c.chain_id: c for c in chains}
    props, unknown, unrecognized = _chain_properties(chain0, chains, kb)
    notes: list[str] = []
    incomplete = bool(sl.truncated)
    if sl.truncated:
        notes.append("slice budget exceeded")
    if unknown:
        incomplete = True
        notes.append("unknown values: " + ", ".join(sorted(set(unknown))))
    if unrecognized:
        incomplete = True
        notes.append("unrecognized algorithm name")
    if props.get("variant") is None and not unknown and not unrecognized:
        incomplete = True
        notes.append("algorithm not determined")
    for conflict in props.conflicts:
        incomplete = True
        notes.append(str(conflict))

    skip = _data_only_chains(chains)
    materials: list[CryptoMaterial] = []
    for m in sl.materials:
        if m.consumer.chain in skip:
            continue
        materials.append(_material_from_binding(m, chains, kb, chain_by_id))
    produced = crit.api.produces_material
    if produced:
        kinds = ("privateKey", "publicKey") if produced == "keyPair" else (produced,)
        for kind in kinds:
            materials.append(CryptoMaterial(kind, "generated", call_evidence(crit.call), None, None, crit.api.id))

    # function
    functions = crit.functions
    fn = props.get("function")
    if len(functions) == 1:
        function = functions[0]
    elif fn in functions:
        function = fn
    else:
        function = functions[0]
        incomplete = True
        notes.append(f"operation not determined; assumed {function}")

    # key size: explicit > material > default
    values = {name: props.get(name) for name in ASSET_PROPERTIES if props.get(name) is not None}
    sources = {name: [props.values[name][2]] + props.extra_sources.get(name, []) for name in values}
    if props.level("keySize") < _EXPLICIT:
        key_kinds = ("secretKey", "privateKey", "publicKey")
        sized = [m for m in materials if m.kind in key_kinds and m.size_bits and m.source_api != crit.api.id]
        if sized:
            values["keySize"] = sized[0].size_bits
            sources["keySize"] = [PropertySource("keySize", sized[0].size_bits, sized[0].evidence)]
    if produced and "keySize" in values:
        materials = [replace(m, size_bits=values["keySize"]) if m.source_api == crit.api.id and m.size_bits is None
                     else m for m in materials]

    random_sources = []
    for c in chains:
        if c.chain_id in skip:
            continue
        for rc in c.calls:
            if rc.api.kind == "randomsource":
                alg = None
                if rc.arg_values and rc.arg_values[0].is_constant and rc.arg_values[0].kind == "string":
                    alg = rc.arg_values[0].value
                random_sources.append(RandomSource(rc.api.id, call_evidence(rc.call), alg))

    evidence: list[Evidence] = []
    for c in chains:
        if c.chain_id in skip and c.chain_id != 0:
            continue
        for rc in c.calls:
            evidence.append(call_evidence(rc.call))
    for name, srcs in sources.items():
        for src in srcs:
            if src.argument is not None:
                evidence.append(src.argument)
                val_loc = _value_origin(sl, src)
                if val_loc is not None:
                    evidence.append(val_loc)
    for m in materials:
        evidence.append(m.evidence)
    evidence = _unique(evidence)

    ctx_strings = _context_strings(sl.context)
    aid = asset_id(crit.location, [ctx_strings])
    if sl.merged_context:
        notes.append("contexts beyond the limit joined")
    return CryptoAsset(
        asset_id=aid,
        function=function,
        criterion_api=crit.api.id,
        api_name=crit.api.short_name,
        location=crit.location,
        properties=values,
        sources=sources,
        materials=_unique_materials(materials),
        random_sources=_unique(random_sources),
        evidence=evidence,
        contexts=[ctx_strings],
        incomplete=incomplete,
        merged=sl.merged_context,
        notes=notes,
    )


def _value_origin(sl: Slice, src: PropertySource) -> Optional[Evidence]:
    """A PROPERTY_SOURCE evidence when the constant was introduced away from the argument."""
    if src.argument is None:
        return None
    for arg, value in sl.values.items():
        if arg.location == src.argument.location and value.provenance:
            first = min(value.provenance)
            if first != src.argument.location and value.is_constant:
                return Evidence("PROPERTY_SOURCE", first, render_value(value.kind, value.value))
    return None


def _unique(items: list) -> list:
    seen, out = set(), []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def _unique_materials(items: list[CryptoMaterial]) -> list[CryptoMaterial]:
    items = _unique(items)
    return sorted(items, key=lambda m: (m.kind, _loc_key(m.evidence.location), m.value_state))


def build_assets(slices: Iterable[Slice], kb: KnowledgeBase) -> list[CryptoAsset]:
    return [build_asset(sl, relate_api_calls(sl, kb), kb) for sl in slices]


def dedupe_assets(assets: list[CryptoAsset]) -> list[CryptoAsset]:
    """Merge assets that differ only in their calling context."""
    groups: dict[tuple, list[CryptoAsset]] = {}
    for a in assets:
        groups.setdefault(a.crypto_key(), []).append(a)
    out = []
    for members in groups.values():
        if len(members) == 1:
            out.append(members[0])
            continue
        members = sorted(members, key=lambda a: a.asset_id)
        first = members[0]
        ids = sorted(m.asset_id for m in members)
        merged_id = hashlib.sha256("+".join(ids).encode("utf-8")).hexdigest()[:16]
        contexts = sorted((c for m in members for c in m.contexts), key=lambda c: (len(c), c))
        out.append(replace(
            first,
            asset_id=merged_id,
            contexts=contexts,
            evidence=_unique([e for m in members for e in m.evidence]),
            incomplete=any(m.incomplete for m in members),
            merged=True,
            merge_count=sum(m.merge_count for m in members),
            notes=_unique([n for m in members for n in m.notes]),
        ))
    out.sort(key=lambda a: (_loc_key(a.location), a.asset_id))
    return out
