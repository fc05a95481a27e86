"""Knowledge-base data model.

Everything here is phrased in cryptographic terms (roles, domains, material
kinds); nothing encodes the syntax of a subject language.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fnmatch import fnmatchcase
from typing import Optional

ROLES = frozenset(
    {"transformation", "keysize", "key", "iv", "salt", "seed", "password", "iterations", "opmode",
     "data", "taglen", "random", "irrelevant"}
)
API_KINDS = frozenset(
    {"instantiation", "initialization", "update", "criterion", "keysource", "randomsource", "materialCtor"}
)
FUNCTIONS = (
    "encrypt", "decrypt", "sign", "verify", "digest", "keygen", "keyderive", "tag", "encapsulate", "decapsulate",
)
MATERIAL_KINDS = frozenset(
    {"privateKey", "publicKey", "secretKey", "keyPair", "iv", "nonce", "salt", "seed", "password", "digest",
     "signature", "tag"}
)
PROPERTY_NAMES = (
    "primitive", "variant", "mode", "padding", "blockSize", "keySize", "function", "digest", "curve",
    "iterations", "tagLength",
)
INT_PROPERTIES = frozenset({"blockSize", "keySize", "iterations", "tagLength"})


@dataclass(frozen=True)
class ParamRole:
    index: int
    role: str
    value_kind: str = "any"  # string | int | bytes | chars | object | any
    domain: Optional[str] = None  # semantics domain for value interpretation
    material: Optional[str] = None  # material kind carried by this argument
    type: Optional[str] = None  # declared type, only used to tell overloads apart
    out: bool = False  # the call writes into this argument (e.g. nextBytes)


@dataclass(frozen=True)
class ApiSpec:
    id: str
    owner_type: str
    method_name: str
    arity: int
    kind: str
    params: tuple[ParamRole, ...] = ()
    static: bool = False
    produces_instance_of: Optional[str] = None
    functions: tuple[str, ...] = ()  # criterion: functions the call can complete
    produces_material: Optional[str] = None  # keysource: material kind of the result
    material_state: str = "generated"  # keysource: generated | external
    passthrough: bool = False  # result stands for the same crypto object as the receiver
    properties: tuple[tuple[str, object], ...] = ()  # API-level defaults (e.g. a digest class)
    source: str = ""  # KB file that defined this entry

    @property
    def signature(self) -> tuple[str, str, int]:
        return self.owner_type, self.method_name, self.arity

    @property
    def short_name(self) -> str:
        simple = self.owner_type.rsplit(".", 1)[-1]
        if self.method_name == "<init>":
            return f"new {simple}"
        return f"{simple}.{self.method_name}"

    def param(self, index: int) -> Optional[ParamRole]:
        for p in self.params:
            if p.index == index:
                return p
        return None

    def params_with_role(self, role: str) -> list[ParamRole]:
        return [p for p in self.params if p.role == role]

    @property
    def is_constructor(self) -> bool:
        return self.method_name == "<init>"


@dataclass(frozen=True)
class SemanticsRule:
    properties: tuple[tuple[str, object], ...]
    domain: Optional[str] = None
    api: Optional[str] = None
    exact: object = None
    pattern: Optional[re.Pattern] = None
    source: str = ""

    @property
    def is_exact(self) -> bool:
        return self.pattern is None


@dataclass(frozen=True)
class RelationRule:
    kind: str  # SameInstance | ResultFlowsToParam
    source_api: str  # id or glob over ids
    target_api: str
    param_index: Optional[int] = None

    def matches(self, source_id: str, target_id: str) -> bool:
        return fnmatchcase(source_id, self.source_api) and fnmatchcase(target_id, self.target_api)


@dataclass(frozen=True)
class AlgorithmInfo:
    """Library defaults for a bare algorithm name (``"AES"`` alone)."""

    name: str
    properties: tuple[tuple[str, object], ...]

    def get(self, key: str, default=None):
        return dict(self.properties).get(key, default)


@dataclass
class PolicySet:
    weak_variants: frozenset = frozenset()
    weak_modes: frozenset = frozenset()
    weak_hashes: frozenset = frozenset()
    quantum_unsafe: frozenset = frozenset()
    report_quantum_unsafe: bool = False
    strong_prng_apis: frozenset = frozenset()
    min_asym_key_bits: dict = field(default_factory=dict)
    min_pbe_iterations: int = 1000
    severities: dict = field(default_factory=dict)
    allowed_variants: frozenset = frozenset()
    blockcipher_primitives: frozenset = frozenset({"blockcipher", "ae"})

    def severity(self, cwe: str) -> str:
        return self.severities.get(cwe, "Major")


@dataclass
class KnowledgeBase:
    apis: dict[str, ApiSpec] = field(default_factory=dict)
    semantics: list[SemanticsRule] = field(default_factory=list)
    relations: list[RelationRule] = field(default_factory=list)
    algorithms: dict[str, AlgorithmInfo] = field(default_factory=dict)
    aliases: dict[str, str] = field(default_factory=dict)
    padding_aliases: dict[str, str] = field(default_factory=dict)
    ae_modes: frozenset = frozenset()
    constants: dict[str, object] = field(default_factory=dict)
    policy: PolicySet = field(default_factory=PolicySet)
    sources: list[str] = field(default_factory=list)
    _by_signature: dict = field(default_factory=dict, repr=False)

    def reindex(self) -> None:
        self._by_signature = {}
        for spec in self.apis.values():
            self._by_signature.setdefault(spec.signature, []).append(spec)

    def candidates(self, owner: Optional[str], name: str, arity: int) -> list[ApiSpec]:
        if owner is None:
            return []
        return self._by_signature.get((owner, name, arity), [])

    @property
    def owner_types(self) -> frozenset:
        return frozenset(spec.owner_type for spec in self.apis.values())

    @property
    def criteria(self) -> list[ApiSpec]:
        return [s for s in self.apis.values() if s.kind == "criterion"]

    def return_type(self, owner: str, name: str, arity: int) -> Optional[str]:
        """Result type of a library call, if some overload declares one."""
        for spec in self.candidates(owner, name, arity):
            if spec.produces_instance_of:
                return spec.produces_instance_of
        return None

    def related(self, kind: str, source_id: str, target_id: str) -> list[RelationRule]:
        return [r for r in self.relations if r.kind == kind and r.matches(source_id, target_id)]

    def canonical(self, name: str) -> str:
        return self.aliases.get(name, self.aliases.get(name.upper(), name))
