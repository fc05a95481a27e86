"""Vulnerability rules over crypto assets.

Rules read only a :class:`CryptoAsset` and a :class:`PolicySet`; they never
see syntax, so the same rule set applies whatever language produced the
asset. Reports follow the shape of a classic SAST finding: an ordinal id, a
lowercase CWE classification, a score, a documentation URL, a message and
the references (asset fields or materials) that triggered it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

from .assets import CryptoAsset, CryptoMaterial, Evidence
from .kb.model import PolicySet

CWE_URL = "https://cwe.mitre.org/data/definitions/{}.html"
SCORES = ("Minor", "Major", "Critical")
HARDCODED_KEY_KINDS = ("secretKey", "privateKey", "iv", "nonce", "salt")
ENCRYPTION_FUNCTIONS = ("encrypt", "decrypt", "encapsulate", "decapsulate")


@dataclass(frozen=True)
class Reference:
    type: str
    value: str
    context: Evidence

    def to_json(self) -> dict:
        return {
            "type": self.type,
            "value": self.value,
            "context": {"type": self.context.finding_type, "location": self.context.location.to_json()},
        }


@dataclass(frozen=True)
class Finding:
    message: str
    reference: Reference


@dataclass(frozen=True)
class VulnRule:
    cwe_id: str
    check: Callable[[CryptoAsset, PolicySet], list[Finding]]
    title: str


@dataclass
class VulnerabilityReport:
    vulnerability_id: str
    classification: str
    vulnerability_score: str
    vulnerability_documentation_reference: str
    debug_message: str
    references: list[Reference] = field(default_factory=list)
    asset_id: str = ""

    def to_json(self) -> dict:
        return {
            "vulnerabilityId": self.vulnerability_id,
            "classification": self.classification,
            "vulnerabilityScore": self.vulnerability_score,
            "vulnerabilityDocumentationReference": self.vulnerability_documentation_reference,
            "debugMessage": self.debug_message,
            "references": [r.to_json() for r in self.references],
        }


# -- reference helpers -----------------------------------------------------------------

def _prop_ref(asset: CryptoAsset, name: str) -> Reference:
    value = asset.properties[name]
    sources = asset.sources.get(name) or []
    context = sources[0].call if sources else _fallback(asset)
    return Reference(name, str(value), context)


def _material_ref(m: CryptoMaterial) -> Reference:
    return Reference(m.kind, m.value if m.value is not None else m.value_state, m.evidence)


def _fallback(asset: CryptoAsset) -> Evidence:
    return asset.evidence[0] if asset.evidence else Evidence("FUNCTION_CALL", asset.location, asset.api_name)


def _norm(name: Optional[str]) -> str:
    return (name or "").replace("_", "-").upper()


def _in(name: Optional[str], names: Iterable[str]) -> bool:
    key = _norm(name)
    return bool(key) and any(key == _norm(n) for n in names)


def _hardcoded(asset: CryptoAsset, kinds: Iterable[str]) -> list[CryptoMaterial]:
    kinds = tuple(kinds)
    return [m for m in asset.materials if m.kind in kinds and m.value_state == "hardcoded"]


# -- the rules ---------------------------------------------------------------------------

def _cwe327(asset: CryptoAsset, policy: PolicySet) -> list[Finding]:
    out = []
    variant = asset.variant
    if variant and _in(variant, policy.weak_variants) and not _in(variant, policy.allowed_variants):
        out.append(Finding(f"Use of broken or risky cryptographic algorithm: {variant}", _prop_ref(asset, "variant")))
    mode = asset.mode
    if mode and asset.primitive in policy.blockcipher_primitives and _in(mode, policy.weak_modes):
        out.append(Finding(f"Use of broken or risky cryptographic mode: {mode}", _prop_ref(asset, "mode")))
    digest = asset.get("digest")
    if digest and asset.primitive in ("mac", "signature", "kdf") and _in(digest, policy.weak_hashes):
        out.append(Finding(f"Use of broken or risky hash function: {digest}", _prop_ref(asset, "digest")))
    if policy.report_quantum_unsafe and variant and _in(variant, policy.quantum_unsafe) \
            and not _in(variant, policy.allowed_variants):
        out.append(Finding(f"Use of quantum-unsafe cryptographic algorithm: {variant}", _prop_ref(asset, "variant")))
    return out


def _cwe328(asset: CryptoAsset, policy: PolicySet) -> list[Finding]:
    if asset.primitive == "hash" and _in(asset.variant, policy.weak_hashes):
        return [Finding(f"Use of weak hash: {asset.variant}", _prop_ref(asset, "variant"))]
    return []


def _min_bits(asset: CryptoAsset, policy: PolicySet) -> Optional[int]:
    for name in (asset.variant, asset.get("curve")):
        for key, bits in policy.min_asym_key_bits.items():
            if name and _norm(name) == _norm(key):
                return bits
    return None


def _cwe326(asset: CryptoAsset, policy: PolicySet) -> list[Finding]:
    size = asset.key_size
    minimum = _min_bits(asset, policy)
    if isinstance(size, int) and minimum is not None and size < minimum:
        return [Finding(f"Inadequate encryption strength: {asset.variant} key size {size} below {minimum}",
                        _prop_ref(asset, "keySize"))]
    return []


def _cwe916(asset: CryptoAsset, policy: PolicySet) -> list[Finding]:
    it = asset.get("iterations")
    if isinstance(it, int) and it <= policy.min_pbe_iterations:
        return [Finding(f"Password hash with insufficient computational effort: {it} iterations",
                        _prop_ref(asset, "iterations"))]
    return []


def _cwe259(asset: CryptoAsset, policy: PolicySet) -> list[Finding]:
    return [Finding("Use of hard-coded password", _material_ref(m)) for m in _hardcoded(asset, ("password",))]


def _cwe321(asset: CryptoAsset, policy: PolicySet) -> list[Finding]:
    return [Finding(f"Use of hard-coded cryptographic {m.kind}", _material_ref(m))
            for m in _hardcoded(asset, HARDCODED_KEY_KINDS)]


def _cwe335(asset: CryptoAsset, policy: PolicySet) -> list[Finding]:
    return [Finding("Predictable seed in pseudo-random number generator", _material_ref(m))
            for m in _hardcoded(asset, ("seed",))]


def _cwe338(asset: CryptoAsset, policy: PolicySet) -> list[Finding]:
    return [
        Finding(f"Use of cryptographically weak pseudo-random number generator: {r.api}",
                Reference("randomSource", r.api, r.evidence))
        for r in asset.random_sources if r.api not in policy.strong_prng_apis
    ]


def _cwe759(asset: CryptoAsset, policy: PolicySet) -> list[Finding]:
    passwords = [m for m in asset.materials if m.kind == "password"]
    password_hash = (asset.function == "keyderive" and asset.primitive == "kdf") or bool(passwords)
    if not password_hash or any(m.kind == "salt" for m in asset.materials):
        return []
    ref = _material_ref(passwords[0]) if passwords else Reference("function", asset.function, _fallback(asset))
    return [Finding("Use of a one-way hash without a salt", ref)]


def _cwe780(asset: CryptoAsset, policy: PolicySet) -> list[Finding]:
    padding = asset.padding
    if _norm(asset.variant) != "RSA" or asset.function not in ENCRYPTION_FUNCTIONS or padding is None:
        return []
    if _norm(padding).startswith("OAEP"):
        return []
    return [Finding(f"Use of RSA algorithm without OAEP: padding {padding}", _prop_ref(asset, "padding"))]


RULES: tuple[VulnRule, ...] = (
    VulnRule("cwe259", _cwe259, "hard-coded password"),
    VulnRule("cwe321", _cwe321, "hard-coded cryptographic key"),
    VulnRule("cwe326", _cwe326, "inadequate encryption strength"),
    VulnRule("cwe327", _cwe327, "broken or risky cryptographic algorithm"),
    VulnRule("cwe328", _cwe328, "weak hash"),
    VulnRule("cwe335", _cwe335, "predictable PRNG seed"),
    VulnRule("cwe338", _cwe338, "weak PRNG"),
    VulnRule("cwe759", _cwe759, "one-way hash without salt"),
    VulnRule("cwe780", _cwe780, "RSA without OAEP"),
    VulnRule("cwe916", _cwe916, "insufficient password hash effort"),
)


def _cwe_number(cwe: str) -> int:
    return int(cwe[3:])


def evaluate_rules(assets: Iterable[CryptoAsset], policy: PolicySet,
                   rules: Iterable[VulnRule] = RULES) -> list[VulnerabilityReport]:
    """Apply every rule to every asset; one report per (asset, CWE).

    Reports are ordered by the asset's file and line, then CWE number,
    and numbered from 1 in that order.
    """
    rules = tuple(rules)
    pending = []
    for asset in assets:
        for rule in rules:
            findings = rule.check(asset, policy)
            if not findings:
                continue
            refs = []
            for f in findings:
                if f.reference not in refs:
                    refs.append(f.reference)
            message = "; ".join(dict.fromkeys(f.message for f in findings))
            loc = asset.location
            key = (loc.file_name, loc.line, _cwe_number(rule.cwe_id), loc.start_column, asset.asset_id)
            pending.append((key, rule.cwe_id, message, refs, asset.asset_id))
    pending.sort(key=lambda p: p[0])
    reports = []
    for i, (_key, cwe, message, refs, aid) in enumerate(pending, start=1):
        reports.append(VulnerabilityReport(
            str(i), cwe, policy.severity(cwe), CWE_URL.format(_cwe_number(cwe)), message, refs, aid,
        ))
    return reports


def reports_json(reports: Iterable[VulnerabilityReport]) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2, ensure_ascii=False) + "\n"


def emit_vuln_report(reports: Iterable[VulnerabilityReport], out_path: Path | str) -> Path:
    """Write reports as a UTF-8 JSON array; raises OSError on IO failure."""
    path = Path(out_path)
    path.write_text(reports_json(reports), encoding="utf-8")
    return path
