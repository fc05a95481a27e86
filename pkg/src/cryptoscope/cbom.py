"""CycloneDX 1.6 style CBOM writer.

One ``cryptographic-asset`` component per crypto asset. The field mapping
is documented in ``docs/cbom-mapping.md``; anything the standard has no
slot for goes into namespaced ``cryptoscope:*`` properties.
"""

from __future__ import annotations

import hashlib
import json
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from . import __version__
from .assets import CryptoAsset, Evidence

TOOL_NAME = "cryptoscope"
SPEC_VERSION = "1.6"

# scanner primitive -> CycloneDX primitive enum
PRIMITIVES = {
    "blockcipher": "block-cipher",
    "streamcipher": "stream-cipher",
    "keyagree": "key-agree",
    "ae": "ae",
    "hash": "hash",
    "mac": "mac",
    "signature": "signature",
    "pke": "pke",
    "kdf": "kdf",
    "kem": "kem",
    "drbg": "drbg",
    "xof": "xof",
}
MODES = ("cbc", "ecb", "ccm", "gcm", "cfb", "ofb", "ctr")
PADDINGS = {"PKCS5": "pkcs5", "PKCS7": "pkcs7", "PKCS1": "pkcs1v15", "OAEP": "oaep", "NoPadding": "raw"}
# asset properties without a CycloneDX slot
EXTRA_PROPERTIES = ("blockSize", "digest", "iterations", "tagLength")


def _mode(mode: Optional[str]) -> Optional[str]:
    if mode is None:
        return None
    low = mode.lower()
    return low if low in MODES else "other"


def _padding(padding: Optional[str]) -> Optional[str]:
    if padding is None:
        return None
    if padding.upper().startswith("OAEP"):
        return "oaep"
    return PADDINGS.get(padding, "other")


def _occurrence(ev: Evidence) -> dict:
    loc = ev.location
    return {
        "location": loc.file_name,
        "line": loc.line,
        "offset": loc.start_column,
        "additionalContext": f"{ev.finding_type} {loc.start_column}-{loc.end_column}: {ev.snippet}",
    }


def component(asset: CryptoAsset) -> dict:
    """Map one asset to a CycloneDX component."""
    algo: dict = {}
    if asset.primitive:
        algo["primitive"] = PRIMITIVES.get(asset.primitive, "other")
    if asset.variant:
        algo["variant"] = asset.variant
    if asset.key_size is not None:
        algo["parameterSetIdentifier"] = str(asset.key_size)
    if asset.get("curve"):
        algo["curve"] = asset.get("curve")
    if asset.mode:
        algo["mode"] = _mode(asset.mode)
    if asset.padding:
        algo["padding"] = _padding(asset.padding)
    algo["cryptoFunctions"] = [asset.function]
    if asset.key_size is not None:
        algo["keySize"] = asset.key_size

    props = [
        {"name": "cryptoscope:assetId", "value": asset.asset_id},
        {"name": "cryptoscope:api", "value": asset.api_name},
        {"name": "cryptoscope:completeness", "value": "incomplete" if asset.incomplete else "complete"},
        {"name": "cryptoscope:context", "value": asset.context_note},
    ]
    if asset.mode:
        props.append({"name": "cryptoscope:mode", "value": asset.mode})
    if asset.padding:
        props.append({"name": "cryptoscope:padding", "value": asset.padding})
    for name in EXTRA_PROPERTIES:
        if name in asset.properties:
            props.append({"name": f"cryptoscope:{name}", "value": str(asset.properties[name])})
    for m in asset.materials:
        desc = m.value_state if m.size_bits is None else f"{m.value_state} {m.size_bits} bits"
        props.append({"name": f"cryptoscope:material:{m.kind}", "value": desc})
    for r in asset.random_sources:
        props.append({"name": "cryptoscope:randomSource", "value": r.api})
    if asset.merged:
        props.append({"name": "cryptoscope:mergeCount", "value": str(asset.merge_count)})
    for note in asset.notes:
        props.append({"name": "cryptoscope:note", "value": note})

    occurrences = [_occurrence(ev) for ev in asset.evidence] or [
        _occurrence(Evidence("FUNCTION_CALL", asset.location, asset.api_name))
    ]
    return {
        "type": "cryptographic-asset",
        "bom-ref": f"crypto-asset-{asset.asset_id}",
        "name": asset.variant or asset.api_name,
        "cryptoProperties": {"assetType": asset.asset_type, "algorithmProperties": algo},
        "evidence": {"occurrences": occurrences},
        "properties": props,
    }


def build_cbom(assets: Iterable[CryptoAsset], timestamp: Optional[str] = None,
               serial: Optional[str] = None) -> dict:
    """The CBOM document as a dict.

    Without an injected serial number one is derived from the components,
    so equal inventories share a serial; without a timestamp the current
    UTC time is used.
    """
    components = [component(a) for a in assets]
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")
    if serial is None:
        digest = hashlib.sha256(json.dumps(components, sort_keys=True).encode()).hexdigest()
        serial = f"urn:uuid:{uuid.UUID(digest[:32])}"
    elif not serial.startswith("urn:uuid:"):
        serial = f"urn:uuid:{serial}"
    return {
        "bomFormat": "CycloneDX",
        "specVersion": SPEC_VERSION,
        "serialNumber": serial,
        "version": 1,
        "metadata": {
            "timestamp": timestamp,
            "tools": {"components": [{"type": "application", "name": TOOL_NAME, "version": __version__}]},
        },
        "components": components,
    }


def cbom_json(assets: Iterable[CryptoAsset], timestamp: Optional[str] = None, serial: Optional[str] = None) -> str:
    return json.dumps(build_cbom(assets, timestamp, serial), indent=2, ensure_ascii=False) + "\n"


def emit_cbom(assets: Iterable[CryptoAsset], out_path: Path | str, timestamp: Optional[str] = None,
              serial: Optional[str] = None) -> Path:
    """Write the CBOM as UTF-8 JSON; raises OSError on IO failure."""
    path = Path(out_path)
    path.write_text(cbom_json(assets, timestamp, serial), encoding="utf-8")
    return path
