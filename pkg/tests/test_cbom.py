from __future__ import annotations

import json
import re
import uuid

import pytest

from cryptoscope import __version__
from cryptoscope.cbom import build_cbom, cbom_json, component, emit_cbom
from cryptoscope.scan import ScanConfig, analyze

from conftest import CORPUS, ROOT

MAPPING = (ROOT / "docs" / "cbom-mapping.md").read_text(encoding="utf-8")
TS = "2024-05-01T12:00:00Z"
SERIAL = "3e671687-395b-41f5-a30f-a58921a69b79"


def _assets(name: str):
    result, _ = analyze(ScanConfig(CORPUS / name))
    return result.assets


def _row(key: str) -> str:
    """The mapping-table row whose first cell is ``key``."""
    for line in MAPPING.splitlines():
        if line.startswith(f"| `{key}` |"):
            return line
    raise LookupError(key)


def _props(comp: dict) -> dict:
    out: dict = {}
    for p in comp["properties"]:
        out.setdefault(p["name"], []).append(p["value"])
    return out


# -- document ----------------------------------------------------------------------------------

def test_rsa_keygen_component():
    keygen = next(a for a in _assets("listing1") if a.function == "keygen")
    comp = component(keygen)
    algo = comp["cryptoProperties"]["algorithmProperties"]
    assert comp["type"] == "cryptographic-asset" and comp["name"] == "RSA"
    assert comp["cryptoProperties"]["assetType"] == "algorithm"
    assert algo == {"primitive": "pke", "variant": "RSA", "parameterSetIdentifier": "2048",
                    "cryptoFunctions": ["keygen"], "keySize": 2048}
    assert comp["bom-ref"] == f"crypto-asset-{keygen.asset_id}"


def test_empty_inventory():
    doc = build_cbom([], TS, SERIAL)
    assert doc["components"] == [] and doc["bomFormat"] == "CycloneDX" and doc["specVersion"] == "1.6"
    assert doc["metadata"]["tools"]["components"] == [{"type": "application", "name": "cryptoscope", "version": __version__}]


def test_injected_timestamp_and_serial():
    doc = build_cbom(_assets("listing1"), TS, SERIAL)
    assert doc["metadata"]["timestamp"] == TS
    assert doc["serialNumber"] == f"urn:uuid:{SERIAL}"
    assert build_cbom([], TS, f"urn:uuid:{SERIAL}")["serialNumber"] == f"urn:uuid:{SERIAL}"


def test_default_serial_depends_on_content():
    a, b = _assets("listing1"), _assets("listing3")
    s1, s2 = build_cbom(a, TS)["serialNumber"], build_cbom(b, TS)["serialNumber"]
    assert s1 == build_cbom(_assets("listing1"), TS)["serialNumber"] and s1 != s2
    uuid.UUID(s1.removeprefix("urn:uuid:"))


def test_default_timestamp_format():
    ts = build_cbom([])["metadata"]["timestamp"]
    assert re.fullmatch(r"\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ", ts)


def test_incomplete_asset_annotation(tmp_path):
    (src := tmp_path / "A.java").write_text(
        "import java.security.*;\nclass A {\n    String n;\n    void m(byte[] d) throws Exception {\n"
        "        MessageDigest.getInstance(n).digest(d);\n    }\n}\n", encoding="utf-8")
    result, _ = analyze(ScanConfig(tmp_path))
    (a,) = result.assets
    comp = component(a)
    assert _props(comp)["cryptoscope:completeness"] == ["incomplete"]
    assert comp["name"] == "MessageDigest.digest"
    assert "variant" not in comp["cryptoProperties"]["algorithmProperties"]
    assert src.exists()


def test_byte_identical_output(tmp_path):
    assets = _assets("discovery-app")
    p1 = emit_cbom(assets, tmp_path / "a.json", TS, SERIAL)
    p2 = emit_cbom(_assets("discovery-app"), tmp_path / "b.json", TS, SERIAL)
    assert p1.read_bytes() == p2.read_bytes()
    assert json.loads(p1.read_text(encoding="utf-8")) == build_cbom(assets, TS, SERIAL)


# -- the mapping document ---------------------------------------------------------------------

def test_document_keys_match_mapping():
    doc = build_cbom(_assets("listing1"), TS, SERIAL)
    for key in ("bomFormat", "specVersion", "serialNumber", "version", "components"):
        _row(key)
        assert key in doc
    assert '`"CycloneDX"`' in _row("bomFormat") and '`"1.6"`' in _row("specVersion")
    assert doc["version"] == 1 and "`1`" in _row("version")


def test_primitive_mapping_from_document():
    row = _row("primitive")
    renamed = dict(re.findall(r"`(\w+)` to `([\w-]+)`", row))
    kept = re.search(r"\. (.*) are kept", row).group(1)
    kept = re.findall(r"`(\w+)`", kept)
    assert renamed == {"blockcipher": "block-cipher", "streamcipher": "stream-cipher", "keyagree": "key-agree"}
    base = next(a for a in _assets("listing1") if a.function == "keygen")
    for ours, theirs in list(renamed.items()) + [(k, k) for k in kept] + [("exotic", "other")]:
        base.properties["primitive"] = ours
        assert component(base)["cryptoProperties"]["algorithmProperties"]["primitive"] == theirs


def test_mode_and_padding_mapping_from_document():
    modes = re.search(r"one of `([a-z ]+)`", _row("mode")).group(1).split()
    assert len(modes) == 7
    paddings = dict(re.findall(r"`(\w+)` to `(\w+)`", _row("padding")))
    (a,) = _assets("listing3")
    for mode in modes:
        a.properties["mode"] = mode.upper()
        assert component(a)["cryptoProperties"]["algorithmProperties"]["mode"] == mode
    a.properties["mode"] = "KW"
    comp = component(a)
    assert comp["cryptoProperties"]["algorithmProperties"]["mode"] == "other"
    assert _props(comp)["cryptoscope:mode"] == ["KW"]
    for ours, theirs in paddings.items():
        a.properties["padding"] = ours
        assert component(a)["cryptoProperties"]["algorithmProperties"]["padding"] == theirs
    for ours, theirs in (("OAEPWithSHA-256AndMGF1Padding", "oaep"), ("ISO10126", "other")):
        a.properties["padding"] = ours
        assert component(a)["cryptoProperties"]["algorithmProperties"]["padding"] == theirs


def test_occurrence_examples_from_document():
    examples = re.findall(r"`((?:FUNCTION_CALL|ARGUMENT) \d+-\d+: [^`]+)`", _row("additionalContext"))
    assert len(examples) == 2
    comp = next(component(a) for a in _assets("discovery-app") if a.variant == "EC")
    contexts = [o["additionalContext"] for o in comp["evidence"]["occurrences"]]
    for example in examples:
        assert example in contexts
    # columns count bytes from 1 and the end column is inclusive
    line = (CORPUS / "discovery-app" / "src/app/crypto/Keys.java").read_text(encoding="utf-8").splitlines()[22]
    snippet = 'getInstance("EC")'
    start = len(line[:line.index(snippet)].encode("utf-8")) + 1
    assert contexts[0] == f"FUNCTION_CALL {start}-{start + len(snippet) - 1}: {snippet}"
    occ = comp["evidence"]["occurrences"][0]
    assert (occ["location"], occ["line"], occ["offset"]) == ("src/app/crypto/Keys.java", 23, start)


def test_material_property_names_from_document():
    kinds = set(re.search(r"Kinds: `([^`]+)`", _row("cryptoscope:material:<kind>")).group(1).split())
    for project in ("discovery-app", "cwe321", "cwe259", "listing3"):
        for a in _assets(project):
            for name, values in _props(component(a)).items():
                if name.startswith("cryptoscope:material:"):
                    assert name.split(":")[-1] in kinds
                    assert all(re.fullmatch(r"(hardcoded|generated|external)( \d+ bits)?", v) for v in values)


def test_property_names_are_documented():
    documented = set(re.findall(r"`(cryptoscope:[\w:<>]+)`", MAPPING))
    for project in sorted(p.name for p in CORPUS.iterdir() if p.is_dir()):
        for a in _assets(project):
            for name in _props(component(a)):
                generic = "cryptoscope:material:<kind>" if name.startswith("cryptoscope:material:") else name
                assert generic in documented, name


@pytest.mark.parametrize("project", ["listing1", "wrapper", "discovery-app"])
def test_components_ordered_by_location(project):
    assets = _assets(project)
    doc = json.loads(cbom_json(assets, TS, SERIAL))
    order = [(a.location.file_name, a.location.line, a.location.start_column, a.asset_id) for a in assets]
    assert order == sorted(order)
    assert [_props(c)["cryptoscope:assetId"][0] for c in doc["components"]] == [o[3] for o in order]
