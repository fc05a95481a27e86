from __future__ import annotations

import dataclasses
import hashlib

import pytest

from cryptoscope.assets import asset_id, build_assets, dedupe_assets, relate_api_calls
from cryptoscope.frontend import parse_project
from cryptoscope.ir import build_ir
from cryptoscope.scan import ScanConfig, analyze
from cryptoscope.slicer import Slicer

from conftest import CORPUS, IMPORTS, in_method, write_project

PROJECTS = sorted(p for p in CORPUS.iterdir() if p.is_dir())


def _assets(root):
    result, _ = analyze(ScanConfig(root))
    return result.assets


def _snippet_assets(tmp_path, statements: str, extra: str = ""):
    write_project(tmp_path, {"Snippet.java": in_method(statements, IMPORTS, extra)})
    return _assets(tmp_path)


def _slices(kb, root):
    ir = build_ir(parse_project(root), kb.owner_types, kb.return_type)
    return Slicer(ir, kb).slice_all()


# -- properties ------------------------------------------------------------------------------

def test_listing_one_assets():
    sign, keygen = _assets(CORPUS / "listing1")
    assert (sign.function, sign.properties) == ("sign", {"primitive": "signature", "variant": "ECDSA", "digest": "SHA-256"})
    assert (keygen.function, keygen.properties) == ("keygen", {"primitive": "pke", "variant": "RSA", "keySize": 2048})
    assert not sign.incomplete and not keygen.incomplete


def test_listing_three_asset():
    (a,) = _assets(CORPUS / "listing3")
    assert a.function == "encrypt"
    assert (a.primitive, a.variant, a.mode, a.padding) == ("ae", "AES", "GCM", "NoPadding")


def test_listings_two_and_four_have_no_assets():
    assert _assets(CORPUS / "listing2") == []
    assert _assets(CORPUS / "listing4") == []


def test_transformation_defaults():
    (a,) = _assets(CORPUS / "aes-defaults")
    assert (a.mode, a.padding, a.key_size, a.get("blockSize")) == ("CBC", "PKCS5", 128, 128)


def test_explicit_key_size_beats_default(tmp_path):
    (a,) = _snippet_assets(tmp_path, 'KeyGenerator kg = KeyGenerator.getInstance("AES");\nkg.init(256);\nkg.generateKey();')
    assert a.key_size == 256
    (src,) = a.sources["keySize"]
    assert src.call.snippet == "init(256)" and src.argument.snippet == "256"


def test_key_material_size_beats_default(tmp_path):
    (a,) = _snippet_assets(tmp_path, """
        byte[] raw = "0123456789abcdef0123456789abcdef".getBytes();
        SecretKeySpec key = new SecretKeySpec(raw, "AES");
        Cipher c = Cipher.getInstance("AES/GCM/NoPadding");
        c.init(Cipher.ENCRYPT_MODE, key);
        c.doFinal(data);
        """, extra="    byte[] data;\n")
    assert a.key_size == 256
    (key,) = [m for m in a.materials if m.kind == "secretKey"]
    assert key.value_state == "hardcoded" and key.size_bits == 256


def test_signature_digest_pattern(tmp_path):
    (a,) = _snippet_assets(tmp_path, 'Signature s = Signature.getInstance("SHA256withECDSA");\ns.initSign(k);\ns.sign();',
                           extra="    PrivateKey k;\n")
    assert (a.function, a.primitive, a.variant, a.get("digest")) == ("sign", "signature", "ECDSA", "SHA-256")


def test_operation_mode_decides_function(tmp_path):
    (a,) = _snippet_assets(tmp_path, 'Cipher c = Cipher.getInstance("AES/GCM/NoPadding");\nc.init(Cipher.DECRYPT_MODE, k);\nc.doFinal(d);',
                           extra="    SecretKey k;\n    byte[] d;\n")
    assert a.function == "decrypt" and not a.incomplete


def test_unknown_operation_is_incomplete(tmp_path):
    (a,) = _snippet_assets(tmp_path, 'Cipher c = Cipher.getInstance("AES/GCM/NoPadding");\nc.init(mode, k);\nc.doFinal(d);',
                           extra="    SecretKey k;\n    byte[] d;\n    int mode;\n")
    assert a.incomplete and a.function in ("encrypt", "decrypt")


def test_conflicting_key_sizes_are_flagged(tmp_path):
    (a,) = _snippet_assets(tmp_path, """
        KeyGenerator kg = KeyGenerator.getInstance("AES");
        if (strong) {
            kg.init(256);
        } else {
            kg.init(128);
        }
        kg.generateKey();
        """, extra="    boolean strong;\n")
    assert a.incomplete
    assert any("conflict" in n for n in a.notes)
    # both sites stay in the evidence
    lines = {e.location.line for e in a.evidence if e.finding_type == "FUNCTION_CALL"}
    assert {13, 15} <= lines


def test_unknown_algorithm_is_incomplete(tmp_path):
    (a,) = _snippet_assets(tmp_path, 'MessageDigest md = MessageDigest.getInstance(name);\nmd.digest(d);',
                           extra="    String name;\n    byte[] d;\n")
    assert a.incomplete and a.variant is None and a.function == "digest"


def test_keystore_loading_is_not_keygen(tmp_path):
    assets = _snippet_assets(tmp_path, """
        KeyStore ks = KeyStore.getInstance("PKCS12");
        ks.load(in, pw);
        Key key = ks.getKey("alias", pw);
        Cipher c = Cipher.getInstance("AES/GCM/NoPadding");
        c.init(Cipher.ENCRYPT_MODE, key);
        c.doFinal(d);
        """, extra="    java.io.InputStream in;\n    char[] pw;\n    byte[] d;\n")
    assert [a.function for a in assets] == ["encrypt"]
    assert [m.value_state for m in assets[0].materials if m.kind == "secretKey"] == ["external"]


# -- chains ----------------------------------------------------------------------------------

def test_listing_one_sign_chain(kb):
    sign = next(sl for sl in _slices(kb, CORPUS / "listing1") if sl.criterion.functions == ("sign",))
    (chain,) = relate_api_calls(sign, kb)
    assert [rc.call.name for rc in chain.calls] == ["getInstance", "initSign", "update", "sign"]


def test_two_ciphers_two_groups(kb, tmp_path):
    write_project(tmp_path, {"Snippet.java": in_method("""
        Cipher a = Cipher.getInstance("AES/GCM/NoPadding");
        Cipher b = Cipher.getInstance("AES/CBC/PKCS5Padding");
        a.init(Cipher.ENCRYPT_MODE, k);
        b.init(Cipher.DECRYPT_MODE, k);
        a.doFinal(d);
        b.doFinal(d);
        """, IMPORTS, "    SecretKey k;\n    byte[] d;\n")})
    slices = _slices(kb, tmp_path)
    assert len(slices) == 2
    for sl in slices:
        (chain,) = relate_api_calls(sl, kb)
        assert {rc.call.receiver.text for rc in chain.calls if rc.call.receiver is not None
                and rc.call.name != "getInstance"} == {sl.criterion.call.receiver.text}
    assert [a.mode for a in build_assets(slices, kb)] == ["GCM", "CBC"]


def test_digest_into_signature_links_chains(kb, tmp_path):
    write_project(tmp_path, {"Snippet.java": in_method("""
        MessageDigest md = MessageDigest.getInstance("SHA-256");
        byte[] h = md.digest(d);
        Signature s = Signature.getInstance("NONEwithECDSA");
        s.initSign(k);
        s.update(h);
        s.sign();
        """, IMPORTS, "    PrivateKey k;\n    byte[] d;\n")})
    sign = next(sl for sl in _slices(kb, tmp_path) if sl.criterion.call.name == "sign")
    chains = relate_api_calls(sign, kb)
    assert len(chains) == 2
    digest_chain = chains[1]
    assert digest_chain.consumer_chain == 0 and digest_chain.feeds[0].name == "update"
    assert digest_chain.root.call.name == "digest"


# -- dedupe ----------------------------------------------------------------------------------

def test_wrapper_gives_two_assets():
    assets = _assets(CORPUS / "wrapper")
    assert sorted((a.variant, a.mode, a.padding) for a in assets) == [("AES", "GCM", "NoPadding"), ("DES", "ECB", "PKCS5")]
    assert len({a.asset_id for a in assets}) == 2


def test_same_values_merge(tmp_path):
    write_project(tmp_path, {
        "Helper.java": IMPORTS + "class Helper {\n    byte[] hash(String alg, byte[] d) throws Exception {\n"
                                 "        return MessageDigest.getInstance(alg).digest(d);\n    }\n}\n",
        "Use.java": "class Use {\n    Helper h;\n    void a(byte[] d) throws Exception {\n        h.hash(\"SHA-256\", d);\n    }\n"
                    "    void b(byte[] d) throws Exception {\n        h.hash(\"SHA-256\", d);\n    }\n}\n",
    })
    (a,) = _assets(tmp_path)
    assert a.merged and a.merge_count == 2 and len(a.contexts) == 2
    members = sorted(asset_id(a.location, [c]) for c in a.contexts)
    assert a.asset_id == hashlib.sha256("+".join(members).encode()).hexdigest()[:16]


def test_dedupe_identity_on_single_asset():
    assets = _assets(CORPUS / "listing3")
    assert dedupe_assets(list(assets)) == assets


def test_dedupe_is_order_independent():
    assets = _assets(CORPUS / "discovery-app")
    assert dedupe_assets(list(reversed(assets))) == dedupe_assets(list(assets))


def test_ids_are_stable():
    assert [a.asset_id for a in _assets(CORPUS / "wrapper")] == [a.asset_id for a in _assets(CORPUS / "wrapper")]


# -- invariants over the corpus ----------------------------------------------------------------

@pytest.mark.parametrize("project", PROJECTS, ids=lambda p: p.name)
def test_asset_invariants(project):
    for a in _assets(project):
        assert a.function in {"encrypt", "decrypt", "sign", "verify", "digest", "keygen", "keyderive", "tag",
                              "encapsulate", "decapsulate"}
        assert a.evidence and a.evidence[0].finding_type == "FUNCTION_CALL"
        assert any(e.location.line == a.location.line for e in a.evidence)
        evidence = {(e.location, e.snippet) for e in a.evidence}
        for name in a.properties:
            sources = a.sources.get(name)
            assert sources, (name, a.location)
            # every property traces to a call listed in the evidence
            assert any((s.call.location, s.call.snippet) in evidence for s in sources), (name, a.location)
        for m in a.materials:
            assert m.evidence.location.file_name
            if m.value_state == "hardcoded":
                assert m.value is not None
        assert not any("quantum" in k.lower() for k in a.properties)


def test_asset_fields_round_trip_to_json():
    (a,) = _assets(CORPUS / "listing3")
    data = a.to_json()
    assert data["function"] == "encrypt" and data["assetId"] == a.asset_id
    assert dataclasses.is_dataclass(a)
