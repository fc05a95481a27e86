from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from cryptoscope.frontend import Kind
from cryptoscope.frontend.ast import Location
from cryptoscope.kb import (
    FUNCTIONS,
    DuplicateId,
    SchemaError,
    builtin_dir,
    default_kb_paths,
    load_kb,
    match_call_site,
    parse_transformation,
    resolve_semantics,
)
from cryptoscope.values import ConstValue

from conftest import IMPORTS, find_node, in_method, snippet_ir

AT = Location("K.java", 1, 1, 1)


def const(value) -> ConstValue:
    kind = "int" if isinstance(value, int) else "str"
    return ConstValue.constant(kind, value, AT)


def _props(kb, api_id: str, args) -> dict:
    result = resolve_semantics(kb.apis[api_id], args, kb)
    return {k: v.value for k, v in result.properties.items()}


# -- loading ----------------------------------------------------------------------------

def test_builtin_jca_file_has_forty_apis():
    raw = json.loads((builtin_dir() / "jca.json").read_text(encoding="utf-8"))
    kb = load_kb([builtin_dir() / "jca.json"])
    assert len(kb.apis) == len(raw["apis"]) >= 40
    owners = {spec.owner_type.rsplit(".", 1)[-1] for spec in kb.apis.values()}
    assert {"Cipher", "Signature", "MessageDigest", "KeyGenerator", "KeyPairGenerator", "Mac", "SecretKeyFactory",
            "SecureRandom", "KeyAgreement"} <= owners


def test_every_criterion_names_its_functions(kb):
    for spec in kb.criteria:
        assert spec.functions and set(spec.functions) <= set(FUNCTIONS), spec.id
    covered = {f for spec in kb.criteria for f in spec.functions}
    assert covered == set(FUNCTIONS)


def test_overload_signatures_unique(kb):
    sigs = [spec.signature + (tuple(p.type for p in spec.params),) for spec in kb.apis.values()]
    assert len(sigs) == len(set(sigs))


def test_empty_overlay_changes_nothing(tmp_path, kb):
    empty = tmp_path / "empty.json"
    empty.write_text("{}", encoding="utf-8")
    again = load_kb(default_kb_paths() + [empty])
    assert again.apis == kb.apis
    assert again.semantics == kb.semantics
    assert again.policy == kb.policy


def test_policy_overlay(tmp_path):
    overlay = tmp_path / "policy.json"
    overlay.write_text(json.dumps({"policy": {"minPbeIterations": 10000}}), encoding="utf-8")
    kb = load_kb(default_kb_paths() + [overlay])
    assert kb.policy.min_pbe_iterations == 10000
    assert "DES" in kb.policy.weak_variants  # untouched fields keep their defaults


def test_default_policy_sets():
    kb = load_kb()
    assert kb.policy.weak_variants == {"DES", "3DES", "DESede", "RC2", "RC4", "Blowfish"}
    assert kb.policy.weak_modes == {"ECB"}
    assert kb.policy.weak_hashes == {"MD2", "MD5", "SHA-1"}
    assert kb.policy.quantum_unsafe == {"RSA", "DSA", "DH", "ECDSA", "ECDH", "EC"}
    assert kb.policy.min_pbe_iterations == 1000


def test_schema_error_has_pointer_and_line(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "apis": [\n    {"id": "x:Foo.bar/0", "owner": "Foo", "method": "bar", "kind": "nonsense"}\n  ]\n}\n',
                   encoding="utf-8")
    with pytest.raises(SchemaError) as info:
        load_kb([bad])
    assert "bad.json:3: /apis/0/kind" in str(info.value)


def test_duplicate_id_in_one_file(tmp_path):
    api = {"id": "x:Foo.bar/0", "owner": "x.Foo", "method": "bar", "arity": 0, "kind": "update"}
    dup = tmp_path / "dup.json"
    dup.write_text(json.dumps({"apis": [api, api]}), encoding="utf-8")
    with pytest.raises(DuplicateId):
        load_kb([dup])


def test_kb_dir_from_environment(tmp_path, monkeypatch):
    (tmp_path / "jca.json").write_text((builtin_dir() / "jca.json").read_text(encoding="utf-8"), encoding="utf-8")
    monkeypatch.setenv("CRYPTOSCOPE_KB_DIR", str(tmp_path))
    assert default_kb_paths() == [tmp_path / "jca.json"]


# -- call-site matching -----------------------------------------------------------------

def _site(kb, stmt: str, call_text: str):
    ir = snippet_ir(in_method(stmt, IMPORTS, "    String t;\n    MyUtil myUtil;\n"), kb)
    return match_call_site(find_node(ir, Kind.METHOD_CALL, call_text), ir.symbols, kb)


def test_match_getinstance_transformation(kb):
    spec = _site(kb, 'Cipher c = Cipher.getInstance("AES/GCM/NoPadding");', 'Cipher.getInstance("AES/GCM/NoPadding")')
    assert spec.id == "jca:Cipher.getInstance/1"
    assert spec.param(0).role == "transformation"


def test_match_provider_overload(kb):
    spec = _site(kb, 'Cipher c = Cipher.getInstance(t, "BC");', 'Cipher.getInstance(t, "BC")')
    assert spec.arity == 2 and spec.param(1).role == "irrelevant"


def test_homegrown_api_is_not_matched(kb):
    assert _site(kb, "myUtil.sha256(t);", "myUtil.sha256(t)") is None


# -- value semantics --------------------------------------------------------------------

def test_bare_aes_defaults(kb):
    props, unrecognized = parse_transformation("AES", kb)
    assert not unrecognized
    assert props == {"primitive": "blockcipher", "variant": "AES", "mode": "CBC", "padding": "PKCS5",
                     "blockSize": 128, "keySize": 128}


def test_full_transformation(kb):
    props, _ = parse_transformation("AES/GCM/NoPadding", kb)
    assert (props["variant"], props["mode"], props["padding"]) == ("AES", "GCM", "NoPadding")


def test_unrecognized_transformation_passes_through(kb):
    props, unrecognized = parse_transformation("FOO/BAR/Baz", kb)
    assert unrecognized and props == {"variant": "FOO", "mode": "BAR", "padding": "Baz"}


def test_des_and_rsa_defaults(kb):
    des, _ = parse_transformation("DES", kb)
    assert (des["mode"], des["padding"], des["keySize"]) == ("CBC", "PKCS5", 56)
    rsa, _ = parse_transformation("RSA", kb)
    assert (rsa["mode"], rsa["padding"]) == ("ECB", "PKCS1")


def test_getinstance_semantics(kb):
    props = _props(kb, "jca:Cipher.getInstance/1", [const("AES/GCM/NoPadding")])
    assert {k: props[k] for k in ("primitive", "variant", "mode", "padding")} == {
        "primitive": "ae", "variant": "AES", "mode": "GCM", "padding": "NoPadding"}


@pytest.mark.parametrize("opmode, function", [(1, "encrypt"), (2, "decrypt"), (3, "encapsulate"), (4, "decapsulate")])
def test_init_opmode(kb, opmode, function):
    assert _props(kb, "jca:Cipher.init/2", [const(opmode), None]) == {"function": function}


def test_initialize_keysize(kb):
    assert _props(kb, "jca:KeyPairGenerator.initialize/1", [const(2048)]) == {"keySize": 2048}


def test_unknown_argument_gives_no_property(kb):
    result = resolve_semantics(kb.apis["jca:Cipher.getInstance/1"], [ConstValue.unknown()], kb)
    assert result.properties == {} and result.unknown_roles == ["transformation"]


@given(st.sampled_from(["AES", "DES", "DESede", "Blowfish", "RC2"]),
       st.sampled_from(["CBC", "ECB", "CTR", "GCM", "CFB"]),
       st.sampled_from(["PKCS5Padding", "NoPadding", "ISO10126Padding"]))
def test_explicit_parts_override_defaults(alg, mode, padding):
    kb = _KB
    props, unrecognized = parse_transformation(f"{alg}/{mode}/{padding}", kb)
    assert not unrecognized
    assert props["mode"] == mode
    assert props["padding"] == {"PKCS5Padding": "PKCS5", "NoPadding": "NoPadding",
                                "ISO10126Padding": "ISO10126"}[padding]
    assert props["primitive"] == ("ae" if mode == "GCM" else "blockcipher")
    # pure function of its inputs
    assert parse_transformation(f"{alg}/{mode}/{padding}", kb) == (props, unrecognized)


_KB = load_kb()
