from __future__ import annotations

import json

import pytest

from cryptoscope.frontend import parse_project
from cryptoscope.ir import build_ir
from cryptoscope.oracle import Oracle, PathBudgetExceeded, as_pair
from cryptoscope.slicer import Slicer, find_criteria

from conftest import CORPUS, IMPORTS, in_method, reference_listings, snippet_ir

PROJECTS = sorted(p for p in CORPUS.iterdir() if p.is_dir())


def _ir(kb, name: str):
    return build_ir(parse_project(CORPUS / name), kb.owner_types, kb.return_type)


def _lines(sl) -> list[tuple[str, int]]:
    return [(loc.file_name.rsplit("/", 1)[-1], loc.line) for loc in sl.statement_locations]


# -- criteria --------------------------------------------------------------------------------

def test_listing_one_has_two_criteria(kb):
    ir = snippet_ir(in_method(reference_listings()[0] + "\n" + reference_listings()[1], IMPORTS), kb)
    names = [c.api.id for c in find_criteria(ir, kb)]
    assert names == ["jca:Signature.sign/0", "jca:KeyPairGenerator.generateKeyPair/0"]


def test_listing_two_has_no_criteria(kb):
    for src in reference_listings()[2:4]:
        ir = snippet_ir(in_method(src, IMPORTS + "import java.security.cert.*;\n"), kb)
        assert find_criteria(ir, kb) == []
    assert find_criteria(_ir(kb, "listing2"), kb) == []


def test_get_instance_alone_is_not_a_criterion(kb):
    ir = snippet_ir(in_method('Cipher c = Cipher.getInstance("AES");\nc.init(Cipher.ENCRYPT_MODE, k);', IMPORTS), kb)
    assert find_criteria(ir, kb) == []


def test_criteria_are_ordered_by_location(kb):
    ir = _ir(kb, "discovery-app")
    locs = [(c.location.file_name, c.location.line, c.location.start_column) for c in find_criteria(ir, kb)]
    assert locs == sorted(locs) and len(locs) == len(set(locs))


# -- slices ----------------------------------------------------------------------------------

def test_listing_one_sign_slice(kb):
    ir = _ir(kb, "listing1")
    sign = next(c for c in find_criteria(ir, kb) if c.functions == ("sign",))
    (sl,) = Slicer(ir, kb).backward_slice(sign)
    lines = _lines(sl)
    assert [("Listing1.java", n) for n in (10, 11, 12, 13)] == [x for x in lines if x[0] == "Listing1.java"]
    assert [rc.call.name for rc in sl.related_calls] == ["getInstance", "initSign", "update", "sign"]
    assert sl.values[sl.related_calls[0].call.args[0]].pair == ("string", "SHA256withECDSA")


def test_listing_one_keygen_slice(kb):
    ir = _ir(kb, "listing1")
    keygen = next(c for c in find_criteria(ir, kb) if c.functions == ("keygen",))
    (sl,) = Slicer(ir, kb).backward_slice(keygen)
    assert _lines(sl) == [("Listing1.java", 18), ("Listing1.java", 19), ("Listing1.java", 20)]
    init = next(rc for rc in sl.related_calls if rc.call.name == "initialize")
    assert init.arg_values[0].pair == ("int", 2048)


def test_wrapper_two_slices(kb):
    ir = _ir(kb, "wrapper")
    (criterion,) = find_criteria(ir, kb)
    slices = Slicer(ir, kb).backward_slice(criterion)
    assert len(slices) == 2
    wrapper_lines = [[x for x in _lines(sl) if x[0] == "CryptoWrapper.java"] for sl in slices]
    assert wrapper_lines[0] == wrapper_lines[1]
    values = sorted(sl.values[sl.related_calls[0].call.args[0]].value for sl in slices)
    assert values == ["AES/GCM/NoPadding", "DES/ECB/PKCS5Padding"]


def test_external_key_is_unknown(kb):
    ir = _ir(kb, "listing3")
    (sl,) = Slicer(ir, kb).slice_all()
    key = next(m for m in sl.materials if m.kind == "secretKey")
    assert key.state == "external" and key.value.is_unknown


def test_merged_context_when_over_limit(kb):
    ir = _ir(kb, "wrapper")
    (criterion,) = find_criteria(ir, kb)
    (sl,) = Slicer(ir, kb, max_contexts=1).backward_slice(criterion)
    assert sl.merged_context and sl.context == ()
    assert sl.values[sl.related_calls[0].call.args[0]].sorted_values() == [
        ("string", "AES/GCM/NoPadding"), ("string", "DES/ECB/PKCS5Padding")]


def test_budget_truncates(kb):
    ir = _ir(kb, "cwe321")
    slices = Slicer(ir, kb, budget=2).slice_all()
    assert slices and all(sl.truncated for sl in slices)
    with pytest.raises(ValueError):
        Slicer(ir, kb, budget=0)


# -- materials -------------------------------------------------------------------------------

def test_generated_key_is_linked_to_cipher(kb):
    src = in_method(
        """
        KeyGenerator kg = KeyGenerator.getInstance("AES");
        SecretKey k = kg.generateKey();
        Cipher cipher = Cipher.getInstance("AES/GCM/NoPadding");
        cipher.init(1, k);
        cipher.doFinal(data);
        """, IMPORTS, extra="    byte[] data;\n")
    ir = snippet_ir(src, kb)
    slices = Slicer(ir, kb).slice_all()
    cipher = next(sl for sl in slices if sl.criterion.call.name == "doFinal")
    (key,) = [m for m in cipher.materials if m.kind == "secretKey"]
    assert key.state == "generated" and key.source_api == "jca:KeyGenerator.generateKey/0" and key.consumed
    assert any(rc.call.text == 'KeyGenerator.getInstance("AES")' for rc in cipher.related_calls)


def test_unused_generated_key_stays_on_keygen(kb):
    src = in_method(
        """
        KeyGenerator kg = KeyGenerator.getInstance("AES");
        SecretKey k = kg.generateKey();
        Cipher cipher = Cipher.getInstance("AES/GCM/NoPadding");
        cipher.init(1, other);
        cipher.doFinal(data);
        """, IMPORTS, extra="    byte[] data;\n    SecretKey other;\n")
    ir = snippet_ir(src, kb)
    slices = Slicer(ir, kb).slice_all()
    cipher = next(sl for sl in slices if sl.criterion.call.name == "doFinal")
    assert not any(rc.call.name == "generateKey" for rc in cipher.related_calls)
    assert [m.state for m in cipher.materials if m.kind == "secretKey"] == ["external"]


def test_hardcoded_iv_from_spec_constructor(kb):
    src = in_method(
        """
        byte[] ivBytes = "0123456789abcdef".getBytes();
        IvParameterSpec iv = new IvParameterSpec(ivBytes);
        Cipher cipher = Cipher.getInstance("AES/CBC/PKCS5Padding");
        cipher.init(Cipher.ENCRYPT_MODE, key, iv);
        cipher.doFinal(data);
        """, IMPORTS, extra="    byte[] data;\n    SecretKey key;\n")
    ir = snippet_ir(src, kb)
    (sl,) = Slicer(ir, kb).slice_all()
    (iv,) = [m for m in sl.materials if m.kind == "iv"]
    assert iv.state == "hardcoded" and iv.size_bits == 128
    assert iv.value.pair == ("bytes", b"0123456789abcdef")
    assert iv.introduced_at.line == 10 and iv.introduced_at.start_column == 26  # the literal, not the constructor


# -- properties over the corpus ----------------------------------------------------------------

@pytest.mark.parametrize("project", PROJECTS, ids=lambda p: p.name)
def test_slice_edge_audit(kb, project):
    """Every statement of a slice reaches the criterion through dependence edges."""
    ir = build_ir(parse_project(project), kb.owner_types, kb.return_type)
    for sl in Slicer(ir, kb).slice_all():
        rev: dict = {}
        for e in sl.edges:
            rev.setdefault(e.dst, set()).add(e.src)
        reached = {s for s in sl.statements if s.stmt is sl.criterion.statement}
        assert reached, "criterion statement missing from its slice"
        todo = list(reached)
        while todo:
            for src in rev.get(todo.pop(), ()):
                if src not in reached:
                    reached.add(src)
                    todo.append(src)
        assert set(sl.statements) == reached, [s.stmt.location.short() for s in set(sl.statements) - reached]
        assert all(e.src in reached and e.dst in reached for e in sl.edges)


@pytest.mark.parametrize("project", PROJECTS, ids=lambda p: p.name)
def test_slice_constants_replay(kb, project):
    """Every Constant in a slice's values equals what the oracle computes on that call path."""
    ir = build_ir(parse_project(project), kb.owner_types, kb.return_type)
    oracle = Oracle(ir, kb.constants)
    checked = 0
    for sl in Slicer(ir, kb).slice_all():
        for rc in sl.related_calls:
            for arg, value in zip(rc.call.args, rc.arg_values):
                if not value.is_constant or rc.method_id != sl.criterion.method_id:
                    continue
                try:
                    truth = oracle.values_at(arg, sl.context)
                except PathBudgetExceeded:
                    continue
                if truth is not None:
                    assert {as_pair(v) for v in truth} == {value.pair}, arg.location
                    checked += 1
    if any(sl.values for sl in Slicer(ir, kb).slice_all()):
        assert checked > 0


def test_slices_are_deterministic(kb):
    ir = _ir(kb, "discovery-app")
    first = [sl.to_json() for sl in Slicer(ir, kb).slice_all()]
    slicer = Slicer(ir, kb)
    criteria = slicer.find_criteria()
    backwards = {}
    for c in reversed(criteria):
        backwards[c] = slicer.backward_slice(c)
    second = [sl.to_json() for c in criteria for sl in backwards[c]]
    assert json.dumps(first) == json.dumps(second)
