from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from cryptoscope.constprop import ConstProp, enumerate_contexts, fold_binary
from cryptoscope.frontend import Kind, parse_project
from cryptoscope.ir import build_ir
from cryptoscope.values import BUDGET, EXTERNAL_INPUT, MAX_VALUES, TOO_MANY, ConstValue, State

from conftest import IMPORTS, ROOT, find_node, in_method, reference_listings, snippet_ir

FLOWS = ROOT / "tests" / "fixtures" / "flows"


def _arg(ir, call_text: str, index: int = 0):
    return find_node(ir, Kind.METHOD_CALL, call_text).args[index]


def _arg_in(ir, method: str, call_text: str, index: int = 0):
    """Argument of the call written as ``call_text`` inside method ``method``."""
    (call,) = [c for info, _, c in ir.calls() if info.ref.name == method and c.text == call_text]
    return call.args[index]


def _method_id(ir, name: str) -> str:
    (mid,) = [m for m, info in ir.methods.items() if info.ref.name == name]
    return mid


@pytest.fixture(scope="module")
def flows(kb):
    ir = build_ir(parse_project(FLOWS), kb.owner_types, kb.return_type)
    return ir, ConstProp(ir, kb)


# -- lattice ---------------------------------------------------------------------------------

def test_join_of_two_constants_is_multivalue():
    a = ConstValue.constant("string", "AES", ())
    b = ConstValue.constant("string", "DES", ())
    j = a.join(b)
    assert j.state is State.MULTI and j.sorted_values() == [("string", "AES"), ("string", "DES")]
    assert a.join(a).is_constant
    assert ConstValue.bottom().join(a) == a


def test_more_than_max_values_collapses_to_unknown():
    v = ConstValue.of([("int", i) for i in range(MAX_VALUES + 1)], ())
    assert v.is_unknown and v.reason == TOO_MANY
    assert ConstValue.of([("int", i) for i in range(MAX_VALUES)], ()).state is State.MULTI


def test_string_and_int_stay_distinct():
    v = ConstValue.of([("string", "1"), ("int", 1)], ())
    assert v.state is State.MULTI


@given(st.lists(st.integers(0, 20), min_size=1, max_size=12), st.lists(st.integers(0, 20), min_size=1, max_size=12))
def test_join_is_an_upper_bound(xs, ys):
    a = ConstValue.of([("int", x) for x in xs], ())
    b = ConstValue.of([("int", y) for y in ys], ())
    j = a.join(b)
    assert a.leq(j) and b.leq(j)
    assert j == b.join(a)


# -- folding ---------------------------------------------------------------------------------

def test_concat_of_literals_folds(kb):
    ir = snippet_ir(in_method('Cipher c = Cipher.getInstance("AES/" + "GCM" + "/NoPadding");', IMPORTS), kb)
    v = ConstProp(ir, kb).value(_arg(ir, 'Cipher.getInstance("AES/" + "GCM" + "/NoPadding")'))
    assert v.pair == ("string", "AES/GCM/NoPadding")
    assert v.provenance


def test_static_final_field_is_constant(kb):
    src = in_method(
        'KeyPairGenerator g = KeyPairGenerator.getInstance("RSA");\ng.initialize(BITS);',
        IMPORTS, extra="    static final int BITS = 2048;\n",
    )
    ir = snippet_ir(src, kb)
    assert ConstProp(ir, kb).value(_arg(ir, "g.initialize(BITS)")).pair == ("int", 2048)


def test_parameter_without_caller_is_unknown(kb):
    src = IMPORTS + "class A {\n    void m(String alg) throws Exception {\n        Cipher.getInstance(alg);\n    }\n}\n"
    ir = snippet_ir(src, kb)
    v = ConstProp(ir, kb).value(_arg(ir, "Cipher.getInstance(alg)"))
    assert v.is_unknown and v.reason == EXTERNAL_INPUT


def test_listing_one_key_size(kb):
    ir = snippet_ir(in_method(reference_listings()[1], IMPORTS), kb)
    (call,) = [c for _, _, c in ir.calls() if c.name == "initialize"]
    assert ConstProp(ir, kb).value(call.args[0]).pair == ("int", 2048)


def test_int_arithmetic_wraps_like_java():
    assert fold_binary("*", ("int", 2 ** 30), ("int", 4)) == ("int", 0)
    assert fold_binary("/", ("int", 7), ("int", -2)) == ("int", -3)
    assert fold_binary("%", ("int", -7), ("int", 2)) == ("int", -1)
    assert fold_binary("/", ("int", 1), ("int", 0)) is None
    assert fold_binary("+", ("string", "k"), ("int", 128)) == ("string", "k128")


def test_static_final_chain(flows):
    ir, cp = flows
    assert cp.value(_arg(ir, "Cipher.getInstance(Settings.FULL)")).pair == ("string", "AES/CBC/PKCS5Padding")
    assert cp.value(_arg(ir, "keys(Settings.HALF + 1024)")).pair == ("int", 2048)


def test_mutable_static_is_unknown(flows):
    ir, cp = flows
    assert cp.value(_arg(ir, "Cipher.getInstance(Settings.mutable)")).is_unknown


def test_return_value_of_helper(flows):
    ir, cp = flows
    v = cp.value(_arg(ir, 'Cipher.getInstance(Settings.transformation("CTR"))'))
    assert v.pair == ("string", "AES/CTR/NoPadding")


def test_branches_join(flows):
    ir, cp = flows
    v = cp.value(_arg(ir, "MessageDigest.getInstance(alg)"))
    assert v.sorted_values() == [("string", "SHA-1"), ("string", "SHA-256")]
    assert cp.value(_arg(ir, "MessageDigest.getInstance(fixed)")).pair == ("string", "SHA-512")


def test_loop_carried_value_is_not_constant(flows):
    ir, cp = flows
    size = find_node(ir, Kind.ARRAY_CREATION, "new byte[size]")
    assert not cp.value(size.children[0]).is_constant
    # a loop that never changes the value keeps it
    assert cp.value(_arg(ir, "Cipher.getInstance(t)")).pair == ("string", "AES")


def test_byte_and_char_literals(flows):
    ir, cp = flows
    a, b, c = find_node(ir, Kind.METHOD_CALL, "use(iv, raw, pw)").args
    assert cp.value(a).pair == ("bytes", b"0123456789abcdef")
    assert cp.value(b).pair == ("bytes", bytes([1, 2, 3, 200]))
    assert cp.value(c).pair == ("chars", "secret")


def test_enum_member_is_unknown(project_ir, kb):
    ir = project_ir({
        "Alg.java": "enum Alg { AES, DES }\n",
        "A.java": IMPORTS + "class A {\n    void m() throws Exception {\n"
                  "        Cipher.getInstance(Alg.AES.name());\n    }\n}\n",
    })
    assert ConstProp(ir, kb).value(_arg(ir, "Cipher.getInstance(Alg.AES.name())")).is_unknown


# -- contexts --------------------------------------------------------------------------------

def test_wrapper_two_contexts(flows):
    ir, cp = flows
    mid = _method_id(ir, "encrypt")
    contexts, truncated = enumerate_contexts(ir, mid, 3)
    assert len(contexts) == 2 and not truncated
    arg = _arg_in(ir, "encrypt", "Cipher.getInstance(alg)")
    values = sorted(cp.value(arg, ctx).pair for ctx in contexts)
    assert values == [("string", "AES/GCM/NoPadding"), ("string", "DES/ECB/PKCS5Padding")]
    assert cp.value(arg).state is State.MULTI  # the empty context joins every caller


def test_ten_callers_at_k0_collapse(kb):
    algs = [f"ALG{i}" for i in range(10)]
    calls = "".join(f'        digest("{a}");\n' for a in algs)
    src = IMPORTS + (
        "class A {\n    void main() throws Exception {\n" + calls + "    }\n"
        "    void digest(String h) throws Exception {\n        MessageDigest.getInstance(h);\n    }\n}\n"
    )
    ir = snippet_ir(src, kb)
    arg = _arg(ir, "MessageDigest.getInstance(h)")
    v = ConstProp(ir, kb, context_depth=0).value(arg)
    assert v.is_unknown and v.reason == TOO_MANY
    contexts, _ = enumerate_contexts(ir, _method_id(ir, "digest"), 1)
    cp = ConstProp(ir, kb, context_depth=1)
    assert sorted(cp.value(arg, ctx).value for ctx in contexts) == sorted(algs)


def test_recursion_passing_literal_converges(flows):
    ir, cp = flows
    arg = _arg_in(ir, "recurse", "Cipher.getInstance(alg)")
    assert cp.value(arg).pair == ("string", "AES/CTR/NoPadding")
    contexts, _ = enumerate_contexts(ir, ir.method_of[arg], 3)
    for ctx in contexts:
        assert cp.value(arg, ctx).pair == ("string", "AES/CTR/NoPadding")


def test_deep_chain_beyond_k(flows):
    ir, cp = flows
    arg = _arg(ir, "MessageDigest.getInstance(h)")
    contexts, _ = enumerate_contexts(ir, ir.method_of[arg], 3)
    assert [len(c) for c in contexts] == [3]
    assert cp.value(arg, contexts[0]).pair == ("string", "SHA-256")


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_larger_k_never_loses_a_constant(flows, kb, k):
    ir, _ = flows
    small, large = ConstProp(ir, kb, k), ConstProp(ir, kb, k + 1)
    for info, _, call in ir.calls():
        small_ctx, _ = enumerate_contexts(ir, info.id, k)
        large_ctx, _ = enumerate_contexts(ir, info.id, k + 1)
        for a in call.args:
            for ctx in large_ctx:
                # the k-context this longer context refines
                coarse = ctx[len(ctx) - k:] if k else ()
                if coarse not in small_ctx:
                    continue
                before = small.value(a, coarse)
                if before.is_constant:
                    assert large.value(a, ctx).pair == before.pair, (a.location, k)


def test_budget_exhaustion_gives_unknown(flows, kb):
    ir, _ = flows
    cp = ConstProp(ir, kb, budget=3)
    v = cp.value(_arg(ir, "Cipher.getInstance(Settings.FULL)"))
    assert v.is_unknown and v.reason == BUDGET
    assert cp.stats.budget_exceeded


def test_invalid_parameters_rejected(flows, kb):
    ir, _ = flows
    with pytest.raises(ValueError):
        ConstProp(ir, kb, context_depth=-1)
    with pytest.raises(ValueError):
        ConstProp(ir, kb, budget=0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=6), st.sampled_from(["+", "-", "*"]))
def test_straight_line_arithmetic_matches_python(kb, nums, op):
    lines = [f"int v0 = {nums[0]};"]
    expected = nums[0]
    for i, n in enumerate(nums[1:], 1):
        lines.append(f"int v{i} = v{i - 1} {op} {n};")
        expected = {"+": expected + n, "-": expected - n, "*": expected * n}[op]
    lines.append(f"KeyGenerator.getInstance(\"AES\").init(v{len(nums) - 1});")
    ir = snippet_ir(in_method("\n".join(lines), IMPORTS), kb)
    (call,) = [c for _, _, c in ir.calls() if c.name == "init"]
    wrapped = (expected + 2 ** 31) % 2 ** 32 - 2 ** 31
    assert ConstProp(ir, kb).value(call.args[0]).pair == ("int", wrapped)
