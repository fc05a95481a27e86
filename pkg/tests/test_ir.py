from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from cryptoscope.frontend import Kind
from cryptoscope.ir import ENTRY, EXIT, ExternalKind, build_ir, compute_defuse
from cryptoscope.ir.cfg import LOOP_BACK

from conftest import CORPUS, IMPORTS, defuse_matches_paths as _brute_force_matches, find_node, in_method, reference_listings, snippet_ir


def _method(ir, name: str):
    (m,) = [m for m in ir.methods.values() if m.ref.name == name]
    return m


# -- symbols ----------------------------------------------------------------------------

def test_listing_one_variable_bound_to_signature(kb):
    ir = snippet_ir(in_method(reference_listings()[0], IMPORTS), kb)
    call = find_node(ir, Kind.METHOD_CALL, "ecdsa.initSign(key)")
    sym = ir.symbols.bindings[call.receiver]
    assert sym.name == "ecdsa" and sym.declared_type == "java.security.Signature"


def test_import_expansion(kb):
    ir = snippet_ir(in_method('Cipher c = Cipher.getInstance("AES");', IMPORTS), kb)
    call = find_node(ir, Kind.METHOD_CALL, 'Cipher.getInstance("AES")')
    assert ir.call_graph.by_site[call].external_name == "javax.crypto.Cipher.getInstance"


def test_undeclared_name_is_unresolved():
    ir = snippet_ir(in_method("foo.bar();\nint x = 1;"))
    assert [u.name for u in ir.symbols.unresolved] == ["foo"]
    assert len(ir.methods) == 1


def test_inner_scope_shadows_field():
    src = "class A {\n    int x = 1;\n    void m() {\n        int x = 2;\n        use(x);\n    }\n    void use(int v) {}\n}\n"
    ir = snippet_ir(src)
    call = find_node(ir, Kind.METHOD_CALL, "use(x)")
    assert ir.symbols.bindings[call.args[0]].storage.value == "Local"


# -- control flow -----------------------------------------------------------------------

def test_straight_line_is_a_path():
    ir = snippet_ir(in_method("int a = 1;\nint b = a;\nint c = b;\nint d = c;"))
    cfg = _method(ir, "run").cfg
    assert len(cfg.statements) == 4
    chain = [(e.src, e.dst) for e in sorted(cfg.edges, key=lambda e: e.src)]
    order = [ENTRY] + [cfg.index[s] for s in cfg.statements] + [EXIT]
    assert sorted(chain) == sorted(zip(order, order[1:]))


def test_if_else_diamond(kb):
    ir = snippet_ir(in_method("""
        Cipher c;
        if (flag) {
            c = Cipher.getInstance("AES");
        } else {
            c = Cipher.getInstance("DES");
        }
        c.doFinal(data);
    """, IMPORTS, "    boolean flag;\n    byte[] data;\n"), kb)
    cfg = _method(ir, "run").cfg
    branch = cfg.index[find_node(ir, Kind.IF, next(n.text for n in cfg.statements if n.kind is Kind.IF))]
    labels = sorted(e.label for e in cfg.succ[branch])
    assert labels == ["false", "true"]
    join = cfg.index[find_node(ir, Kind.METHOD_CALL, "c.doFinal(data)")]
    arms = {e.dst for e in cfg.succ[branch]}
    assert {e.src for e in cfg.pred[join]} == arms


def test_while_loop_back_edge_and_exit():
    ir = snippet_ir(in_method("int i = 0;\nwhile (i < 3) {\n    i = i + 1;\n}"))
    cfg = _method(ir, "run").cfg
    back = [e for e in cfg.edges if e.label == LOOP_BACK]
    assert len(back) == 1
    head = back[0].dst
    assert cfg.nodes[head].kind is Kind.WHILE
    assert sorted(e.label for e in cfg.succ[head]) == ["false", "true"]


def test_every_node_reaches_exit_on_corpus(kb):
    from cryptoscope.frontend import parse_project

    for project in sorted(p for p in CORPUS.iterdir() if p.is_dir()):
        ir = build_ir(parse_project(project), kb.owner_types, kb.return_type)
        for m in ir.methods.values():
            cfg = m.cfg
            assert cfg.reachable_from(ENTRY) >= set(range(2, len(cfg.nodes)))
            for i in range(len(cfg.nodes)):
                if i != EXIT:
                    assert EXIT in cfg.reachable_from(i), (m.id, i)


# -- def-use ----------------------------------------------------------------------------

def test_simple_chain():
    ir = snippet_ir(in_method('String x = "AES";\nuse(x);', extra="    void use(String s) {}\n"))
    m = _method(ir, "run")
    decl = find_node(ir, Kind.LOCAL_VAR_DECL, 'String x = "AES";')
    call = find_node(ir, Kind.METHOD_CALL, "use(x)")
    sym = ir.symbols.bindings[call.args[0]]
    assert m.defuse.reaching(call, sym) == {decl}


def test_defs_in_both_branches_reach_join():
    ir = snippet_ir(in_method("""
        String x;
        if (flag) {
            x = "AES";
        } else {
            x = "DES";
        }
        use(x);
    """, extra="    boolean flag;\n    void use(String s) {}\n"))
    m = _method(ir, "run")
    call = find_node(ir, Kind.METHOD_CALL, "use(x)")
    defs = m.defuse.reaching(call, ir.symbols.bindings[call.args[0]])
    assert {d.text for d in defs} == {'x = "AES"', 'x = "DES"'}
    assert _brute_force_matches(ir, m) > 0


def test_parameter_use_is_external_input():
    ir = snippet_ir("class A {\n    void m(String t) {\n        use(t);\n    }\n    void use(String s) {}\n}\n")
    m = _method(ir, "m")
    call = find_node(ir, Kind.METHOD_CALL, "use(t)")
    ext = m.defuse.external[(ir.symbols.bindings[call.args[0]], call)]
    assert ext.kind is ExternalKind.PARAM


@pytest.mark.parametrize("seed", [1, 2, 3, 17, 99])
def test_defuse_independent_of_worklist_order(kb, seed):
    from cryptoscope.frontend import parse_project

    ir = build_ir(parse_project(CORPUS / "listing5"), kb.owner_types, kb.return_type)
    for m in ir.methods.values():
        params = ir.symbols.method_params.get(m.id, ())
        shuffled = compute_defuse(m.cfg, ir.symbols, params, seed=seed)
        assert shuffled.reach_in == m.defuse.reach_in
        assert shuffled.chains == m.defuse.chains


def test_defuse_matches_path_enumeration_on_corpus(kb):
    from cryptoscope.frontend import parse_project

    checked = 0
    for project in sorted(p for p in CORPUS.iterdir() if p.is_dir()):
        ir = build_ir(parse_project(project), kb.owner_types, kb.return_type)
        for m in ir.methods.values():
            if len(m.cfg.statements) <= 30:
                checked += _brute_force_matches(ir, m)
    assert checked > 200


# Random small methods: int locals, assignments, at most two if/while nodes.
_VARS = ("a", "b", "c")
_expr = st.one_of(
    st.integers(0, 9).map(str),
    st.sampled_from(_VARS),
    st.tuples(st.sampled_from(_VARS), st.integers(1, 5)).map(lambda t: f"{t[0]} + {t[1]}"),
)
_assign = st.tuples(st.sampled_from(_VARS), _expr).map(lambda t: f"{t[0]} = {t[1]};")
_block = st.lists(_assign, min_size=0, max_size=3)


@st.composite
def _programs(draw):
    lines = [f"int {v} = {i};" for i, v in enumerate(_VARS)]
    compounds = 0
    for _ in range(draw(st.integers(1, 6))):
        kind = draw(st.sampled_from(["assign", "if", "ifelse", "while"]))
        if kind == "assign" or compounds == 2:
            lines.append(draw(_assign))
            continue
        compounds += 1
        cond = f"{draw(st.sampled_from(_VARS))} < {draw(st.integers(0, 9))}"
        head = "while" if kind == "while" else "if"
        lines.append(f"{head} ({cond}) {{")
        lines += ["    " + s for s in draw(_block)]
        if kind == "ifelse":
            lines.append("} else {")
            lines += ["    " + s for s in draw(_block)]
        lines.append("}")
    lines.append("sink(a, b, c);")
    return "\n".join(lines)


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(_programs())
def test_defuse_matches_path_enumeration_random(body):
    ir = snippet_ir(in_method(body, extra="    void sink(int x, int y, int z) {}\n"))
    m = _method(ir, "run")
    assert len(m.cfg.statements) <= 30
    assert _brute_force_matches(ir, m) >= 3


# -- call graph -------------------------------------------------------------------------

def test_helper_call_edge_and_recursion(kb):
    src = IMPORTS + """
public class App {
    void main() throws Exception {
        encrypt("AES/GCM/NoPadding");
    }

    void encrypt(String t) throws Exception {
        Cipher c = Cipher.getInstance(t);
        encrypt(t);
    }
}
"""
    ir = snippet_ir(src, kb, "App.java")
    main = _method(ir, "main").id
    enc = _method(ir, "encrypt").id
    callees = {(e.caller, e.callee) for e in ir.call_graph.edges if not e.is_external}
    assert (main, enc) in callees and (enc, enc) in callees
    ext = {e.external_name for e in ir.call_graph.edges if e.is_external}
    assert ext == {"javax.crypto.Cipher.getInstance"}


def test_every_call_site_has_exactly_one_edge(kb):
    from cryptoscope.frontend import parse_project

    ir = build_ir(parse_project(CORPUS / "discovery-app"), kb.owner_types, kb.return_type)
    call_kinds = (Kind.METHOD_CALL, Kind.CONSTRUCTOR_CALL)
    sites = [n for f in ir.project.files for n in f.unit.walk() if n.kind in call_kinds]
    edges = [e.call for e in ir.call_graph.edges]
    assert len(edges) == len(set(map(id, edges)))
    assert {id(s) for s in sites} == {id(e) for e in edges}
