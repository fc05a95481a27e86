from __future__ import annotations

import re
import textwrap
from dataclasses import dataclass, field
from pathlib import Path

import pytest

from cryptoscope.ir import build_ir
from cryptoscope.kb import load_kb
from cryptoscope.frontend import parse_project

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
LISTINGS_DOC = ROOT / "paper.md"


def write_project(root: Path, files: dict[str, str]) -> Path:
    """Write ``{relative path: source}`` under ``root`` (sources are dedented)."""
    for rel, src in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(textwrap.dedent(src).lstrip("\n"), encoding="utf-8")
    return root


@pytest.fixture(scope="session")
def kb():
    return load_kb()


@pytest.fixture
def project_ir(tmp_path, kb):
    """Build the IR of an ad-hoc project: ``project_ir({"A.java": src})``."""

    def build(files: dict[str, str]):
        write_project(tmp_path, files)
        return build_ir(parse_project(tmp_path), kb.owner_types, kb.return_type)

    return build


def reference_listings() -> list[str]:
    """Bodies of the code listings of the reference document, in document order."""
    text = LISTINGS_DOC.read_text(encoding="utf-8")
    out = []
    for block in re.findall(r"\\begin\{lstlisting\}(.*?)\\end\{lstlisting\}", text, re.S):
        body = block.split("]\n", 1)[1] if block.startswith("[") else block
        out.append(body.strip("\n"))
    return out


def in_method(statements: str, imports: str = "", extra: str = "") -> str:
    """Wrap loose statements in the body of ``Snippet.run``."""
    body = textwrap.indent(textwrap.dedent(statements).strip("\n"), " " * 8)
    return f"{imports}\npublic class Snippet {{\n{extra}    void run() throws Exception {{\n{body}\n    }}\n}}\n"


IMPORTS = "import java.security.*;\nimport java.security.spec.*;\nimport javax.crypto.*;\nimport javax.crypto.spec.*;\n"


def snippet_ir(source: str, kb=None, name: str = "Snippet.java"):
    """IR of a single in-memory source file."""
    from cryptoscope.frontend import parse_source
    from cryptoscope.frontend.project import SourceFile, SubjectProject

    unit, errors = parse_source(source, name)
    assert errors == [], errors
    project = SubjectProject(CORPUS, [SourceFile(name, unit, source, source.count("\n"))])
    if kb is None:
        return build_ir(project)
    return build_ir(project, kb.owner_types, kb.return_type)


def find_node(ir, kind, text: str):
    """First node of ``kind`` whose source text is ``text``."""
    for f in ir.project.files:
        for node in f.unit.walk():
            if node.kind is kind and node.text == text:
                return node
    raise LookupError(text)


@dataclass
class Agreement:
    """Constant propagation compared with the path-replay oracle."""

    derivable: int = 0  # (argument, context) pairs where the oracle finds exactly one value
    recovered: int = 0  # ... of which constant propagation reports that Constant
    wrong: list = field(default_factory=list)  # Constant or MultiValue contradicting the oracle
    unverified: list = field(default_factory=list)  # Constant the oracle cannot check (recursion)
    checked: int = 0

    @property
    def recovery(self) -> float:
        return self.recovered / self.derivable if self.derivable else 1.0


def constprop_agreement(root: Path, kb, k: int = 3, max_statements: int = 100) -> Agreement:
    """Compare every call argument in methods of at most ``max_statements`` statements, per context."""
    from cryptoscope.constprop import ConstProp, enumerate_contexts
    from cryptoscope.oracle import Oracle, PathBudgetExceeded, as_pair

    ir = build_ir(parse_project(root), kb.owner_types, kb.return_type)
    cp, oracle = ConstProp(ir, kb, k), Oracle(ir, kb.constants)
    out = Agreement()
    for info, _stmt, call in ir.calls():
        if len(info.cfg.statements) > max_statements:
            continue
        contexts, _ = enumerate_contexts(ir, info.id, k)
        for ctx in contexts:
            for arg in call.args:
                try:
                    truth = oracle.values_at(arg, ctx)
                except PathBudgetExceeded:
                    continue
                got = cp.value(arg, ctx)
                out.checked += 1
                where = (str(root.name), arg.location.short(), arg.text)
                truth = None if truth is None else {as_pair(v) for v in truth}
                if got.is_constant and truth is None:
                    out.unverified.append((where, oracle.complete_call_paths(ctx)))
                elif got.is_constant and truth != {got.pair}:
                    out.wrong.append((where, got.pair, truth))
                elif got.state.value == "MultiValue" and truth is not None and not truth <= got.values:
                    out.wrong.append((where, got.sorted_values(), truth))
                if truth is not None and len(truth) == 1:
                    out.derivable += 1
                    out.recovered += got.is_constant and got.pair in truth
    return out


def loc(line: int = 10, start: int = 5, end: int = 20, file: str = "src/A.java"):
    from cryptoscope.frontend import Location
    return Location(file, line, start, end)


def make_asset(function: str, line: int = 10, materials=(), randoms=(), file: str = "src/A.java",
               api: str = "Cipher.doFinal", **props):
    """A hand-built asset whose criterion is at ``line + 2``; every property comes from one call at ``line``."""
    from cryptoscope.assets import CryptoAsset, Evidence, PropertySource

    call = Evidence("FUNCTION_CALL", loc(line, file=file), "getInstance(...)")
    sources = {k: [PropertySource(k, v, call)] for k, v in props.items()}
    return CryptoAsset(
        asset_id=f"{line:016x}", function=function, criterion_api="x", api_name=api,
        location=loc(line + 2, file=file), properties=dict(props), sources=sources, materials=list(materials),
        random_sources=list(randoms), evidence=[call],
    )


def defuse_matches_paths(ir, method) -> int:
    """Compare reaching definitions with path enumeration; return the number of uses checked."""
    from cryptoscope.ir import ENTRY_DEF
    from cryptoscope.oracle import ENTRY_VALUE, enumerate_paths, path_reaching_defs

    paths = enumerate_paths(method.cfg)
    expected = path_reaching_defs(method.cfg, method.ref.decl, paths)
    for (node, _name), defs in expected.items():
        sym = ir.symbols.bindings[node]
        got = method.defuse.reaching(ir.statement(node), sym)
        assert {ENTRY_VALUE if d is ENTRY_DEF else d for d in got} == set(defs), node
    return len(expected)


# -- acceptance summary ------------------------------------------------------------------------

_CRITERION = re.compile(r"test_acceptance\.py::test_c(\d+)_")


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion that ran."""
    status: dict[int, bool] = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(report, "nodeid", ""))
            if m:
                n = int(m.group(1))
                status[n] = status.get(n, True) and outcome == "passed"
    if not status:
        return
    import test_acceptance

    terminalreporter.section("acceptance criteria")
    for n in sorted(status):
        verdict = "PASS" if status[n] else "FAIL"
        terminalreporter.write_line(f"C{n:<2} {test_acceptance.CRITERIA[n]:<28} {verdict}")
