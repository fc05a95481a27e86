"""Scan pipeline: prefilter, parse, IR, constant propagation, slicing, assets, vulnerabilities."""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .assets import CryptoAsset, build_assets, dedupe_assets
from .cbom import emit_cbom
from .constprop import DEFAULT_BUDGET, DEFAULT_K, ConstProp
from .frontend import list_sources, parse_project
from .ir import build_ir
from .kb import KbError, KnowledgeBase, default_kb_paths, load_kb
from .slicer import DEFAULT_MAX_CONTEXTS, DEFAULT_SLICE_BUDGET, Slicer
from .vulns import VulnerabilityReport, emit_vuln_report, evaluate_rules

SEVERITIES = ("Minor", "Major", "Critical")
# deep call chains recurse in constant propagation; run the pipeline on a big stack
STACK_SIZE = 512 * 1024 * 1024

_WORD = re.compile(r"[A-Za-z_$][\w$]*")
_TYPE_DECL = re.compile(r"\b(?:class|interface|enum|record)\s+([A-Za-z_$][\w$]*)")


class ConfigError(Exception):
    """Invalid scan configuration."""


class IoError(Exception):
    """Reading the project or writing outputs failed."""


@dataclass
class ScanConfig:
    root_dir: Path
    kb_paths: list[Path] = field(default_factory=list)  # extra KB files layered over the defaults
    policy_path: Optional[Path] = None
    context_depth: int = DEFAULT_K
    const_budget: int = DEFAULT_BUDGET
    max_contexts: int = DEFAULT_MAX_CONTEXTS
    slice_budget: int = DEFAULT_SLICE_BUDGET
    output_dir: Path = Path("cryptoscope-out")
    dump_ir: bool = False
    dump_slices: bool = False
    dump_assets: bool = False
    no_prefilter: bool = False
    report: bool = False
    jobs: int = 1
    timestamp: Optional[str] = None
    serial: Optional[str] = None

    def validate(self) -> None:
        if self.context_depth < 0:
            raise ConfigError("context depth must be >= 0")
        for name in ("const_budget", "max_contexts", "slice_budget", "jobs"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name.replace('_', ' ')} must be positive")
        if not Path(self.root_dir).is_dir():
            raise ConfigError(f"project root {self.root_dir} is not a directory")
        for path in list(self.kb_paths) + ([self.policy_path] if self.policy_path else []):
            if not Path(path).is_file():
                raise ConfigError(f"no such file: {path}")


@dataclass
class ScanReport:
    files_scanned: int = 0
    files_pruned: int = 0
    parse_errors: list[dict] = field(default_factory=list)
    criteria_found: int = 0
    slices: int = 0
    truncated_slices: int = 0
    assets: int = 0
    vulns: int = 0
    lines: int = 0
    elapsed: dict[str, float] = field(default_factory=dict)

    @property
    def total_seconds(self) -> float:
        return sum(self.elapsed.values())

    @property
    def lines_per_second(self) -> float:
        total = self.total_seconds
        return self.lines / total if total > 0 else 0.0

    def to_json(self) -> dict:
        return {
            "filesScanned": self.files_scanned,
            "filesPruned": self.files_pruned,
            "parseErrors": self.parse_errors,
            "criteriaFound": self.criteria_found,
            "slices": self.slices,
            "truncatedSlices": self.truncated_slices,
            "assets": self.assets,
            "vulns": self.vulns,
            "lines": self.lines,
            "elapsedSeconds": {k: round(v, 4) for k, v in self.elapsed.items()},
            "linesPerSecond": round(self.lines_per_second, 1),
        }


@dataclass
class ScanResult:
    assets: list[CryptoAsset]
    vulns: list[VulnerabilityReport]
    report: ScanReport
    outputs: dict[str, Path] = field(default_factory=dict)


# -- prefilter ---------------------------------------------------------------------------

def crypto_markers(kb: KnowledgeBase) -> tuple[frozenset, frozenset]:
    """(simple owner type names, package prefixes) that mark a file as crypto relevant."""
    names, packages = set(), set()
    for owner in kb.owner_types:
        pkg, _, simple = owner.rpartition(".")
        names.add(simple.split("$")[-1])
        if pkg:
            packages.add(pkg)
    return frozenset(names), frozenset(packages)


def prefilter_files(root_dir: Path | str, rels: Sequence[str], kb: KnowledgeBase) -> tuple[list[str], list[str]]:
    """Partition files into (kept, pruned).

    A file is kept if it mentions a KB owner type or one of their packages,
    or if it is connected to a kept file in the coarse reference graph: two
    files are linked when one mentions a type declared in the other. The
    link is followed both ways so that callers (which feed arguments) and
    callees (which return values) of crypto code survive.
    """
    root = Path(root_dir)
    names, packages = crypto_markers(kb)
    words: dict[str, set] = {}
    declares: dict[str, set] = {}
    seeds = set()
    for rel in rels:
        try:
            text = (root / rel).read_text(encoding="utf-8", errors="replace")
        except OSError:
            seeds.add(rel)  # let the parser report the IO error
            continue
        w = set(_WORD.findall(text))
        words[rel] = w
        declares[rel] = set(_TYPE_DECL.findall(text))
        if w & names or any(p in text for p in packages):
            seeds.add(rel)
    declared_in: dict[str, set] = {}
    for rel, types in declares.items():
        for t in types:
            declared_in.setdefault(t, set()).add(rel)
    neighbours: dict[str, set] = {rel: set() for rel in rels}
    for rel, w in words.items():
        for t in w & declared_in.keys():
            for other in declared_in[t]:
                if other != rel:
                    neighbours[rel].add(other)
                    neighbours[other].add(rel)
    kept = set(seeds)
    todo = list(seeds)
    while todo:
        rel = todo.pop()
        for other in neighbours.get(rel, ()):
            if other not in kept:
                kept.add(other)
                todo.append(other)
    return sorted(kept), sorted(set(rels) - kept)


# -- the pipeline ------------------------------------------------------------------------

def load_scan_kb(config: ScanConfig) -> KnowledgeBase:
    paths = default_kb_paths() + [Path(p) for p in config.kb_paths]
    if config.policy_path:
        paths.append(Path(config.policy_path))
    try:
        return load_kb(paths)
    except (KbError, OSError, ValueError) as exc:
        raise ConfigError(f"cannot load knowledge base: {exc}") from exc


def analyze(config: ScanConfig, kb: Optional[KnowledgeBase] = None) -> tuple[ScanResult, dict]:
    """Run all analysis stages without writing anything.

    Returns the result and the optional dumps requested by the config.
    """
    config.validate()
    kb = kb or load_scan_kb(config)
    report = ScanReport()
    dumps: dict = {}
    clock = time.perf_counter()

    def lap(stage: str) -> None:
        nonlocal clock
        now = time.perf_counter()
        report.elapsed[stage] = now - clock
        clock = now

    rels = list_sources(Path(config.root_dir))
    if config.no_prefilter:
        kept, pruned = rels, []
    else:
        kept, pruned = prefilter_files(config.root_dir, rels, kb)
    lap("prefilter")
    project = parse_project(config.root_dir, jobs=config.jobs, only=kept)
    report.files_scanned = len(project.files)
    report.files_pruned = len(pruned)
    report.lines = project.total_lines
    report.parse_errors = [
        {"file": e.path, "location": e.location.to_json(), "message": e.message} for e in project.parse_errors
    ]
    lap("parse")
    ir = build_ir(project, kb.owner_types, kb.return_type)
    if config.dump_ir:
        dumps["ir"] = ir.to_json()
    lap("ir")
    cp = ConstProp(ir, kb, config.context_depth, config.const_budget)
    slicer = Slicer(ir, kb, cp, config.context_depth, config.max_contexts, config.slice_budget)
    criteria = slicer.find_criteria()
    report.criteria_found = len(criteria)
    slices = []
    for criterion in criteria:
        slices.extend(slicer.backward_slice(criterion))
    report.slices = len(slices)
    report.truncated_slices = sum(1 for s in slices if s.truncated)
    if config.dump_slices:
        dumps["slices"] = [s.to_json() for s in slices]
    lap("slice")
    assets = dedupe_assets(build_assets(slices, kb))
    report.assets = len(assets)
    if config.dump_assets:
        dumps["assets"] = [a.to_json() for a in assets]
    lap("assets")
    vulns = evaluate_rules(assets, kb.policy)
    report.vulns = len(vulns)
    lap("vulns")
    return ScanResult(assets, vulns, report), dumps


def run_on_big_stack(fn, *args):
    """Call ``fn`` on a thread with a large stack, re-raising its exception."""
    box: dict = {}

    def target() -> None:
        try:
            box["value"] = fn(*args)
        except BaseException as exc:  # noqa: BLE001 - re-raised in the caller
            box["error"] = exc

    old = threading.stack_size()
    try:
        threading.stack_size(STACK_SIZE)
        worker = threading.Thread(target=target, name="cryptoscope-scan")
        worker.start()
    finally:
        threading.stack_size(old)
    worker.join()
    if "error" in box:
        raise box["error"]
    return box["value"]


def _write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def run_scan(config: ScanConfig, kb: Optional[KnowledgeBase] = None) -> ScanResult:
    """Scan ``config.root_dir`` and write cbom.json, vulns.json and scan-report.json.

    Raises ConfigError for an invalid configuration and IoError when an
    output cannot be written. Findings never make a scan fail.
    """
    result, dumps = run_on_big_stack(analyze, config, kb)
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        result.outputs["cbom"] = emit_cbom(result.assets, out / "cbom.json", config.timestamp, config.serial)
        result.outputs["vulns"] = emit_vuln_report(result.vulns, out / "vulns.json")
        for name, data in dumps.items():
            result.outputs[name] = _write_json(out / f"{name}.json", data)
        if config.report:
            from .figures import asset_report
            result.outputs.update(asset_report(result.assets, result.vulns, out))
        result.outputs["report"] = _write_json(out / "scan-report.json", result.report.to_json())
    except OSError as exc:
        raise IoError(f"cannot write outputs to {out}: {exc}") from exc
    return result


def exceeds(vulns: Iterable[VulnerabilityReport], severity: str) -> bool:
    """True if some finding is at least as severe as ``severity``."""
    floor = SEVERITIES.index(severity)
    return any(SEVERITIES.index(v.vulnerability_score) >= floor for v in vulns
               if v.vulnerability_score in SEVERITIES)
