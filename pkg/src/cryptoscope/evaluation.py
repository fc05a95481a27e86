"""Scoring scanner output against labeled reference inventories.

A label names a criterion call (file, line, API) and the properties a
correct asset carries. An asset matches a label exactly when the
function, algorithm and, where the label gives them, mode and key size
agree; it matches partially when only file, line and API agree. A null
label mode or key size accepts any value. Several value-identical assets
for one label collapse into a single match.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

import jsonschema

from .assets import CryptoAsset
from .scan import ScanConfig, analyze, run_on_big_stack
from .vulns import VulnerabilityReport

EXACT, PARTIAL = 2, 1


class SchemaError(Exception):
    """A labels or expected-vulns file does not follow its schema."""


@dataclass(frozen=True)
class ReferenceLabel:
    file_name: str
    line: int
    api: str
    algorithm: Optional[str]
    function: str
    mode: Optional[str] = None
    key_size: Optional[int] = None

    @classmethod
    def from_json(cls, raw: dict) -> "ReferenceLabel":
        return cls(raw["fileName"], raw["line"], raw["api"], raw.get("algorithm"), raw["function"],
                   raw.get("mode"), raw.get("keySize"))

    def to_json(self) -> dict:
        return {"fileName": self.file_name, "line": self.line, "api": self.api, "algorithm": self.algorithm,
                "function": self.function, "mode": self.mode, "keySize": self.key_size}


@dataclass
class MatchResult:
    labels: int = 0
    exact: int = 0
    partial: int = 0
    false_negative: int = 0
    false_positive: int = 0
    found: int = 0
    matched_found: int = 0
    allowlisted: int = 0  # false negatives excused by the allowlist
    missed: list[ReferenceLabel] = field(default_factory=list)
    partials: list[ReferenceLabel] = field(default_factory=list)
    unmatched: list[CryptoAsset] = field(default_factory=list)

    @property
    def precision(self) -> float:
        return self.matched_found / self.found if self.found else 1.0

    @property
    def recall(self) -> float:
        return self.exact / self.labels if self.labels else 1.0

    @property
    def recall_with_partial(self) -> float:
        return (self.exact + self.partial) / self.labels if self.labels else 1.0

    @property
    def recall_excluding_allowlist(self) -> float:
        """Recall with partial matches over the labels that are not known gaps."""
        denom = self.labels - self.allowlisted
        return (self.exact + self.partial) / denom if denom else 1.0

    def __add__(self, other: "MatchResult") -> "MatchResult":
        return MatchResult(
            self.labels + other.labels, self.exact + other.exact, self.partial + other.partial,
            self.false_negative + other.false_negative, self.false_positive + other.false_positive,
            self.found + other.found, self.matched_found + other.matched_found,
            self.allowlisted + other.allowlisted, self.missed + other.missed, self.partials + other.partials,
            self.unmatched + other.unmatched,
        )

    def to_json(self) -> dict:
        return {
            "labels": self.labels,
            "exact": self.exact,
            "partial": self.partial,
            "falseNegative": self.false_negative,
            "falsePositive": self.false_positive,
            "allowlisted": self.allowlisted,
            "found": self.found,
            "precision": round(self.precision, 4),
            "recall": round(self.recall, 4),
            "recallWithPartial": round(self.recall_with_partial, 4),
            "recallExcludingAllowlist": round(self.recall_excluding_allowlist, 4),
            "missed": [lb.to_json() for lb in self.missed],
            "partialLabels": [lb.to_json() for lb in self.partials],
            "unmatchedAssets": [{"fileName": a.location.file_name, "line": a.location.line, "api": a.api_name,
                                 "function": a.function, "algorithm": a.variant} for a in self.unmatched],
        }


def _same(a, b) -> bool:
    if isinstance(a, str) and isinstance(b, str):
        return a.replace("_", "-").upper() == b.replace("_", "-").upper()
    return a == b


def match_class(label: ReferenceLabel, asset: CryptoAsset) -> int:
    """EXACT, PARTIAL or 0 for one (label, asset) pair."""
    loc = asset.location
    if loc.file_name != label.file_name or loc.line != label.line or asset.api_name != label.api:
        return 0
    if asset.function != label.function or not _same(asset.variant, label.algorithm):
        return PARTIAL
    if label.mode is not None and not _same(asset.mode, label.mode):
        return PARTIAL
    if label.key_size is not None and asset.key_size != label.key_size:
        return PARTIAL
    return EXACT


def _value_key(asset: CryptoAsset) -> tuple:
    loc = asset.location
    return (loc.file_name, loc.line, loc.start_column, asset.api_name, asset.function, asset.variant,
            asset.mode, asset.key_size)


def match_assets(labels: Iterable[ReferenceLabel], assets: Iterable[CryptoAsset],
                 allowlist: Iterable[tuple[str, int]] = ()) -> MatchResult:
    """Score ``assets`` against ``labels``.

    Exact matches are assigned before partial ones so that the outcome
    does not depend on label or asset order. Each asset serves at most one
    label; among equal candidates the one nearest the label's line (then
    the lowest column) wins. Assets value-identical to a matched asset are
    collapsed into that match; every other unmatched asset is a false
    positive.
    """
    labels = sorted(set(labels), key=lambda lb: (lb.file_name, lb.line, lb.api, lb.function, str(lb.algorithm),
                                                 str(lb.mode), lb.key_size or 0))
    assets = sorted(assets, key=lambda a: (_value_key(a)[:4], a.asset_id))
    allowed = set(allowlist)
    taken: dict[int, ReferenceLabel] = {}
    result_of: dict[ReferenceLabel, int] = {}
    for wanted in (EXACT, PARTIAL):
        for label in labels:
            if label in result_of:
                continue
            best = None
            for i, a in enumerate(assets):
                if i in taken or match_class(label, a) < wanted:
                    continue
                rank = (abs(a.location.line - label.line), a.location.start_column)
                if best is None or rank < best[0]:
                    best = (rank, i)
            if best is not None:
                taken[best[1]] = label
                result_of[label] = wanted
    matched_keys = {_value_key(assets[i]) for i in taken}
    res = MatchResult(labels=len(labels), found=len(assets))
    for label in labels:
        cls = result_of.get(label, 0)
        if cls == EXACT:
            res.exact += 1
        elif cls == PARTIAL:
            res.partial += 1
            res.partials.append(label)
        else:
            res.false_negative += 1
            res.missed.append(label)
            if (label.file_name, label.line) in allowed:
                res.allowlisted += 1
    for i, a in enumerate(assets):
        if i in taken or _value_key(a) in matched_keys:
            res.matched_found += 1
        else:
            res.false_positive += 1
            res.unmatched.append(a)
    return res


# -- label files -------------------------------------------------------------------------

def labels_schema() -> dict:
    return json.loads(resources.files("cryptoscope").joinpath("data/labels.schema.json").read_text("utf-8"))


def load_labels(path: Path | str) -> tuple[list[ReferenceLabel], list[tuple[str, int]]]:
    """(labels, allowlisted (file, line) pairs) of a labels.json file."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        jsonschema.validate(raw, labels_schema())
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"{path}: {exc.message}") from exc
    labels = [ReferenceLabel.from_json(x) for x in raw["labels"]]
    allow = [(x["fileName"], x["line"]) for x in raw.get("allowlist", [])]
    return labels, allow


def load_expected_vulns(path: Path | str) -> list[tuple[str, int, str]]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return sorted((f["fileName"], int(f["line"]), f["cwe"]) for f in raw["findings"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: expected {{'findings': [{{fileName, line, cwe}}]}}") from exc


def vuln_keys(assets: Iterable[CryptoAsset], vulns: Iterable[VulnerabilityReport]) -> list[tuple[str, int, str]]:
    """(file, criterion line, cwe) per report."""
    where = {a.asset_id: a.location for a in assets}
    out = []
    for v in vulns:
        loc = where[v.asset_id]
        out.append((loc.file_name, loc.line, v.classification))
    return sorted(out)


@dataclass
class VulnTally:
    expected: int = 0
    fired: int = 0
    missed: int = 0
    unexpected: int = 0

    def to_json(self) -> dict:
        return {"expected": self.expected, "fired": self.fired, "missed": self.missed, "unexpected": self.unexpected}


@dataclass
class ProjectResult:
    name: str
    match: MatchResult
    expected_vulns: list[tuple[str, int, str]]
    actual_vulns: list[tuple[str, int, str]]

    @property
    def vulns_ok(self) -> bool:
        return self.expected_vulns == self.actual_vulns

    def to_json(self) -> dict:
        return {
            "project": self.name,
            "match": self.match.to_json(),
            "vulnsOk": self.vulns_ok,
            "expectedVulns": [list(v) for v in self.expected_vulns],
            "actualVulns": [list(v) for v in self.actual_vulns],
        }


@dataclass
class CorpusResult:
    projects: list[ProjectResult] = field(default_factory=list)

    @property
    def total(self) -> MatchResult:
        out = MatchResult()
        for p in self.projects:
            out = out + p.match
        return out

    def vuln_table(self) -> dict[str, VulnTally]:
        table: dict[str, VulnTally] = {}
        for p in self.projects:
            expected, actual = list(p.expected_vulns), list(p.actual_vulns)
            for key in expected:
                t = table.setdefault(key[2], VulnTally())
                t.expected += 1
                if key in actual:
                    actual.remove(key)
                    t.fired += 1
                else:
                    t.missed += 1
            for key in actual:
                table.setdefault(key[2], VulnTally()).unexpected += 1
        return dict(sorted(table.items(), key=lambda kv: int(kv[0][3:])))

    def summary_rows(self) -> list[dict]:
        rows = []
        for p in self.projects:
            m = p.match
            rows.append({"project": p.name, "labels": m.labels, "exact": m.exact, "partial": m.partial,
                         "falseNegative": m.false_negative, "falsePositive": m.false_positive,
                         "allowlisted": m.allowlisted, "precision": round(m.precision, 4),
                         "recall": round(m.recall, 4), "recallWithPartial": round(m.recall_with_partial, 4)})
        return rows

    def to_json(self) -> dict:
        return {
            "total": self.total.to_json(),
            "vulns": {cwe: t.to_json() for cwe, t in self.vuln_table().items()},
            "projects": [p.to_json() for p in self.projects],
        }


def corpus_projects(corpus_dir: Path | str) -> list[Path]:
    root = Path(corpus_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus {root} is not a directory")
    return sorted(p for p in root.iterdir() if p.is_dir())


def evaluate_project(project_dir: Path, config: Optional[ScanConfig] = None) -> ProjectResult:
    labels_path = project_dir / "labels.json"
    vulns_path = project_dir / "expected-vulns.json"
    if not labels_path.is_file():
        raise FileNotFoundError(f"missing {labels_path}")
    if not vulns_path.is_file():
        raise FileNotFoundError(f"missing {vulns_path}")
    labels, allow = load_labels(labels_path)
    expected = load_expected_vulns(vulns_path)
    cfg = ScanConfig(project_dir)
    if config is not None:
        cfg = ScanConfig(**{**config.__dict__, "root_dir": project_dir})
    result, _ = run_on_big_stack(analyze, cfg)
    match = match_assets(labels, result.assets, allow)
    return ProjectResult(project_dir.name, match, expected, vuln_keys(result.assets, result.vulns))


def run_corpus(corpus_dir: Path | str, out_dir: Optional[Path | str] = None,
               config: Optional[ScanConfig] = None, figures: bool = False) -> CorpusResult:
    """Scan every project of a corpus and score it; writes eval-report.json when ``out_dir`` is given."""
    result = CorpusResult([evaluate_project(p, config) for p in corpus_projects(corpus_dir)])
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "eval-report.json").write_text(json.dumps(result.to_json(), indent=2) + "\n", encoding="utf-8")
        if figures:
            from .figures import eval_figures
            eval_figures(result.summary_rows(), out)
    return result
