"""Project-level parsing: file discovery, decoding and per-file parse."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fnmatch import fnmatch
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .ast import AstNode, Location
from .parser import parse_source

DEFAULT_INCLUDE = ("**/*.java",)


@dataclass(frozen=True)
class SourceFile:
    path: str  # relative to the project root, posix separators
    unit: AstNode
    text: str
    line_count: int


@dataclass(frozen=True)
class ProjectError:
    path: str
    location: Location
    message: str


@dataclass
class SubjectProject:
    root_dir: Path
    files: list[SourceFile] = field(default_factory=list)
    parse_errors: list[ProjectError] = field(default_factory=list)

    @property
    def total_lines(self) -> int:
        return sum(f.line_count for f in self.files)

    def file(self, path: str) -> Optional[SourceFile]:
        for f in self.files:
            if f.path == path:
                return f
        return None


def _matches(rel: str, patterns: Iterable[str]) -> bool:
    for pat in patterns:
        if fnmatch(rel, pat) or (pat.startswith("**/") and fnmatch(rel, pat[3:])):
            return True
    return False


def list_sources(root_dir: Path, include: Sequence[str] = DEFAULT_INCLUDE, exclude: Sequence[str] = ()) -> list[str]:
    """Relative paths of candidate files, sorted lexicographically."""
    root = Path(root_dir)
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in filenames:
            rel = (Path(dirpath) / name).relative_to(root).as_posix()
            if _matches(rel, include) and not _matches(rel, exclude):
                found.append(rel)
    return sorted(found)


def parse_file(root_dir: Path, rel: str) -> tuple[Optional[SourceFile], list[ProjectError]]:
    path = Path(root_dir) / rel
    try:
        data = path.read_bytes()
    except OSError as exc:
        return None, [ProjectError(rel, Location(rel, 1, 1, 1), f"IoError: {exc.strerror or exc}")]
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        return None, [ProjectError(rel, Location(rel, 1, 1, 1), f"IoError: not UTF-8 ({exc.reason})")]
    if "\x00" in text:
        return None, [ProjectError(rel, Location(rel, 1, 1, 1), "IoError: binary content")]
    unit, errors = parse_source(data, rel)
    source = SourceFile(rel, unit, text, text.count("\n") + (0 if text.endswith("\n") or not text else 1))
    return source, [ProjectError(rel, e.location, e.message) for e in errors]


def parse_project(
    root_dir: Path | str,
    include: Sequence[str] = DEFAULT_INCLUDE,
    exclude: Sequence[str] = (),
    jobs: int = 1,
    only: Optional[Sequence[str]] = None,
) -> SubjectProject:
    """Parse every matching file under ``root_dir``.

    ``only`` restricts parsing to the given relative paths (used by the
    prefilter). Results are ordered by path whatever the value of ``jobs``.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"project root {root} is not a directory")
    rels = list(only) if only is not None else list_sources(root, include, exclude)
    rels = sorted(rels)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda r: parse_file(root, r), rels))
    else:
        results = [parse_file(root, r) for r in rels]
    project = SubjectProject(root)
    for source, errors in results:
        if source is not None:
            project.files.append(source)
        project.parse_errors.extend(errors)
    return project
