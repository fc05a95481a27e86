"""CSV tables and matplotlib figures for scan and evaluation reports."""

from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .assets import CryptoAsset  # noqa: E402
from .kb import FUNCTIONS  # noqa: E402
from .vulns import VulnerabilityReport  # noqa: E402

ASSET_COLUMNS = ("assetId", "file", "line", "function", "primitive", "variant", "mode", "padding", "keySize",
                 "incomplete", "cwes")
EVAL_COLUMNS = ("project", "labels", "exact", "partial", "falseNegative", "falsePositive", "allowlisted",
                "precision", "recall", "recallWithPartial")


def _cell(value) -> str:
    return "" if value is None else str(value)


def asset_rows(assets: Iterable[CryptoAsset], vulns: Iterable[VulnerabilityReport]) -> list[dict]:
    cwes: dict[str, list[str]] = {}
    for v in vulns:
        cwes.setdefault(v.asset_id, []).append(v.classification)
    rows = []
    for a in assets:
        rows.append({
            "assetId": a.asset_id,
            "file": a.location.file_name,
            "line": a.location.line,
            "function": a.function,
            "primitive": _cell(a.primitive),
            "variant": _cell(a.variant),
            "mode": _cell(a.mode),
            "padding": _cell(a.padding),
            "keySize": _cell(a.key_size),
            "incomplete": str(a.incomplete).lower(),
            "cwes": " ".join(sorted(set(cwes.get(a.asset_id, [])))),
        })
    return rows


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[dict]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns))
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c, "") for c in columns})
    return path


def asset_report(assets: list[CryptoAsset], vulns: list[VulnerabilityReport], out_dir: Path) -> dict[str, Path]:
    """Write assets.csv and assets.png (assets per crypto function, split by finding)."""
    out_dir = Path(out_dir)
    rows = asset_rows(assets, vulns)
    csv_path = write_csv(out_dir / "assets.csv", ASSET_COLUMNS, rows)
    clean = Counter(r["function"] for r in rows if not r["cwes"])
    flagged = Counter(r["function"] for r in rows if r["cwes"])
    fig, ax = plt.subplots(figsize=(8, 4))
    xs = range(len(FUNCTIONS))
    ok = [clean.get(f, 0) for f in FUNCTIONS]
    bad = [flagged.get(f, 0) for f in FUNCTIONS]
    ax.bar(xs, ok, label="no finding", color="#4c72b0")
    ax.bar(xs, bad, bottom=ok, label="with finding", color="#c44e52")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(FUNCTIONS, rotation=30, ha="right")
    ax.set_ylabel("assets")
    ax.set_title("Crypto assets per function")
    ax.legend()
    fig.tight_layout()
    fig_path = out_dir / "assets.png"
    fig.savefig(fig_path, dpi=100)
    plt.close(fig)
    return {"assetsCsv": csv_path, "assetsFigure": fig_path}


def eval_figures(rows: list[dict], out_dir: Path) -> dict[str, Path]:
    """Write eval-summary.csv and recall.png (recall with and without partial matches per project)."""
    out_dir = Path(out_dir)
    csv_path = write_csv(out_dir / "eval-summary.csv", EVAL_COLUMNS, rows)
    fig, ax = plt.subplots(figsize=(max(6, len(rows) * 0.9), 4))
    names = [r["project"] for r in rows]
    xs = list(range(len(rows)))
    width = 0.4
    ax.bar([x - width / 2 for x in xs], [r["recall"] for r in rows], width, label="exact", color="#4c72b0")
    ax.bar([x + width / 2 for x in xs], [r["recallWithPartial"] for r in rows], width, label="exact + partial",
           color="#55a868")
    ax.set_xticks(xs)
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("recall")
    ax.set_title("Discovery recall per corpus project")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig_path = out_dir / "recall.png"
    fig.savefig(fig_path, dpi=100)
    plt.close(fig)
    return {"evalCsv": csv_path, "recallFigure": fig_path}
