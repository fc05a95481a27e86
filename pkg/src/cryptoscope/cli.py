"""Command line interface: ``cryptoscope scan`` and ``cryptoscope evaluate``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .constprop import DEFAULT_BUDGET, DEFAULT_K
from .kb import KbError
from .scan import SEVERITIES, ConfigError, IoError, ScanConfig, exceeds, run_scan
from .slicer import DEFAULT_MAX_CONTEXTS, DEFAULT_SLICE_BUDGET

log = logging.getLogger("cryptoscope")

EXIT_OK, EXIT_FINDINGS, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cryptoscope", description="Crypto asset inventory and misuse scanner.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="scan a source tree and write cbom.json, vulns.json and scan-report.json")
    scan.add_argument("root", type=Path, help="project root directory")
    scan.add_argument("--kb", type=Path, action="append", default=[], help="extra KB file (repeatable)")
    scan.add_argument("--policy", type=Path, help="policy overlay file")
    scan.add_argument("--context-depth", type=int, default=DEFAULT_K, help="call-string length k")
    scan.add_argument("--const-budget", type=int, default=DEFAULT_BUDGET, help="constant propagation step budget")
    scan.add_argument("--max-contexts", type=int, default=DEFAULT_MAX_CONTEXTS,
                      help="contexts per criterion before merging")
    scan.add_argument("--slice-budget", type=int, default=DEFAULT_SLICE_BUDGET, help="statements per slice")
    scan.add_argument("--out", type=Path, default=Path("cryptoscope-out"), help="output directory")
    scan.add_argument("--no-prefilter", action="store_true", help="analyze every file")
    scan.add_argument("--fail-on", choices=SEVERITIES, help="exit 1 if a finding has at least this severity")
    scan.add_argument("--dump-ir", action="store_true", help="also write ir.json")
    scan.add_argument("--dump-slices", action="store_true", help="also write slices.json")
    scan.add_argument("--dump-assets", action="store_true", help="also write assets.json")
    scan.add_argument("--report", action="store_true", help="also write assets.csv and assets.png")
    scan.add_argument("--timestamp", help="fixed CBOM timestamp (RFC 3339)")
    scan.add_argument("--serial", help="fixed CBOM serial number (UUID)")
    scan.add_argument("--jobs", type=int, default=1, help="parser threads")

    ev = sub.add_parser("evaluate", help="score the scanner against a labeled corpus")
    ev.add_argument("corpus", type=Path, help="corpus directory with one project per subdirectory")
    ev.add_argument("--out", type=Path, default=Path("cryptoscope-eval"), help="output directory")
    ev.add_argument("--figures", action="store_true", help="also write eval-summary.csv and recall.png")
    ev.add_argument("--context-depth", type=int, default=DEFAULT_K, help="call-string length k")
    return parser


def _scan(args: argparse.Namespace) -> int:
    config = ScanConfig(
        root_dir=args.root, kb_paths=list(args.kb), policy_path=args.policy, context_depth=args.context_depth,
        const_budget=args.const_budget, max_contexts=args.max_contexts, slice_budget=args.slice_budget,
        output_dir=args.out, dump_ir=args.dump_ir, dump_slices=args.dump_slices, dump_assets=args.dump_assets,
        no_prefilter=args.no_prefilter, report=args.report, jobs=args.jobs, timestamp=args.timestamp,
        serial=args.serial,
    )
    result = run_scan(config)
    rep = result.report
    print(f"{rep.files_scanned} files scanned ({rep.files_pruned} pruned), {rep.assets} assets, "
          f"{rep.vulns} findings, {rep.lines_per_second:.0f} lines/s")
    for name, path in sorted(result.outputs.items()):
        log.info("wrote %s: %s", name, path)
    if args.fail_on and exceeds(result.vulns, args.fail_on):
        return EXIT_FINDINGS
    return EXIT_OK


def _evaluate(args: argparse.Namespace) -> int:
    from .evaluation import run_corpus

    config = ScanConfig(args.corpus, context_depth=args.context_depth)
    result = run_corpus(args.corpus, args.out, config, figures=args.figures)
    total = result.total
    for row in result.summary_rows():
        print(f"{row['project']:<28} labels {row['labels']:>3}  exact {row['exact']:>3}  "
              f"partial {row['partial']:>2}  fn {row['falseNegative']:>2}  fp {row['falsePositive']:>2}")
    print(f"total: recall {total.recall:.2%}, with partial {total.recall_with_partial:.2%}, "
          f"excluding allowlist {total.recall_excluding_allowlist:.2%}, false positives {total.false_positive}")
    print(json.dumps({cwe: t.to_json() for cwe, t in result.vuln_table().items()}))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "scan":
            return _scan(args)
        return _evaluate(args)
    except (ConfigError, KbError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IoError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
