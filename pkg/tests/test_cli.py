from __future__ import annotations

import json
import shutil
import subprocess
import sys

import pytest

from cryptoscope import __version__
from cryptoscope.cli import EXIT_CONFIG, EXIT_FINDINGS, EXIT_IO, EXIT_OK, main

from conftest import CORPUS

TS, SERIAL = "2024-05-01T12:00:00Z", "3e671687-395b-41f5-a30f-a58921a69b79"


def test_exit_codes_are_distinct():
    assert (EXIT_OK, EXIT_FINDINGS, EXIT_CONFIG, EXIT_IO) == (0, 1, 2, 3)


def test_scan_with_findings_still_succeeds(tmp_path, capsys):
    assert main(["scan", str(CORPUS / "cwe327"), "--out", str(tmp_path)]) == EXIT_OK
    assert "findings" in capsys.readouterr().out
    assert len(json.loads((tmp_path / "vulns.json").read_text(encoding="utf-8"))) == 1


def test_fail_on_gates_by_severity(tmp_path):
    args = ["scan", str(CORPUS / "cwe327"), "--out", str(tmp_path)]
    assert main(args + ["--fail-on", "Major"]) == EXIT_FINDINGS
    assert main(args + ["--fail-on", "Critical"]) == EXIT_OK
    assert main(["scan", str(CORPUS / "listing1"), "--out", str(tmp_path), "--fail-on", "Minor"]) == EXIT_OK


@pytest.mark.parametrize("extra", [["--context-depth", "-1"], ["--policy", "missing.json"], ["--jobs", "0"]])
def test_bad_configuration(tmp_path, extra, capsys):
    assert main(["scan", str(CORPUS / "listing1"), "--out", str(tmp_path)] + extra) == EXIT_CONFIG
    assert capsys.readouterr().err.startswith("error:")


def test_bad_root(tmp_path):
    assert main(["scan", str(tmp_path / "absent"), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_broken_kb_file(tmp_path):
    bad = tmp_path / "kb.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["scan", str(CORPUS / "listing1"), "--out", str(tmp_path / "o"), "--kb", str(bad)]) == EXIT_CONFIG


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    assert main(["scan", str(CORPUS / "listing1"), "--out", str(blocker / "out")]) == EXIT_IO


def test_version():
    proc = subprocess.run([sys.executable, "-m", "cryptoscope.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip().endswith(__version__)


def test_injected_timestamp_and_serial(tmp_path):
    main(["scan", str(CORPUS / "listing1"), "--out", str(tmp_path), "--timestamp", TS, "--serial", SERIAL])
    cbom = json.loads((tmp_path / "cbom.json").read_text(encoding="utf-8"))
    assert cbom["metadata"]["timestamp"] == TS and cbom["serialNumber"] == f"urn:uuid:{SERIAL}"


def test_report_flag_writes_table_and_chart(tmp_path):
    assert main(["scan", str(CORPUS / "discovery-app"), "--out", str(tmp_path), "--report"]) == EXIT_OK
    header = (tmp_path / "assets.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("assetId,file,line,function")
    assert (tmp_path / "assets.png").read_bytes()[:4] == b"\x89PNG"


def test_dump_flags(tmp_path):
    main(["scan", str(CORPUS / "listing3"), "--out", str(tmp_path), "--dump-ir", "--dump-slices", "--dump-assets"])
    assert {p.name for p in tmp_path.iterdir()} == {
        "cbom.json", "vulns.json", "scan-report.json", "ir.json", "slices.json", "assets.json"}


def test_evaluate_with_figures(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    for name in ("listing1", "listing3"):
        shutil.copytree(CORPUS / name, corpus / name)
    out = tmp_path / "out"
    assert main(["evaluate", str(corpus), "--out", str(out), "--figures"]) == EXIT_OK
    assert "total: recall 100.00%" in capsys.readouterr().out
    assert {p.name for p in out.iterdir()} == {"eval-report.json", "eval-summary.csv", "recall.png"}


def test_evaluate_missing_corpus(tmp_path):
    assert main(["evaluate", str(tmp_path / "absent"), "--out", str(tmp_path)]) == EXIT_IO
