import json
import socket
import subprocess
import sys
import time
import urllib.request

import pytest
from click.testing import CliRunner

from fuzzcare.cli import main
from fuzzcare.kb import INPUT_ORDER, bundled_cohort_csv, default_kb_json


@pytest.fixture()
def runner():
    return CliRunner()


PATIENT_4 = [
    "--ecg", "2.2", "--chest-pain", "2.4", "--blood-sugar", "200",
    "--cholesterol", "170", "--blood-pressure", "160", "--age", "48",
    "--heart-rate", "160",
]


class TestDiagnose:
    def test_patient4_high(self, runner):
        result = runner.invoke(main, ["diagnose", *PATIENT_4])
        assert result.exit_code == 0, result.output
        assert "risk level : High" in result.output
        assert "fired rules" in result.output

    def test_missing_age_exits_2(self, runner):
        args = [a for a in PATIENT_4 if a not in ("--age", "48")]
        result = runner.invoke(main, ["diagnose", *args])
        assert result.exit_code == 2
        assert "--age" in result.output

    def test_negative_blood_pressure_exits_2(self, runner):
        args = list(PATIENT_4)
        args[args.index("--blood-pressure") + 1] = "-5"
        result = runner.invoke(main, ["diagnose", *args])
        assert result.exit_code == 2
        assert "blood-pressure" in result.output
        assert "universe" in result.output

    def test_json_format_byte_stable(self, runner):
        a = runner.invoke(main, ["--format", "json", "diagnose", *PATIENT_4])
        b = runner.invoke(main, ["--format", "json", "diagnose", *PATIENT_4])
        assert a.exit_code == 0
        assert a.output == b.output
        doc = json.loads(a.output)
        assert doc["label"] == "High"
        assert doc["result"] is True

    def test_resolution_floor_enforced(self, runner):
        result = runner.invoke(main, ["--resolution", "50", "diagnose", *PATIENT_4])
        assert result.exit_code == 2


class TestGenRules:
    def test_writes_3888_and_round_trips(self, runner, tmp_path):
        out = tmp_path / "rules.dsl"
        result = runner.invoke(main, ["gen-rules", "--out", str(out)])
        assert result.exit_code == 0
        assert "3888" in result.output
        from fuzzcare.dsl import parse_rules
        from fuzzcare.kb import load_default_kb

        kb = load_default_kb()
        parsed = parse_rules(out.read_text())
        assert parsed == list(kb.rule_base.rules)

    def test_unwritable_path_exits_2(self, runner, tmp_path):
        target = tmp_path / "missing-dir" / "rules.dsl"
        result = runner.invoke(main, ["gen-rules", "--out", str(target)])
        assert result.exit_code == 2

    def test_toy_two_by_two_kb_prints_4(self, runner, tmp_path):
        toy = {
            "version": "toy",
            "provenance": "",
            "variables": [
                {
                    "name": "x",
                    "units": "unit",
                    "universe": [0.0, 1.0],
                    "terms": [
                        {"label": "lo", "kind": "trapezoidal", "params": [0.0, 0.0, 0.3, 0.7]},
                        {"label": "hi", "kind": "trapezoidal", "params": [0.3, 0.7, 1.0, 1.0]},
                    ],
                },
                {
                    "name": "y",
                    "units": "unit",
                    "universe": [0.0, 1.0],
                    "terms": [
                        {"label": "lo", "kind": "trapezoidal", "params": [0.0, 0.0, 0.3, 0.7]},
                        {"label": "hi", "kind": "trapezoidal", "params": [0.3, 0.7, 1.0, 1.0]},
                    ],
                },
            ],
            "output": {
                "name": "out",
                "units": "unit",
                "universe": [0.0, 10.0],
                "terms": [
                    {"label": "Low", "kind": "trapezoidal", "params": [0.0, 0.0, 2.5, 5.0]},
                    {"label": "Medium", "kind": "triangular", "params": [2.5, 5.0, 7.5]},
                    {"label": "High", "kind": "trapezoidal", "params": [5.0, 7.5, 10.0, 10.0]},
                ],
            },
            "pinned_rules": "",
            "policy": {"id": "severity-weighted-mean/v1", "weights": ["1", "1"],
                       "thresholds": ["1/3", "2/3"]},
        }
        kb_path = tmp_path / "toy.json"
        kb_path.write_text(json.dumps(toy))
        out = tmp_path / "toy-rules.dsl"
        result = runner.invoke(main, ["--kb", str(kb_path), "gen-rules", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "4 rules" in result.output
        assert len(out.read_text().strip().splitlines()) == 4


class TestEval:
    def test_bundled_cohort(self, runner, tmp_path):
        csv_path = tmp_path / "cohort.csv"
        csv_path.write_text(bundled_cohort_csv())
        result = runner.invoke(main, ["eval", "--csv", str(csv_path)])
        assert result.exit_code == 0
        assert "mean probability=0.9550" in result.output
        assert "n=10" in result.output

    def test_empty_cohort_exits_0(self, runner, tmp_path):
        csv_path = tmp_path / "empty.csv"
        csv_path.write_text(",".join(INPUT_ORDER) + ",expected_label\n")
        result = runner.invoke(main, ["eval", "--csv", str(csv_path)])
        assert result.exit_code == 0
        assert "n=0" in result.output

    def test_malformed_csv_exits_2(self, runner, tmp_path):
        csv_path = tmp_path / "bad.csv"
        csv_path.write_text("not,a,cohort\n1,2,3\n")
        result = runner.invoke(main, ["eval", "--csv", str(csv_path)])
        assert result.exit_code == 2


class TestValidate:
    def test_shipped_kb_passes(self, runner):
        result = runner.invoke(main, ["validate"])
        assert result.exit_code == 0
        assert "knowledge base valid" in result.output

    def test_broken_kb_exits_1(self, runner, tmp_path):
        doc = json.loads(default_kb_json())
        doc["variables"][2]["terms"] = doc["variables"][2]["terms"][:3]  # blood_sugar
        bad = tmp_path / "bad_kb.json"
        bad.write_text(json.dumps(doc))
        result = runner.invoke(main, ["--kb", str(bad), "validate"])
        assert result.exit_code == 1
        assert "term-counts" in result.output


class TestCalibrate:
    def test_reproduces_shipped_kb_byte_identically(self, runner, tmp_path):
        cohort = tmp_path / "cohort.csv"
        cohort.write_text(bundled_cohort_csv())
        out = tmp_path / "kb.json"
        result = runner.invoke(main, ["calibrate", "--table2", str(cohort), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert out.read_text() == default_kb_json()

    def test_unreadable_cohort_exits_2(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["calibrate", "--table2", str(tmp_path / "nope.csv"), "--out",
             str(tmp_path / "kb.json")],
        )
        assert result.exit_code == 2


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class TestServe:
    def test_serve_healthz_and_batch(self, tmp_path):
        port = _free_port()
        proc = subprocess.Popen(
            [sys.executable, "-m", "fuzzcare.cli",
             "--store", str(tmp_path / "store.jsonl"),
             "serve", "--listen", f"127.0.0.1:{port}"],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE,
        )
        try:
            base = f"http://127.0.0.1:{port}"
            for _ in range(100):
                try:
                    with urllib.request.urlopen(f"{base}/healthz", timeout=1) as r:
                        assert json.load(r)["status"] == "ok"
                    break
                except OSError:
                    time.sleep(0.1)
            else:
                pytest.fail("service never became healthy")

            cohort_lines = bundled_cohort_csv().splitlines()
            header = ",".join(INPUT_ORDER)
            rows = [",".join(line.split(",")[:7]) for line in cohort_lines[1:]]
            body = (header + "\n" + "\n".join(rows) + "\n").encode()
            req = urllib.request.Request(
                f"{base}/v1/patients/batch", data=body,
                headers={"content-type": "text/csv"},
            )
            with urllib.request.urlopen(req, timeout=5) as r:
                reports = json.load(r)
            assert len(reports) == 10
            labels = [item["label"] for item in reports]
            assert labels == ["Low", "Low", "Medium", "High", "Low",
                              "Low", "Medium", "High", "Low", "Low"]
        finally:
            proc.terminate()
            proc.wait(timeout=10)

    def test_bad_port_exits_2(self):
        result = subprocess.run(
            [sys.executable, "-m", "fuzzcare.cli", "serve", "--listen",
             "127.0.0.1:notaport"],
            capture_output=True, text=True,
        )
        assert result.returncode == 2

    def test_occupied_port_exits_2(self):
        with socket.socket() as blocker:
            blocker.bind(("127.0.0.1", 0))
            blocker.listen(1)
            port = blocker.getsockname()[1]
            result = subprocess.run(
                [sys.executable, "-m", "fuzzcare.cli", "serve", "--listen",
                 f"127.0.0.1:{port}"],
                capture_output=True, text=True,
            )
        assert result.returncode == 2
        assert "cannot bind" in result.stderr
