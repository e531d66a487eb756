import json
import subprocess
import sys
from pathlib import Path

import pytest

from cuspidal.cli import main

HERE = Path(__file__).parent


def run_cli(args):
    proc = subprocess.run(
        [sys.executable, "-m", "cuspidal.cli", *args],
        capture_output=True,
        text=True,
    )
    return proc


def write_spec(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_report(path):
    lines = [json.loads(l) for l in Path(path).read_text().splitlines()]
    header = lines[0]
    summary = lines[-1]
    rows = lines[1:-1]
    assert header["type"] == "header"
    assert summary["type"] == "summary"
    return header, rows, summary


def test_cuspidality_command(tmp_path):
    spec = write_spec(
        tmp_path,
        "cusp.json",
        {
            "p": 5,
            "e": 1,
            "window_radius": 6,
            "mu_list": [
                [["1", "2", 0], ["1", "3", 0]],
                [[1, 1, 0], ["1", "3", 0]],
            ],
        },
    )
    out = str(tmp_path / "report.jsonl")
    rc = main(["cuspidality", "--spec", spec, "--out", out])
    assert rc == 0
    header, rows, summary = read_report(out)
    assert header["command"] == "cuspidality"
    assert len(rows) == 2
    assert rows[0]["cuspidal"] is True
    assert rows[0]["degree"] == 1
    assert rows[1]["cuspidal"] is False
    assert rows[1]["failing_root"] == [1, 0]


def test_cuspidality_empty_list(tmp_path):
    spec = write_spec(tmp_path, "empty.json", {"p": 5, "mu_list": []})
    out = str(tmp_path / "r.jsonl")
    rc = main(["cuspidality", "--spec", spec, "--out", out])
    assert rc == 0
    _, rows, summary = read_report(out)
    assert rows == []
    assert summary["rows"] == 0


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    proc = run_cli(["cuspidality", "--spec", str(bad)])
    assert proc.returncode == 2
    assert "config error" in proc.stderr
    proc = run_cli(["cuspidality", "--spec", str(tmp_path / "missing.json")])
    assert proc.returncode == 2


def test_certify_command(tmp_path):
    spec = write_spec(
        tmp_path,
        "certify.json",
        {
            "p": 5,
            "e": 2,
            "precision": 40,
            "radius": {"kappa": 1, "m0": 1, "m": 1, "lambda_s": "1/2"},
            "points": [
                {"mu": [[1, 1, -1], [1, 1, 1]], "a": [5, 1, 0], "b": [0, 1, 0]},
                {"mu": [[1, 1, -1], [1, 1, 1]], "a": [25, 1, 0], "b": [0, 1, 0]},
                {"mu": [[1, 2, 0], [1, 3, 0]], "a": [5, 1, 0], "b": [0, 1, 0]},
            ],
        },
    )
    out = str(tmp_path / "report.jsonl")
    rc = main(["certify", "--spec", spec, "--out", out, "--horizon", "120"])
    assert rc == 0
    _, rows, summary = read_report(out)
    assert rows[0]["status"] == "ok"
    assert rows[0]["certificate"]["verdict"] == "Diverges"
    assert rows[0]["certificate"]["slope"] == "-3/4"
    assert rows[0]["oracle_zero_residual"] is True
    assert rows[1]["certificate"]["verdict"] == "Converges"
    assert rows[2]["status"] == "skipped"
    assert "valuations_outside_base_group" in rows[2]["reason"]


def test_decompose_command(tmp_path):
    spec = write_spec(
        tmp_path,
        "dec.json",
        {
            "p": 5,
            "e": 1,
            "bruhat": [[["1", "0"], ["0", "1"]], [["0", "1"], ["1", "0"]]],
            "iwahori": [[["1", "1"], ["5", "6"]]],
            "cartan": [[[1], [0], [0], [25]]],
            "mackey_jmax": 2,
        },
    )
    out = str(tmp_path / "report.jsonl")
    rc = main(["decompose", "--spec", spec, "--out", out, "--level", "2"])
    assert rc == 0
    _, rows, _ = read_report(out)
    bruhat_rows = [r for r in rows if r["kind"] == "bruhat"]
    assert bruhat_rows[0]["cell"] == "1"
    assert bruhat_rows[1]["cell"] == "w0"
    assert all(r["reconstruction_ok"] for r in rows if "reconstruction_ok" in r)
    cartan_rows = [r for r in rows if r["kind"] == "cartan"]
    assert cartan_rows[0]["gap"] == 2
    mackey_rows = [r for r in rows if r["kind"] == "mackey"]
    assert [l["j"] for l in mackey_rows[0]["labels"]] == [0, 1, 2]


def test_char_eval_command(tmp_path):
    spec = write_spec(
        tmp_path,
        "char.json",
        {
            "p": 5,
            "e": 1,
            "precision": 24,
            "evaluations": [
                {"mu": [1, 2, 0], "x": [26, 1, 0], "terms": 40, "method": "both"},
                {"mu": [3, 1, 0], "x": [6, 1, 0], "terms": 5, "method": "binomial"},
            ],
        },
    )
    out = str(tmp_path / "report.jsonl")
    rc = main(["char-eval", "--spec", spec, "--out", out])
    assert rc == 0
    _, rows, _ = read_report(out)
    assert rows[0]["status"] == "ok"
    assert rows[0]["agree"] is True
    assert rows[1]["binomial"] == ["216", "1", 0]


def test_h0_check_command(tmp_path):
    spec = write_spec(
        tmp_path,
        "h0.json",
        {
            "p": 5,
            "e": 1,
            "window_radius": 6,
            "specs": [{"mu": [[1, 2, 0], [1, 3, 0]]}, {"mu": [[1, 1, 0], [1, 3, 0]]}],
            "conjugators": [
                {"type": "identity"},
                {"type": "upper", "param": [3, 1, 0]},
                {"type": "lower", "param": [5, 1, 0]},
            ],
        },
    )
    out = str(tmp_path / "report.jsonl")
    rc = main(["h0-check", "--spec", spec, "--out", out])
    assert rc == 0
    _, rows, _ = read_report(out)
    assert rows[0]["all_injective"] is True
    assert rows[1]["all_injective"] is False


def test_ore_witness_command(tmp_path):
    spec = write_spec(
        tmp_path,
        "ore.json",
        {
            "pairs": [
                {"s_coeff": "1", "delta": [[1, 0, 0, "1"]], "degree_budget": 4},
                {"s_coeff": "2", "delta": [[0, 0, 0, "1"]], "degree_budget": 2},
            ]
        },
    )
    out = str(tmp_path / "report.jsonl")
    rc = main(["ore-witness", "--spec", spec, "--out", out])
    assert rc == 0
    _, rows, _ = read_report(out)
    assert all(r["status"] == "ok" and r["verified"] for r in rows)


def test_reports_are_byte_identical_and_parallel_stable(tmp_path):
    spec = write_spec(
        tmp_path,
        "cusp.json",
        {
            "p": 5,
            "window_radius": 5,
            "mu_list": [
                [["1", "2", 0], ["1", "3", 0]],
                [[2, 1, 0], ["1", "7", 0]],
                [["5", "2", 0], ["1", "3", 0]],
            ],
        },
    )
    out1, out2, out3 = (str(tmp_path / f"r{i}.jsonl") for i in range(3))
    assert main(["cuspidality", "--spec", spec, "--out", out1]) == 0
    assert main(["cuspidality", "--spec", spec, "--out", out2]) == 0
    assert main(["cuspidality", "--spec", spec, "--out", out3, "--jobs", "2"]) == 0
    b1, b2, b3 = (Path(p).read_bytes() for p in (out1, out2, out3))
    assert b1 == b2 == b3


def test_stdout_output():
    proc = run_cli(["cuspidality", "--spec", "/nonexistent.json"])
    assert proc.returncode == 2
