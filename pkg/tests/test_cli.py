import json
import os

import pytest

from wealthtest.cli import main


def test_deterministic_json(tmp_path, capsys):
    out = tmp_path / "det.json"
    assert main(["deterministic", "--out", str(out)]) == 0
    rows = json.loads(out.read_text())
    by_policy = {r["policy"]: r["n"] for r in rows}
    assert by_policy["c=1.0"] == 97
    assert by_policy["integrated"] == 117


def test_deterministic_csv(tmp_path):
    out = tmp_path / "det.csv"
    assert main(["deterministic", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "policy,n"
    assert len(lines) == 7


def test_custom_run_and_reproducibility(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "scenarios": [
            {"name": "beta", "dist": {"kind": "beta", "a": 2, "b": 98}, "c": 0.8}
        ],
        "replications": 40,
        "horizon": 1000,
    }))
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["custom", "--config", str(cfg), "--seed", "5", "--out", str(out1)]) == 0
    assert main(["custom", "--config", str(cfg), "--seed", "5", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    rows = json.loads(out1.read_text())
    assert rows[0]["scenario"] == "beta"
    assert 100 < rows[0]["mean_n"] < 140


def test_invalid_config_exits_2(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"scenarios": [{"name": "x"}]}))
    assert main(["custom", "--config", str(cfg), "--seed", "1"]) == 2

    cfg2 = tmp_path / "bad2.json"
    cfg2.write_text(json.dumps({"scenarios": [], "replications": 0}))
    assert main(["custom", "--config", str(cfg2), "--seed", "1"]) == 2

    assert main(["custom", "--config", str(tmp_path / "missing.json"), "--seed", "1"]) == 2


def test_type1_band_assertion(tmp_path):
    out = tmp_path / "t1.json"
    code = main(["type1", "--reps", "3000", "--seed", "11", "--out", str(out)])
    assert code == 0
    rows = json.loads(out.read_text())
    assert all(r["in_band"] for r in rows)
