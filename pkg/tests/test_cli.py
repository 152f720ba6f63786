import json

import pytest

from hkrlab.cli import SCHEMA, main


def run(tmp_path, argv, name="out.json"):
    out = tmp_path / name
    code = main(argv + ["--out", str(out)])
    return code, json.loads(out.read_text())


def test_hkr_example(tmp_path, capsys):
    code, report = run(tmp_path, ["hkr", "--m", "2", "--k", "1", "--n", "2", "--d", "1", "--o", "1", "--module", "diffop"])
    assert code == 0
    assert [r["direct"] for r in report["tables"]["cohomology"]] == [6, 6, 0]
    assert report["schema"] == SCHEMA
    text = capsys.readouterr().out
    assert "closed-form" in text and "5/5 checks passed" in text


def test_chainmaps_example(tmp_path):
    code, report = run(tmp_path, ["chainmaps", "--m", "2", "--degree", "2", "--samples", "50", "--seed", "7"])
    assert code == 0
    assert report["seed"] == 7
    assert all(c["status"] == "pass" for c in report["checks"])


def test_assoc_example(tmp_path):
    code, report = run(tmp_path, ["assoc", "--A", "0 1; 0 0", "--order", "3", "--seed", "1"])
    assert code == 0
    assert report["tables"]["poisson_matrix"] == [["0", "1/2*i"], ["-1/2*i", "0"]]


@pytest.mark.parametrize(
    "argv",
    [
        ["assoc", "--order", "2", "--samples", "10"],
        ["obstruction", "--order", "2", "--samples", "3"],
        ["sp-check", "--samples", "5"],
        ["bimodule", "--order", "2"],
        ["subalgebra", "--order", "2", "--samples", "5"],
        ["chainmaps", "--m", "1", "--degree", "2", "--samples", "5"],
        ["hkr", "--module", "functions", "--d", "2"],
    ],
)
def test_determinism(tmp_path, argv):
    argv = argv + ["--seed", "5"]
    code1, _ = run(tmp_path, argv, "a.json")
    code2, _ = run(tmp_path, argv, "b.json")
    assert code1 == code2 == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_config_overrides_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m": 1, "k": 1, "n": 1, "d": 2}))
    code, report = run(tmp_path, ["hkr", "--m", "3", "--module", "functions", "--config", str(cfg)])
    assert code == 0
    assert report["params"]["m"] == 1
    assert [r["direct"] for r in report["tables"]["cohomology"]] == [3, 3]


@pytest.mark.parametrize(
    "argv",
    [
        ["hkr", "--m", "2", "--k", "3"],
        ["chainmaps", "--samples", "0"],
        ["assoc", "--A", "0 1"],
        ["sp-check", "--A", "0 0 0; 0 0 0; 0 0 0"],
        ["bimodule", "--A", "1 0; 0 1"],
    ],
)
def test_invalid_parameters_exit_nonzero(argv, capsys):
    assert main(argv) == 2
    assert "usage" in capsys.readouterr().err


def test_bad_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["hkr", "--config", str(cfg)]) == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_failed_check_exit_status(monkeypatch, capsys):
    from hkrlab import suites

    def broken(*args, **kwargs):
        res = suites.Result()
        res.add("always_fails", False, {"reason": "forced"})
        return res

    monkeypatch.setattr(suites, "hkr_suite", broken)
    assert main(["hkr", "--json"]) == 1
    captured = capsys.readouterr()
    assert json.loads(captured.out)["ok"] is False
    assert "always_fails" in captured.err
