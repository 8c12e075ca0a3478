import json
import math

import pytest

from dcone import cli


def _manifest(path):
    data = json.loads(path.read_text())
    m = cli.RunManifest(**data)
    return data, m


def test_linear_solve(tmp_path, capsys):
    out = tmp_path / "lin.json"
    prof = tmp_path / "lin.csv"
    man = tmp_path / "m.json"
    code = cli.main(["linear-solve", "--json", str(out), "--profile", str(prof),
                     "--manifest", str(man)])
    assert code == 0
    text = capsys.readouterr().out
    fold = float(text.split("fold_length =")[1].split()[0])
    assert 2.42 < fold < 2.43
    rec = json.loads(out.read_text())
    assert set(rec) >= {"s_hat", "Lambda", "energy", "n", "h", "kappa"}
    assert prof.read_text().startswith("s,h,kappa\n")
    data, m = _manifest(man)
    assert m.verify() and len(m.outputs) == 2 and data["subcommand"] == "linear-solve"


def test_linear_solve_certify(capsys):
    assert cli.main(["linear-solve", "--certify"]) == 0
    assert "N=1 energy ≤ 67.4 < 80 ≤ N=2 energy" in capsys.readouterr().out


def test_malformed_flag_exits_64(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["linear-solve", "--nope"])
    assert exc.value.code == 64
    assert "usage" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        cli.main(["sweep", "--eps-list", "a,b"])
    assert exc.value.code == 64


def test_elastica_regime_error_writes_report(tmp_path):
    code = cli.main(["elastica", "--eps", "0.9", "--out", str(tmp_path)])
    assert code == 3
    rep = json.loads((tmp_path / "report.json").read_text())
    assert "RegimeError" in rep["error"]
    data, m = _manifest(tmp_path / "manifest.json")
    assert m.verify() and data["exit_code"] == 3


def test_elastica_run_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["elastica", "--eps", "0.05", "--n", "512", "--out", str(a)]) == 0
    assert cli.main(["elastica", "--eps", "0.05", "--n", "512", "--out", str(b)]) == 0
    for name in ("report.json", "profile.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rep = json.loads((a / "report.json").read_text())
    assert rep["report"]["n_lift"] == 1 and rep["report"]["converged"]
    assert (a / "profile.csv").read_text().startswith("theta,alpha,kappa,s\n")


def test_elastica_config_file_and_init_file(tmp_path):
    first = tmp_path / "first"
    assert cli.main(["elastica", "--eps", "0.05", "--n", "512", "--out", str(first)]) == 0
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epsilon": 0.05, "n": 1024, "max_iters": 300,
                               "init": str(first / "profile.csv")}))
    out = tmp_path / "second"
    assert cli.main(["elastica", "--config", str(cfg), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["n"] == 1024 and rep["config"]["max_iters"] == 300
    assert rep["report"]["n_lift"] == 1


def test_elastica_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epsilon": 0.05, "bogus": 1}))
    assert cli.main(["elastica", "--config", str(cfg), "--out", str(tmp_path)]) == 64


def test_sweep(tmp_path, monkeypatch):
    monkeypatch.setenv("DCONE_THREADS", "1")
    code = cli.main(["sweep", "--eps-list", "0.05,0.02", "--n", "1024", "--out", str(tmp_path)])
    rec = json.loads((tmp_path / "sweep.json").read_text())
    assert code == (0 if all(rec["checks"].values()) else 1)
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("epsilon,converged,n_lift,lift_length") and len(lines) == 3


def test_gamma_equator(tmp_path):
    code = cli.main(["gamma", "--curve", "equator", "--h-list", "1e-2,1e-3,1e-4",
                     "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "recovery.csv").read_text().startswith("h,normalized_energy,bending")


def test_gamma_bad_input(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert cli.main(["gamma", "--curve", str(bad), "--out", str(tmp_path)]) == 2


def test_threads_env(monkeypatch):
    monkeypatch.setenv("DCONE_THREADS", "3")
    assert cli._threads() == 3
    monkeypatch.setenv("DCONE_THREADS", "x")
    assert cli._threads() == 1
    monkeypatch.delenv("DCONE_THREADS")
    assert cli._threads() == 1


def test_dumps_format():
    text = cli.dumps({"a": 0.1, "b": [1, 2.5], "c": math.nan, "d": True})
    assert '"a": 0.10000000000000001' in text
    assert '"c": null' in text and text.endswith("\n")
    assert json.loads(text)["b"] == [1, 2.5]
