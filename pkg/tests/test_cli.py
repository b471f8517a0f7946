import numpy as np

from cutfsi.cli import main
from cutfsi.scenarios import build_sod, save_config


def test_cli_check_passes(capsys):
    rc = main(["check", "--steps", "8"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.count("PASS") == 2


def test_cli_run_config(tmp_path, capsys):
    cfg = build_sod(64)
    cfg.max_steps = 4
    path = tmp_path / "sod.ini"
    save_config(cfg, path)
    rc = main(["run", str(path), "--out", str(tmp_path / "o"), "--quiet"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "max residuals" in out
    assert (tmp_path / "o" / "ledger.csv").exists()


def test_cli_bench(capsys):
    rc = main(["bench", "sod", "--resolution", "64", "--quiet"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "steps to t=" in out


def test_cli_converge_sod(capsys):
    rc = main(["converge", "sod", "--levels", "50,100", "--quiet"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "L1(rho) order" in out
