"""Acceptance: render both figure kinds from CSVs produced by the
stringstab CLI, and reject header-contract violations with exit 2.
"""

import json
import subprocess
import sys

from plotkit.cli import main as plotkit_main


def run_stringstab(args, cwd):
    proc = subprocess.run(
        [sys.executable, "-m", "stringstab", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


def test_renders_cli_outputs(tmp_path):
    out = tmp_path / "run"
    run_stringstab(
        ["simulate", "--n", "12", "--t-end", "60", "--out", str(out)], tmp_path
    )
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"chain": {"n_list": list(range(1, 9))}}), encoding="utf-8")
    run_stringstab(
        ["sweep-n", "--config", str(cfg), "--t-end", "60", "--out", str(out)], tmp_path
    )

    fig1 = tmp_path / "traces.png"
    fig2 = tmp_path / "norms.png"
    assert plotkit_main([str(out / "errors.csv"), "--kind", "error-traces",
                         "--out", str(fig1)]) == 0
    assert plotkit_main([str(out / "sweep.csv"), "--kind", "norm-vs-n",
                         "--out", str(fig2)]) == 0
    assert fig1.stat().st_size > 1000
    assert fig2.stat().st_size > 1000
    print("PASS plotkit renders both figure kinds from CLI-produced CSVs")


def test_header_violation_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,e_1,spacing\n0,0,0\n1,0.1,0.2\n", encoding="utf-8")
    code = plotkit_main([str(bad), "--kind", "error-traces", "--out", str(tmp_path / "x.png")])
    assert code == 2
    assert "spacing" in capsys.readouterr().err
    empty = tmp_path / "empty.csv"
    empty.write_text("N,l2l2_norm\n", encoding="utf-8")
    assert plotkit_main([str(empty), "--kind", "norm-vs-n",
                         "--out", str(tmp_path / "y.png")]) == 2
    print("PASS plotkit header-contract violations exit 2")
