import json
import math
import subprocess
import sys

import pytest

from lzbec import cli


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_sim_meanfield_no_coupling(capsys, tmp_path):
    out_csv = tmp_path / "mf.csv"
    code, out, _ = run(["sim", "meanfield", "--v", "0", "--g", "-1", "--alpha", "0.1",
                        "--out", str(out_csv)], capsys)
    assert code == 0
    line = out.strip().splitlines()[-1]
    assert line.startswith("p_lz=")
    assert len(line.split("=")[1].replace(".", "").lstrip("0")) == 12
    assert float(line.split("=")[1]) == pytest.approx(1.0, abs=1e-9)
    rows = out_csv.read_text().splitlines()
    assert rows[0] == "t,epsilon,n1_fraction,norm"
    assert len(rows) == 402


def test_sim_manybody_to_stdout(capsys):
    code, out, _ = run(["sim", "manybody", "--v", "0.2", "--gbar", "-0.25", "--n", "4",
                        "--alpha", "0.2", "--samples", "5"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,epsilon,n1_fraction,norm"
    assert len(lines) == 7
    assert 0 < float(lines[-1].split("=")[1]) < 1


def test_missing_alpha_is_usage_error(capsys):
    code, _, err = run(["sim", "meanfield", "--v", "0.2"], capsys)
    assert code == 2
    assert "usage" in err and "--alpha" in err


def test_argparse_usage_exit_code():
    with pytest.raises(SystemExit) as exc:
        cli.main(["sim", "meanfield", "--v", "0.2", "--g", "-1", "--gbar", "-1"])
    assert exc.value.code == 2


def test_numeric_failure_exit_code(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("rel_tol = 1e-30\nabs_tol = 1e-30\n")
    code, _, err = run(["sim", "manybody", "--v", "0.2", "--g", "-1", "--n", "4", "--alpha", "0.1",
                        "--config", str(cfg)], capsys)
    assert code == 3
    assert "t=" in err


def test_spectrum(capsys):
    code, out, _ = run(["spectrum", "--v", "0.2", "--g", "-1", "--n", "3", "--eps-min", "-1",
                        "--eps-max", "1", "--steps", "5"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "epsilon,E0,E1,E2,E3" and len(lines) == 6
    vals = [float(x) for x in lines[3].split(",")[1:]]
    assert vals == sorted(vals)
    code, out, _ = run(["spectrum", "--v", "0.2", "--g", "-1", "--n", "3", "--eps-min", "-1",
                        "--eps-max", "1", "--steps", "1"], capsys)
    assert len(out.strip().splitlines()) == 2
    code, _, _ = run(["spectrum", "--v", "0.2", "--n", "3"], capsys)
    assert code == 2


def test_splittings(capsys):
    code, out, _ = run(["splittings", "--v", "0.2", "--g", "-1", "--n", "1", "--alpha", "0.1"], capsys)
    lines = out.strip().splitlines()
    assert lines[0] == "ell,x,t_cross,b,w,w2,p,w2_approx"
    assert len(lines) == 2
    assert float(lines[1].split(",")[4]) == pytest.approx(0.4)


def test_ica_and_kappa(capsys, tmp_path):
    base = ["ica", "--v", "0.2", "--g", "-1", "--n", "30", "--alpha", "0.05"]
    code, out, _ = run(base + ["--out", str(tmp_path / "x.csv")], capsys)
    assert code == 0
    p1 = float(out.strip().splitlines()[-1].split("=")[1])
    code, out, _ = run(base + ["--kappa", "0.5"], capsys)
    p2 = float(out.strip().splitlines()[-1].split("=")[1])
    assert p2 > p1
    assert (tmp_path / "x.csv").read_text().startswith("ell,x,t_cross,b,w,p,s\n")


def test_formula(capsys):
    code, out, _ = run(["formula", "--v", "0.2", "--g", "-1", "--alpha", "0.01"], capsys)
    assert code == 0
    assert "p_lz_formula=0.369978" in out
    code, _, _ = run(["formula", "--v", "0.2", "--g", "0.1", "--alpha", "0.01"], capsys)
    assert code == 2
    code, out, _ = run(["formula", "--v", "0.2", "--g", "-0.4", "--alpha", "0.01"], capsys)
    assert "p_lz_supercritical=" in out and "p_lz_formula=" in out


def test_config_precedence_and_unknown_keys(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nv = 0.2\ng = -1   # attractive\nalpha = 0.5\n")
    _, out_cfg, _ = run(["formula", "--config", str(cfg)], capsys)
    _, out_flag, _ = run(["formula", "--config", str(cfg), "--alpha", "0.01"], capsys)
    assert "0.369978" not in out_cfg and "0.369978" in out_flag
    bad = tmp_path / "bad.cfg"
    bad.write_text("v = 0.2\nspeed = 3\n")
    code, _, err = run(["formula", "--config", str(bad)], capsys)
    assert code == 2 and "speed" in err


def test_csv_deterministic(capsys, tmp_path):
    argv = ["spectrum", "--v", "0.2", "--g", "-1", "--n", "6", "--eps-min", "-1", "--eps-max", "1",
            "--steps", "7"]
    a = run(argv, capsys)[1]
    b = run(argv, capsys)[1]
    assert a == b
    for tok in a.splitlines()[1].split(","):
        assert float(repr(float(tok))) == float(tok) and tok == repr(float(tok))


def test_fmt():
    assert cli.fmt(3) == "3"
    assert cli.fmt(0.1) == "0.1"
    assert cli.fmt(float("nan")) == "nan"
    assert cli.fmt(1 / 3) == repr(1 / 3)


@pytest.mark.parametrize("fig,count", [(1, 2), (2, 2), (4, 2), (5, 2), (6, 3)])
def test_figures(capsys, tmp_path, fig, count):
    out = tmp_path / f"f{fig}"
    code, _, _ = run(["figure", str(fig), "--out", str(out), "--points", "21"], capsys)
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["figure"] == fig
    assert len(manifest["series"]) == count
    assert "effective_config" in manifest
    for s in manifest["series"]:
        assert (out / s["file"]).exists()


def test_sweep_figure_small(capsys, tmp_path):
    out = tmp_path / "f3"
    code, _, _ = run(["figure", "3", "--out", str(out), "--n", "6", "--points", "2",
                      "--alpha-min", "0.3", "--jobs", "1"], capsys)
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["series"]) == 9
    rows = (out / "fig3_numeric_g-1.csv").read_text().splitlines()
    assert rows[0] == "alpha,p_lz_mf,p_lz_mp" and len(rows) == 3


def test_bad_figure(capsys):
    code, _, _ = run(["figure", "99"], capsys)
    assert code == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "lzbec.cli", "formula", "--v", "0.2", "--g", "-1",
                          "--alpha", "0.01"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip().splitlines()[-1].startswith("p_lz_formula=")
