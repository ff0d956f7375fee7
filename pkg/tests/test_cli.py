import argparse
import subprocess
import sys

import numpy as np
import pytest

from eringen_lab import cli


def _run(tmp_path, *argv):
    return cli.run([*argv, "--out-dir", str(tmp_path)])


def _data(path):
    lines = path.read_text().splitlines()
    rows = [l.split(",") for l in lines[1:] if not l.startswith("#")]
    comments = [l[2:] for l in lines if l.startswith("# ")]
    return lines[0].split(","), rows, comments


def test_format_float():
    assert cli.format_float(0.0625) == "6.2500000000000000e-2"
    assert cli.format_float(1.0) == "1.0000000000000000e0"
    assert cli.format_float(-0.375 * 2.0**-20) == "-3.5762786865234375e-7"
    x = 0.1 + 0.2
    assert float(cli.format_float(x)) == x


def test_emit_csv_header_only_and_lf(tmp_path):
    p = tmp_path / "sub" / "a.csv"
    cli.emit_csv(["N", "h"], [], p, ["note=1"])
    assert p.read_bytes() == b"N,h\n# note=1\n"
    cli.emit_csv(["k", "ok", "v"], [(3, True, 0.5)], p)
    assert p.read_bytes() == b"k,ok,v\n3,true,5.0000000000000000e-1\n"


@pytest.mark.parametrize(
    "text,expected",
    [("16,32,64", [16, 32, 64]), ("16,...,128", [16, 32, 64, 128]), ("3,9,...,81", [3, 9, 27, 81]), ("64", [64])],
)
def test_parse_N_list(text, expected):
    assert cli.parse_N_list(text) == expected


@pytest.mark.parametrize("text", ["", "16,...,100", "...,64", "0,4", "a,b", "16,...,64,128", "16,24,...,96"])
def test_parse_N_list_rejects(text):
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_N_list(text)


def test_eig_scan_output(tmp_path):
    assert _run(tmp_path, "eig-scan", "--kernel", "cubic", "--N", "16,...,128") == 0
    header, rows, comments = _data(tmp_path / "eig-scan.csv")
    assert header == ["N", "h", "lambda_min"]
    assert [int(r[0]) for r in rows] == [16, 32, 64, 128]
    assert float(rows[0][1]) == 1 / 16
    assert comments[0].startswith("slope=") and "r_squared=" in comments[0]
    assert (tmp_path / "eig-scan.gp").exists()


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert _run(d, "converge", "--N", "16,32,64") == 0
        assert _run(d, "solve", "--kernel", "riesz:0.5", "--N", "16,32", "--f", "sin-pi-x") == 0
    for name in ("converge.csv", "converge-solution.csv", "solve-N16.csv", "solve-N32.csv", "solve-norms.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    _, _, comments = _data(a / "converge.csv")
    assert comments[0].startswith("rate=")


def test_solve_includes_boundary_nodes(tmp_path):
    assert _run(tmp_path, "solve", "--kernel", "linear", "--N", "8", "--p", "2") == 0
    header, rows, _ = _data(tmp_path / "solve-N8.csv")
    vals = np.array(rows, dtype=float)
    assert header == ["x", "u"] and len(rows) == 17
    assert vals[0, 1] == 0.0 and vals[-1, 1] == 0.0
    np.testing.assert_allclose(vals[:, 0], np.linspace(0, 1, 17), atol=1e-15)


def test_coercivity_and_hetero_outputs(tmp_path):
    assert _run(tmp_path, "coercivity", "--N", "16,32") == 0
    assert _run(tmp_path, "hetero", "--N", "16", "--mode", "domain") == 0
    for stem in ("coercivity", "hetero"):
        header, rows, comments = _data(tmp_path / f"{stem}.csv")
        assert header == ["N", "h", "lambda_min", "lambda_max"]
        assert comments == ["lambda_min_positive=true"]


def test_mixture_and_kernels_plot(tmp_path):
    assert _run(tmp_path, "mixture", "--m", "1", "--N", "8") == 0
    _, rows, _ = _data(tmp_path / "mixture-N8.csv")
    x, u = np.array(rows, dtype=float).T
    np.testing.assert_allclose(u, x * (1 - x) / 2, atol=1e-12)
    assert _run(tmp_path, "kernels-plot", "--samples", "4") == 0
    header, rows, _ = _data(tmp_path / "kernels.csv")
    assert header == ["d", "cubic", "linear", "riesz", "riesz_half"] and len(rows) == 4


def test_korn_check_output(tmp_path):
    assert _run(tmp_path, "korn-check", "--grid", "2", "--fields", "random", "--count", "2", "--seed", "3") == 0
    header, rows, comments = _data(tmp_path / "korn-check.csv")
    assert header == ["field", "lhs", "rhs", "ratio"] and len(rows) == 2
    assert comments == ["inequality_holds=true"]


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--kernel", "quartic"],
        ["solve", "--p", "3"],
        ["eig-scan", "--N", "16,...,100"],
        ["converge", "--alpha", "2.5", "--N", "16,32,64"],
        ["mixture", "--m", "0"],
        ["eig-scan", "--N", "2,4,8"],
        ["hetero", "--N", "16", "--mode", "full:L=1.5"],
        ["nonsense"],
        [],
    ],
)
def test_usage_errors_exit_2(tmp_path, argv, capsys):
    assert _run(tmp_path, *argv) == 2 if argv else cli.run([]) == 2


def test_numeric_failure_exit_1(tmp_path, monkeypatch):
    from eringen_lab.errors import NotPositiveDefinite

    def boom(*a, **k):
        raise NotPositiveDefinite("pivot")

    monkeypatch.setattr(cli.ex, "solve_eringen", boom)
    assert _run(tmp_path, "solve", "--N", "8") == 1


def test_unwritable_output_exit_1(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.run(["kernels-plot", "--samples", "2", "--out-dir", str(blocker / "x")]) == 1


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nkernel = linear\nN = 8,16\n")
    assert cli.run(["eig-scan", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
    _, rows, _ = _data(tmp_path / "eig-scan.csv")
    assert [int(r[0]) for r in rows] == [8, 16]
    np.testing.assert_allclose([float(r[2]) for r in rows], 2.0, atol=1e-9)
    # explicit flags win over the file
    assert cli.run(["eig-scan", "--config", str(cfg), "--N", "4", "--out-dir", str(tmp_path)]) == 0
    _, rows, _ = _data(tmp_path / "eig-scan.csv")
    assert [int(r[0]) for r in rows] == [4]
    cfg.write_text("colour = red\n")
    assert cli.run(["eig-scan", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 2
    assert cli.run(["eig-scan", "--config", str(tmp_path / "missing.cfg"), "--out-dir", str(tmp_path)]) == 2


def test_help_lists_defaults(capsys):
    assert cli.run(["converge", "--help"]) == 0
    text = capsys.readouterr().out
    assert "16,...,1024" in text and "--alpha" in text and "default" in text
    assert cli.run(["--help"]) == 0
    assert "korn-check" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "eringen_lab", "kernels-plot", "--samples", "3", "--out-dir", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "kernels.csv").exists()
