import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from boxlab.boxes import load_box
from boxlab.cli import grid, main, run_scan, write_scan_csv
from boxlab.constructors import ghz_box, noise_box, p_eps_alpha


@pytest.fixture
def run(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("BOXLAB_TOL", raising=False)

    def _run(*argv):
        code = main([str(a) for a in argv])
        out = capsys.readouterr()
        return code, out.out, out.err
    return _run


def _chsh_lines(out):
    canonical, maximum = out.strip().splitlines()
    return float(canonical.split("=")[1]), float(maximum.split("=")[1])


def test_make_ghz(run):
    assert run("make", "ghz", "-o", "g.box")[0] == 0
    assert np.array_equal(load_box("g.box").probs, ghz_box().probs)


def test_make_peps_alpha_and_noise(run):
    assert run("make", "peps-alpha", "--eps", 0.9, "--alpha", 0.5, "-o", "p.box")[0] == 0
    assert load_box("p.box").allclose(p_eps_alpha(0.9, 0.5), 0)
    assert run("make", "noise", "-o", "n.box")[0] == 0
    assert load_box("n.box").allclose(noise_box(), 0)


def test_make_other_kinds(run):
    assert run("make", "pr", "--variant", "101", "-o", "pr.box")[0] == 0
    assert load_box("pr.box").probs.shape == (4, 4)
    assert run("make", "pr", "--party1", "01", "-o", "prp.box")[0] == 0
    assert run("make", "det", "--party1", "10", "--o2", "0101", "--o3", "0011", "-o", "d.box")[0] == 0
    assert run("make", "ghz", "--swapped", "-o", "gs.box")[0] == 0
    assert run("make", "peps-left", "--eps", 0.3, "-o", "l.box")[0] == 0


@pytest.mark.parametrize("argv", [
    ("make", "peps-alpha", "--eps", 0.5, "-o", "x.box"),
    ("make", "peps-left", "-o", "x.box"),
    ("make", "peps-alpha", "--eps", 1.5, "--alpha", 0.5, "-o", "x.box"),
    ("make", "pr", "--variant", "12", "-o", "x.box"),
])
def test_make_bad_flags_exit_2(run, argv):
    assert run(*argv)[0] == 2


def test_classify_ghz_report(run):
    run("make", "ghz", "-o", "g.box")
    code, out, _ = run("classify", "g.box")
    assert code == 0
    assert out.splitlines()[0] == "finest class: ATOBL_LEFT"
    code, out, _ = run("classify", "g.box", "--json")
    doc = json.loads(out)
    assert doc["finest_class"] == "ATOBL_LEFT" and doc["verdicts"]["TOBL"] == "Out"


def test_classify_single_class_exit_codes(run):
    run("make", "noise", "-o", "n.box")
    code, out, _ = run("classify", "n.box", "--class", "FL")
    assert code == 0 and out.startswith("FL: In")
    run("make", "peps-alpha", "--eps", 0.9, "--alpha", 0.5, "-o", "p.box")
    code, out, _ = run("classify", "p.box", "--class", "ATOBL_UNION")
    assert code == 3 and out.startswith("ATOBL_UNION: Out")
    code, out, _ = run("classify", "p.box", "--class", "ATOBL_HULL", "--json")
    assert code == 0 and json.loads(out)["verdict"] == "In"


def test_classify_rejects_bad_files(run, tmp_path):
    (tmp_path / "bad.box").write_text("{ nope")
    assert run("classify", "bad.box")[0] == 2
    run("make", "pr", "-o", "pr.box")
    assert run("classify", "pr.box")[0] == 2
    assert run("classify", "missing.box")[0] == 2


def test_wire_then_chsh(run):
    run("make", "ghz", "-o", "g.box")
    assert run("wire", "g.box", "--protocol", "2to3", "-o", "q.box")[0] == 0
    code, out, _ = run("chsh", "q.box")
    assert code == 0
    canonical, _ = _chsh_lines(out)
    assert canonical == pytest.approx(3 / math.sqrt(2), abs=1e-9)


def test_chsh_pr_and_uniform(run):
    run("make", "pr", "-o", "pr.box")
    _, out, _ = run("chsh", "pr.box")
    assert _chsh_lines(out)[1] == pytest.approx(4.0)
    run("make", "noise", "-o", "n.box")
    run("wire", "n.box", "--protocol", "3to2", "-o", "q.box")
    _, out, _ = run("chsh", "q.box")
    assert _chsh_lines(out)[0] == 0.0
    _, out, _ = run("chsh", "pr.box", "--variant", "+++-")
    assert out.startswith("chsh[+++-] = 4.0")


def test_arity_errors(run):
    run("make", "ghz", "-o", "g.box")
    assert run("chsh", "g.box")[0] == 2
    run("make", "pr", "-o", "pr.box")
    assert run("wire", "pr.box", "--protocol", "2to3", "-o", "x.box")[0] == 2


def test_witness(run):
    run("make", "ghz", "-o", "g.box")
    code, out, _ = run("witness", "g.box", "--class", "ATOBL_RIGHT")
    assert code == 3 and "members satisfy" in out
    code, out, _ = run("witness", "g.box", "--class", "TOBL")
    assert code == 3 and "3->2 system" in out
    code, out, _ = run("witness", "g.box", "--class", "ATOBL_LEFT")
    assert code == 0


def test_tolerance_environment_variable(run, monkeypatch):
    run("make", "noise", "-o", "n.box")
    monkeypatch.setenv("BOXLAB_TOL", "1e-7")
    assert run("classify", "n.box", "--class", "FL")[0] == 0
    monkeypatch.setenv("BOXLAB_TOL", "abc")
    assert run("classify", "n.box", "--class", "FL")[0] == 2


def _scan_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_scan_header_and_chsh_rows(run):
    code, out, _ = run("scan", "--eps", 0, 1, 0.1, "--alpha", 0, 1, 0.25)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "eps,alpha,chsh_2to3,chsh_3to2,in_fl,in_nsbl,in_tobl,in_atobl_left,in_atobl_right,in_hull,in_bl"
    rows = _scan_rows(out)
    assert len(rows) == 11 * 5
    row = next(r for r in rows if r["eps"] == "0.8" and r["alpha"] == "0.5")
    assert float(row["chsh_2to3"]) == pytest.approx(2.1, abs=1e-12)
    assert float(row["chsh_3to2"]) == pytest.approx(2.1, abs=1e-12)
    assert row["in_fl"] == ""
    row = next(r for r in rows if r["eps"] == "0" and r["alpha"] == "0")
    assert float(row["chsh_3to2"]) == 0.0


def test_scan_threshold_rows(run):
    code, out, _ = run("scan", "--eps", 0.76, 1.0, 0.06, "--alpha", 0.5, 0.5, 0,
                       "--classes", "in_atobl_left,in_atobl_right,in_hull")
    assert code == 0
    rows = _scan_rows(out)
    assert [r["eps"] for r in rows] == ["0.76", "0.82", "0.88", "0.94", "1"]
    for r in rows:
        assert (r["in_atobl_left"], r["in_atobl_right"], r["in_hull"]) == ("false", "false", "true")


def test_scan_is_byte_identical_and_job_independent(run, tmp_path):
    args = ("scan", "--eps", 0.7, 0.9, 0.1, "--alpha", 0.4, 0.6, 0.1, "--lp")
    run(*args, "-o", "a.csv")
    run(*args, "-o", "b.csv", "--jobs", 2)
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    assert a == b
    order = ["in_fl", "in_nsbl", "in_tobl", "in_atobl_left", "in_hull", "in_bl"]
    for r in _scan_rows(a.decode()):
        flags = [r[c] == "true" for c in order]
        # monotone along the chain; right sits beside left
        assert all(not x or y for x, y in zip(flags, flags[1:]))
        if r["in_atobl_right"] == "true":
            assert r["in_hull"] == "true"


@pytest.mark.parametrize("argv", [
    ("scan", "--eps", 0.5, 0.2, 0.1),
    ("scan", "--eps", 0, 1.5, 0.1),
    ("scan", "--eps", 0, 1, -0.1),
    ("scan", "--classes", "in_everything"),
])
def test_scan_bad_ranges(run, argv):
    assert run(*argv)[0] == 2


def test_grid_clamps_last_point():
    assert grid(0, 1, 0.3) == [0, 0.3, 0.6, 0.9, 1]
    assert grid(0, 1, 0.25) == [0, 0.25, 0.5, 0.75, 1.0]
    assert grid(0.5, 0.5, 0) == [0.5]


def test_scan_api_matches_closed_forms():
    buf = io.StringIO()
    records = run_scan((0, 1, 0.5), (0, 1, 0.5))
    write_scan_csv(records, buf)
    for r in records:
        assert r.chsh_3to2 == pytest.approx(r.alpha + r.eps * (3 - 2 * r.alpha), abs=1e-12)
        assert r.chsh_2to3 == pytest.approx((1 - r.alpha) + r.eps * (1 + 2 * r.alpha), abs=1e-12)


def test_module_entry_point(tmp_path):
    out = tmp_path / "g.box"
    subprocess.run([sys.executable, "-m", "boxlab", "make", "ghz", "-o", str(out)], check=True)
    res = subprocess.run([sys.executable, "-m", "boxlab", "classify", str(out), "--class", "ATOBL_RIGHT"],
                         capture_output=True, text=True)
    assert res.returncode == 3 and res.stdout.startswith("ATOBL_RIGHT: Out")
    res = subprocess.run([sys.executable, "-m", "boxlab", "bogus"], capture_output=True, text=True)
    assert res.returncode == 2
