import json

import pytest

from conftest import kite_mesh, tetrahedron_mesh
from flipmesh.cli import main
from flipmesh.mesh import load_off, save_off


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv("FLIPMESH_SEED", raising=False)


@pytest.fixture
def kite_off(tmp_path):
    path = tmp_path / "kite.off"
    save_off(kite_mesh(), path)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_delaunayify_kite(tmp_path, kite_off, capsys):
    out_path = tmp_path / "out.off"
    code, out, _ = run(capsys, "delaunayify", kite_off, out_path)
    assert code == 0
    report = json.loads(out)
    assert len(report["flips"]) == 1 and report["verification"]["delaunay"]
    assert load_off(out_path).has_edge(1, 3)


def test_delaunayify_tetrahedron_no_flips(tmp_path, capsys):
    src = tmp_path / "tet.off"
    save_off(tetrahedron_mesh(), src)
    report_path = tmp_path / "r.json"
    code, _, _ = run(capsys, "delaunayify", src, tmp_path / "o.off", "--report", report_path)
    assert code == 0 and json.loads(report_path.read_text())["flips"] == []


def test_step_limit_exit_code(tmp_path, capsys):
    from conftest import random_planar_mesh

    src = tmp_path / "g.off"
    save_off(random_planar_mesh(3, 40), src)
    out_path = tmp_path / "o.off"
    code, out, _ = run(capsys, "delaunayify", src, out_path, "--max-steps", 1)
    assert code == 2 and json.loads(out)["status"] == "StepLimit"
    assert not out_path.exists()


def test_corrupt_off_reports_line(tmp_path, capsys):
    src = tmp_path / "bad.off"
    src.write_text("OFF\n3 1 0\n0 0 0\n1 0\n0 1 0\n3 0 1 2\n")
    code, _, err = run(capsys, "delaunayify", src, tmp_path / "o.off")
    assert code == 1 and "line 4" in err


@pytest.mark.parametrize("extra", [["--max-steps", "0"], ["--strategy", "random"]])
def test_usage_errors(tmp_path, kite_off, capsys, extra):
    code, _, _ = run(capsys, "delaunayify", kite_off, tmp_path / "o.off", *extra)
    assert code == 64


def test_same_input_output_is_usage_error(kite_off, capsys):
    assert run(capsys, "delaunayify", kite_off, kite_off)[0] == 64


def test_check_defaults(kite_off, capsys):
    code, out, _ = run(capsys, "check", kite_off)
    report = json.loads(out)
    assert code == 1 and not report["delaunay"]["ok"] and report["embedded"]["ok"]


def test_check_theta_needs_r(kite_off, capsys):
    assert run(capsys, "check", kite_off, "--theta", "0.1")[0] == 64


def test_check_conditions(tmp_path, capsys):
    src = tmp_path / "tet.off"
    save_off(tetrahedron_mesh(), src)
    code, out, _ = run(capsys, "check", src, "--delta", "2.0", "--theta", "3.0", "--r", "0.5")
    report = json.loads(out)
    assert code == 0 and report["conditions"]["dense"] and report["conditions"]["flat"]


def _spec(tmp_path, **kw):
    spec = {"kind": "sphere", "level": 1, "jitter": 0.02, "seed": 2, **kw}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    return path


def test_gen_is_byte_identical(tmp_path, capsys):
    spec = _spec(tmp_path)
    a, b = tmp_path / "a.off", tmp_path / "b.off"
    assert run(capsys, "gen", spec, a, "--measure")[0] == 0
    assert run(capsys, "gen", spec, b, "--measure")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.with_suffix(".json").read_text() == b.with_suffix(".json").read_text()
    side = json.loads(a.with_suffix(".json").read_text())
    assert side["n_vertices"] == 42 and side["measurements"]["delta"] > 0


def test_gen_env_seed_overrides(tmp_path, capsys, monkeypatch):
    spec = _spec(tmp_path)
    monkeypatch.setenv("FLIPMESH_SEED", "3")
    out = tmp_path / "s.off"
    assert run(capsys, "gen", spec, out, "--seed", "9")[0] == 0
    assert json.loads(out.with_suffix(".json").read_text())["spec"]["seed"] == 3


def test_gen_bad_spec(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "sphere",\n "level": }')
    code, _, err = run(capsys, "gen", bad, tmp_path / "o.off")
    assert code == 1 and "line 2" in err
    assert run(capsys, "gen", _spec(tmp_path, colour="red"), tmp_path / "o.off")[0] == 1


def test_thin_writes_sidecar(tmp_path, capsys):
    out = tmp_path / "thin.off"
    assert run(capsys, "thin", out, "--n", "6")[0] == 0
    side = json.loads(out.with_suffix(".json").read_text())
    assert side["n"] == 6 and side["delaunay"] and 0 <= side["thin_fraction"] <= 1


def test_thin_bad_epsilon(tmp_path, capsys):
    code, _, err = run(capsys, "thin", tmp_path / "t.off", "--eps", "0.2")
    assert code == 1 and "SpecInvariantViolated" in err


def test_planar(tmp_path, capsys):
    pts = tmp_path / "p.txt"
    pts.write_text("0 0\n1 0\n1 1\n0 1\n0.5 0.5  # centre\n")
    out = tmp_path / "p.off"
    code, stdout, _ = run(capsys, "planar", pts, "--output", out)
    report = json.loads(stdout)
    assert code == 0 and report["passed"] and report["oracle"]["hard_mismatches"] == 0
    assert load_off(out).n_faces == 4


def test_planar_parse_error(tmp_path, capsys):
    pts = tmp_path / "p.txt"
    pts.write_text("0 0\n1 0\n1 x\n")
    code, _, err = run(capsys, "planar", pts)
    assert code == 1 and "line 3" in err


def test_module_entry_point(tmp_path, kite_off):
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "flipmesh", "check", str(kite_off)],
                         capture_output=True, text=True)
    assert res.returncode == 1 and json.loads(res.stdout)["delaunay"]["violations"] == [[0, 2]]
