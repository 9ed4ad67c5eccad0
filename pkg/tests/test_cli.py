import json
import subprocess
import sys

import pytest

from ballrot import iofmt
from ballrot.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def specs(tmp_path):
    d = {
        "mode": "radius: 1\nmodes:\n  - [curl_plus, 1, 1, 0, 1.0]\n",
        "resonant": "radius: 1\nmodes:\n  - [curl_minus, 1, 1, 0, 1.0]\n",
        "graddiv": "modes:\n  - [graddiv, 1, 1, 0, 1.0]\n",
        "ez": "preset:\n  name: constant\n  direction: [0, 0, 1]\n",
        "bad": "modes:\n  - [curl_plus, 1, 1, 5, 1.0]\n",
    }
    paths = {}
    for k, v in d.items():
        p = tmp_path / f"{k}.yaml"
        p.write_text(v)
        paths[k] = str(p)
    return paths


def test_eigs_curl_rows(capsys):
    code, out, _ = run(capsys, "eigs", "--family", "curl", "--n-max", "2", "--m-max", "2",
                       "--radius", "1", "--format", "csv")
    assert code == 0
    rows = out.strip().splitlines()[1:]
    assert len(rows) == 8
    mult = [int(r.split(",")[5]) for r in rows]
    assert sorted(set(mult)) == [3, 5] and mult[:4] == [3, 3, 5, 5]


def test_eigs_graddiv_single_row(capsys):
    code, out, _ = run(capsys, "eigs", "--family", "graddiv", "--n-max", "0", "--m-max", "1",
                       "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 1
    assert doc["rows"][0][3] == pytest.approx(4.493409457909064, abs=1e-14)


def test_eigs_invalid(capsys):
    code, _, err = run(capsys, "eigs", "--family", "curl", "--n-max", "0")
    assert code == 2 and "n-max >= 1" in err
    code, _, err = run(capsys, "eigs", "--format", "vtk")
    assert code == 2


def test_eigs_cache_flag(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(iofmt.CACHE_ENV, str(tmp_path))
    _, out1, err1 = run(capsys, "eigs", "--family", "graddiv", "--n-max", "2", "--m-max", "2")
    _, out2, err2 = run(capsys, "eigs", "--family", "graddiv", "--n-max", "2", "--m-max", "2")
    assert "miss" in err1 and "hit" in err2 and out1 == out2


def test_solve1_off_spectrum(capsys, specs, tmp_path):
    code, out, _ = run(capsys, "solve1", specs["mode"], "--lam", "1", "--n-max", "2", "--m-max", "2")
    rep = json.loads(out)
    assert code == 0 and rep["solvable"]
    assert rep["diagnostics"]["fd_residual"] < 1e-6
    out_dir = tmp_path / "o"
    code, _, _ = run(capsys, "solve1", specs["mode"], "--lam", "1", "--n-max", "2", "--m-max", "2",
                     "--out", str(out_dir), "--format", "csv", "--samples", "10")
    assert code == 0
    assert {p.name for p in out_dir.iterdir()} == {"report.json", "coefficients.json", "samples.csv"}
    pts, vals = iofmt.read_csv_samples(out_dir / "samples.csv")
    assert pts.shape == (10, 3)
    R, rows, meta = iofmt.loads_coefficients((out_dir / "coefficients.json").read_text())
    assert meta["problem"] == 1 and dict(rows)[("curl_plus", 1, 1, 0)] == pytest.approx(1 / 5.493409457909064)


def test_solve1_resonant_and_zero(capsys, specs):
    code, out, err = run(capsys, "solve1", specs["resonant"], "--lam", "4.493409457909064",
                         "--n-max", "2", "--m-max", "1")
    assert code == 3
    assert json.loads(out)["diagnostics"]["fredholm"]["kernel_dimension"] == 3
    assert "kernel" in err
    code, _, err = run(capsys, "solve1", specs["mode"], "--lam", "0")
    assert code == 2 and "infinite multiplicity" in err


def test_solve2_and_vtk(capsys, specs, tmp_path):
    code, out, _ = run(capsys, "solve2", specs["graddiv"], "--nu2", "1", "--n-max", "2", "--m-max", "2")
    assert code == 0 and json.loads(out)["diagnostics"]["fd_residual"] < 1e-6
    code, _, _ = run(capsys, "solve2", specs["graddiv"], "--nu2", "1", "--n-max", "1", "--m-max", "1",
                     "--out", str(tmp_path / "v"), "--format", "vtk", "--samples", "5")
    assert code == 0 and (tmp_path / "v" / "samples.vtk").read_text().startswith("# vtk")


def test_decompose_constant(capsys, specs):
    code, out, _ = run(capsys, "decompose", specs["ez"], "--n-max", "3", "--m-max", "2")
    rep = json.loads(out)
    assert code == 0 and rep["energy_fractions"]["V"] < 1e-8


def test_bad_spec_and_config(capsys, specs, tmp_path):
    code, _, err = run(capsys, "solve1", specs["bad"], "--lam", "1")
    assert code == 2 and "modes[0][3]" in err
    cfg = tmp_path / "c.yaml"
    cfg.write_text("n_max: 1\nm_max: 1\nlam: 2.0\n")
    code, out, _ = run(capsys, "solve1", specs["mode"], "--lam", "5", "--config", str(cfg))
    rep = json.loads(out)
    assert code == 0 and rep["shift"] == 2.0 and rep["n_max"] == 1
    cfg.write_text("bogus: 1\n")
    assert run(capsys, "eigs", "--config", str(cfg))[0] == 2
    assert run(capsys, "solve1", str(tmp_path / "missing.yaml"), "--lam", "1")[0] == 2


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["eigs", "--n-max", "many"])
    assert exc.value.code == 2


def test_verify_specfun_isolated(capsys, monkeypatch):
    import ballrot.verification as v
    monkeypatch.setattr(v.Context, "grid", property(lambda self: pytest.fail("grid built")))
    code, out, _ = run(capsys, "verify", "--suite", "specfun")
    assert code == 0 and "6/6 checks passed" in out


def test_verify_failure_exit_code(capsys, monkeypatch):
    import ballrot.verification as v
    monkeypatch.setitem(v._SUITE_FUNCS, "harmonics", lambda ctx: [v._check("harmonics", "x", 1.0, 0.5)])
    code, out, _ = run(capsys, "verify", "--suite", "harmonics")
    assert code == 4 and "FAIL" in out


def test_verify_deterministic_reports(capsys, tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"r{i}.json"
        assert run(capsys, "verify", "--suite", "solver", "--format", "json", "--out", str(p))[0] == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "ballrot", "eigs", "--family", "curl_plus",
                        "--n-max", "1", "--m-max", "1"], capture_output=True, text=True)
    assert r.returncode == 0 and "4.493409457909064" in r.stdout
