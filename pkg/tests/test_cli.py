import json
from pathlib import Path

import pytest

from e1lab import io
from e1lab.cli import main


def run(tmp_path, *argv):
    return main(["--out", str(tmp_path), *argv])


def manifest(tmp_path, name):
    return json.loads((tmp_path / f"{name}.manifest.json").read_text())


def test_invariants_parabola(tmp_path, capsys):
    assert run(tmp_path, "invariants", "--surface", "parabola+", "--x", "2", "--y", "0") == 0
    row = io.read_csv(tmp_path / "invariants.csv")[0]
    assert float(row["alpha"]) == pytest.approx(-0.25)
    assert float(row["H"]) == pytest.approx(0.433013, abs=1e-6)
    assert abs(float(row["E1_residual"])) < 1e-14
    assert manifest(tmp_path, "invariants")["status"] == "ok"


def test_invariants_custom(tmp_path):
    assert run(tmp_path, "invariants", "--surface", "custom:u=0", "--x", "1", "--y", "0") == 0


def test_invariants_domain_error(tmp_path, capsys):
    assert run(tmp_path, "invariants", "--surface", "type1", "--rho0", "1", "--r", "0.36603") == 2
    assert "DomainExceeded" in capsys.readouterr().err


def test_invariants_singular(tmp_path, capsys):
    assert run(tmp_path, "invariants", "--surface", "custom:u=0", "--x", "0", "--y", "0") == 2
    assert "SingularPoint" in capsys.readouterr().err


def test_rotsym_integrate_round_trip(tmp_path, capsys):
    assert run(tmp_path, "rotsym", "integrate", "--family", "type2", "--rho0", "1", "--h", "1e-3") == 0
    assert "TypeII(1" in capsys.readouterr().out
    m = manifest(tmp_path, "rotsym-integrate")
    assert m["results"]["classified"].startswith("TypeII")
    rows = io.read_csv(tmp_path / "rotsym_profile.csv")
    assert list(rows[0]) == ["r", "w", "u", "family", "rho0"]
    assert run(tmp_path, "rotsym", "classify", "--input", str(tmp_path / "rotsym_profile.csv")) == 0
    assert "TypeII(1.00000000" in capsys.readouterr().out


def test_rotsym_integrate_blowup(tmp_path):
    assert run(tmp_path, "rotsym", "integrate", "--family", "type1", "--r-end", "0.5") == 3
    m = manifest(tmp_path, "rotsym-integrate")
    assert m["status"].startswith("halted(")
    assert (tmp_path / "rotsym_profile.csv").stat().st_size > 0


def test_rotsym_classify_ambiguous(tmp_path):
    io.write_csv(tmp_path / "flat.csv", ("r", "w"), [(0.1 * k, 0.0) for k in range(1, 20)])
    assert run(tmp_path, "rotsym", "classify", "--input", str(tmp_path / "flat.csv"), "--tol", "10") == 1


def test_rotsym_glue(tmp_path, capsys):
    assert run(tmp_path, "rotsym", "glue", "--rho0", "1") == 0
    assert "13.9282" in capsys.readouterr().out


def test_rotsym_figures(tmp_path):
    out = tmp_path / "figs"
    assert main(["rotsym", "figures", "--out", str(out), "--n", "20"]) == 0
    for name in ("fig1_w", "fig2_graphs", "fig3_closed"):
        assert (out / f"{name}.csv").stat().st_size > 0
    assert len(manifest(out, "rotsym-figures")["outputs"]) == 3


def test_cauchy_march(tmp_path, capsys):
    assert run(tmp_path, "cauchy", "march", "--init", "parabola+", "--c", "1", "--to", "1.5", "--nphi", "64") == 0
    assert "max error" in capsys.readouterr().out
    rows = io.read_csv(tmp_path / "cauchy_grid.csv")
    assert list(rows[0]) == ["r", "phi", "theta", "alpha", "H", "m"]
    assert manifest(tmp_path, "cauchy-march")["results"]["max_error"] < 1e-3


def test_cauchy_march_halt(tmp_path):
    assert run(tmp_path, "cauchy", "march", "--init", "type1", "--c", "0.3", "--to", "0.5", "--nphi", "64") == 3
    assert manifest(tmp_path, "cauchy-march")["status"].startswith("halted(")


def test_cauchy_bad_cfl(tmp_path):
    assert run(tmp_path, "cauchy", "march", "--cfl", "1.5", "--nphi", "64") == 2


def test_cauchy_unique(tmp_path, capsys):
    assert run(tmp_path, "cauchy", "unique", "--init", "parabola+", "--eps", "1e-4") == 0
    assert "K spread" in capsys.readouterr().out


def test_cauchy_eigen(tmp_path):
    argv = ["cauchy", "eigen", "--alpha", "-0.25", "--H", "0.4330", "--s", "0.5", "--c", "0.8660", "--r", "2"]
    assert run(tmp_path, *argv) == 0
    assert manifest(tmp_path, "cauchy-eigen")["results"]["max_residual"] < 1e-12


def test_secondvar(tmp_path):
    assert run(tmp_path, "secondvar", "--lmax", "8") == 0
    rows = io.read_csv(tmp_path / "secondvar.csv")
    assert len(rows) == 8
    assert all(float(r["Q"]) < 0 for r in rows)
    assert float(rows[0]["Q"]) == pytest.approx(-83.7464, abs=1e-4)


def test_secondvar_ibp_and_criticality(tmp_path):
    assert run(tmp_path, "secondvar", "--check-ibp", "--seed", "7", "--criticality", "--rho1", "0.707107") == 0
    res = manifest(tmp_path, "secondvar")["results"]
    assert res["svf_max_rel"] < 1e-10
    assert res["ibp_max_rel"] < 1e-10
    assert abs(res["E1"]) < 1e-5


def test_check_single_suite(tmp_path):
    assert run(tmp_path, "check", "secondvar") == 0
    rows = io.read_csv(tmp_path / "check.csv")
    assert {r["suite"] for r in rows} == {"secondvar"}
    assert all(r["result"] == "pass" for r in rows)


def test_check_tolerance_scale_can_fail(tmp_path):
    assert run(tmp_path, "check", "jets", "--tol", "1e-30") == 1


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    argv = ["cauchy", "march", "--init", "type1", "--c", "0.1", "--to", "0.05", "--nphi", "64"]
    assert main(["--out", str(a), *argv]) == 0
    assert main(["--out", str(b), *argv]) == 0
    assert (a / "cauchy_grid.csv").read_bytes() == (b / "cauchy_grid.csv").read_bytes()


def test_config_and_env(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("nphi = 32\nscheme = upwind\n")
    monkeypatch.setenv("E1LAB_NPHI", "48")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "cauchy", "march", "--to", "1.2"]) == 0
    p = manifest(tmp_path, "cauchy-march")["parameters"]
    assert p["nphi"] == 48
    assert p["scheme"] == "upwind"
    assert main(["--config", str(cfg), "--out", str(tmp_path), "cauchy", "march", "--to", "1.2", "--nphi", "40"]) == 0
    assert manifest(tmp_path, "cauchy-march")["parameters"]["nphi"] == 40


def test_outputs_exist_and_nonempty(tmp_path):
    assert run(tmp_path, "secondvar", "--criticality") == 0
    outputs = manifest(tmp_path, "secondvar")["outputs"]
    assert len(outputs) == 2
    for p in outputs:
        assert Path(p).stat().st_size > 0
