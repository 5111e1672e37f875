import os
import subprocess
from pathlib import Path

import pytest

import ncbal

LAKE = """
[model]
gravity = 1
[mesh]
cells = 16
[initial]
preset = perturbed_lake
amplitude = 0.1
alpha = step
alpha_right = 0.2
[solver]
max_steps = 200
box = h=0.6:1.3,U=-0.2:0.2,alpha=0:0.2
[stationary]
family = lake
"""

STILL = """
[mesh]
cells = 10
[initial]
preset = lake_at_rest
alpha = step
alpha_right = 0.5
[solver]
max_steps = 20
box = h=0.4:1.1,U=-1:1,alpha=0:0.5
[stationary]
family = lake
z0 = 1
"""


@pytest.fixture(scope="module")
def lake_run():
    return ncbal.run_config(LAKE)


def test_diagnostics_schema(lake_run):
    table = ncbal.parse_diagnostics(lake_run["diagnostics"])
    assert ",".join(table.columns) == ncbal.diagnostics_header(2)
    assert table.column("step") == list(range(201))
    assert lake_run["stop"] == "step limit"


def test_lyapunov_decreases(lake_run):
    v = ncbal.parse_diagnostics(lake_run["diagnostics"]).column("lyapunov_V")
    assert v[0] > 0
    assert all(b < a for a, b in zip(v, v[1:]))


def test_mass_conserved(lake_run):
    mass = ncbal.parse_diagnostics(lake_run["diagnostics"]).column("mass0")
    assert max(abs(m - mass[0]) for m in mass) <= 1e-12 * abs(mass[0])


def test_round_trip(lake_run):
    for text, parse in (
        (lake_run["diagnostics"], ncbal.parse_diagnostics),
        (lake_run["final_snapshot"], ncbal.parse_snapshot),
    ):
        assert parse(text).to_csv() == text


def test_snapshot_schema(lake_run):
    snap = ncbal.parse_snapshot(lake_run["final_snapshot"])
    assert snap.columns == ["cell_id", "x", "y", "area", "alpha", "u0", "u1"]
    assert snap.column("cell_id") == list(range(16))
    assert sum(snap.column("area")) == pytest.approx(1.0, abs=1e-15)


def test_stationary_run_is_flat():
    out = ncbal.run_config(STILL)
    table = ncbal.parse_diagnostics(out["diagnostics"])
    assert set(table.column("lyapunov_V")) == {0.0}
    assert out["initial_snapshot"] == out["final_snapshot"]
    snap = ncbal.parse_snapshot(out["final_snapshot"])
    surface = [h + a for h, a in zip(snap.column("u0"), snap.column("alpha"))]
    assert max(abs(s - out["lake_level"]) for s in surface) <= 1e-15


def test_schema_errors():
    with pytest.raises(ncbal.CsvSchemaError, match="no data rows"):
        ncbal.parse_diagnostics(ncbal.diagnostics_header(2) + "\n")
    with pytest.raises(ncbal.CsvSchemaError, match="lyapunov_V"):
        ncbal.parse_diagnostics("step,time,dt,mass0,total_entropy\n0,0,0,1,1\n")
    with pytest.raises(ncbal.CsvSchemaError, match="u0"):
        ncbal.parse_snapshot("cell_id,x,y,area,alpha\n0,0,0,1,0\n")


def test_format_value():
    assert ncbal.format_value(0.1) == "0.10000000000000001"
    assert ncbal.format_value(-0.0) == "-0"
    assert ncbal.format_value(1e-20) == "9.9999999999999995e-21"


def test_errors():
    with pytest.raises(ncbal.ConfigError, match="line 2"):
        ncbal.run_config("[mesh]\ncells = x\n")
    with pytest.raises(ncbal.ConfigError):
        ncbal.run_config("[solver]\nzeta = 2\n")
    with pytest.raises(ValueError):
        ncbal.check_flux("roe", "sw1d", "h=0.5:2,U=-1:1")


def test_check_flux():
    ok, csv = ncbal.check_flux("hydrostatic", "sw1d", "h=0.5:2,U=-1:1", samples=300, alpha=(0.0, 0.5))
    assert ok
    assert "F5" in csv
    ok, _ = ncbal.check_flux("rusanov", "sw1d", "h=0.5:2,U=-1:1", samples=300, contracts=["F5"], alpha=(0.0, 0.5))
    assert not ok


def test_verify_wellbalance():
    results = ncbal.verify("wellbalance")
    assert [r["name"] for r in results] == ["well-balancing", "lagrangian-equilibrium"]
    assert all(r["passed"] for r in results)
    assert results[0]["line"].startswith("PASS well-balancing")
    assert "all" in ncbal.suites()


@pytest.mark.skipif("NCBAL_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_files_match_schema(tmp_path):
    cfg = tmp_path / "lake.cfg"
    cfg.write_text(LAKE + "[output]\ndirectory = out\nsnapshot_every = 100\n")
    subprocess.run([os.environ["NCBAL_CLI"], "run", str(cfg)], check=True, capture_output=True)
    out = tmp_path / "out"
    diag = ncbal.read_diagnostics(out / "diagnostics.csv")
    assert len(diag.rows) == 201
    assert (out / "diagnostics.csv").read_text() == ncbal.run_config(LAKE)["diagnostics"]
    for step in (0, 100, 200):
        ncbal.read_snapshot(out / f"snapshot_{step:06d}.csv")
