import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracks import cli
from fracks.config import ExperimentConfig, dumps, load, loads
from fracks.fieldio import read_field, slice_csv, write_field
from fracks.grid import Grid, integrate
from fracks.initial import from_recipe, gaussian, peak_for, ring, two_bump
from fracks.plots import emit_plots
from fracks.report import csv_text, digest, fmt
from fracks.report import dumps as jdumps
from fracks.solver import MomentSeries, SimParams

SUB = """
seed = 7

[params]
d = 2
alpha = 2.0
beta = 2.0
gamma = 1.5
n = 64
half_width = 8.0
dt = 1e-3
T = 0.05
dt_max = 1e-2

[initial_condition]
kind = "gaussian"
mass = {mass}
width = 0.5

[outputs]
dir = "out"
plots = true
"""


def write_config(tmp_path, mass, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(SUB.format(mass=repr(mass)))
    return p


# --- report ---------------------------------------------------------------

def test_fmt_roundtrips_doubles():
    for x in (0.1, 1 / 3, 2.0 ** -1074, 1.7976931348623157e308, -0.0):
        assert float(fmt(x)) == x
    assert fmt(math.inf) == "Infinity" and fmt(math.nan) == "NaN"


def test_dumps_sorted_and_digest_stable():
    a = jdumps({"b": 1, "a": [0.1, 2]})
    assert a.index('"a"') < a.index('"b"')
    assert json.loads(a) == {"a": [0.1, 2], "b": 1}
    assert digest({"x": 1.0, "y": 2}) == digest({"y": 2, "x": 1.0})
    assert csv_text(["a"], [[0.5]], "abc").splitlines() == ["# config_digest=abc", "a", "0.5"]


# --- config ---------------------------------------------------------------

@given(st.floats(1e-6, 1e3), st.floats(1e-4, 1.0), st.integers(0, 2 ** 31), st.sampled_from(["toml", "json"]))
def test_config_roundtrip_bit_exact(mass, dt, seed, fmt_):
    cfg = ExperimentConfig(SimParams(d=2, alpha=1.5, beta=2.0, gamma=1.2, n=32, half_width=4.0, dt=dt, T=1.0),
                           {"kind": "gaussian", "mass": mass, "width": 0.5}, seed,
                           criteria_constants={"c": mass / 7})
    back = loads(dumps(cfg, fmt_), fmt_)
    assert back == cfg
    assert back.digest == cfg.digest


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        loads('{"params": {"d": 2, "bogus": 1}, "initial_condition": {"kind": "gaussian"}}')
    with pytest.raises(ValueError):
        loads('{"params": {}, "initial_condition": {}}')
    with pytest.raises(ValueError):
        loads("[params\nd=")


def test_config_load_by_suffix(tmp_path):
    p = write_config(tmp_path, 4 * math.pi)
    cfg = load(p)
    assert cfg.seed == 7 and cfg.params.n == 64 and cfg.outputs["snapshot_every"] == 0
    j = tmp_path / "cfg.json"
    j.write_text(dumps(cfg, "json"))
    assert load(j) == cfg


# --- initial data and field files -----------------------------------------

def test_recipes_have_exact_discrete_mass():
    g = Grid(2, 64, 8.0)
    for f in (gaussian(g, 3.0, 0.7), ring(g, 2.0, 3.0, 0.3), two_bump(g, 5.0, 2.0, 0.5, ratio=2.0)):
        assert integrate(f) == pytest.approx(f.values.sum() * g.cell_volume)
    assert integrate(from_recipe(g, {"kind": "gaussian", "mass": 3.0, "width": 0.7})) == pytest.approx(3.0, rel=1e-14)
    assert peak_for(2 * math.pi, 1.0, 2) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        from_recipe(g, {"kind": "square"})


def test_field_file_roundtrip(tmp_path):
    g = Grid(2, 16, 3.0)
    f = gaussian(g, 1.0, 0.5)
    write_field(tmp_path / "u", f, 0.25, "abc")
    back, header = read_field(tmp_path / "u.raw")
    assert np.array_equal(back.values, f.values)
    assert header["time"] == 0.25 and header["config_digest"] == "abc"
    assert from_recipe(g, {"kind": "file", "path": str(tmp_path / "u")}).grid == g
    with pytest.raises(ValueError):
        from_recipe(Grid(2, 32, 3.0), {"kind": "file", "path": str(tmp_path / "u")})
    lines = slice_csv(f, 0, "abc").splitlines()
    assert lines[0] == "# config_digest=abc" and len(lines) == 18


# --- plots ----------------------------------------------------------------

def test_empty_series_writes_nothing(tmp_path):
    with pytest.raises(ValueError):
        emit_plots(MomentSeries(), tmp_path / "plots")
    assert not (tmp_path / "plots").exists()


# --- command line ---------------------------------------------------------

def test_usage_errors_exit_64(capsys):
    assert cli.main(["frobnicate"]) == 64
    assert cli.main([]) == 64
    assert cli.main(["check"]) == 64


def test_io_and_domain_errors(tmp_path):
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.toml")]) == 2
    assert cli.main(["kernel-table", "--alpha", "2.5"]) == 1
    bad = tmp_path / "bad.toml"
    bad.write_text(SUB.format(mass="1.0").replace("beta = 2.0", "beta = 3.0"))
    assert cli.main(["simulate", "--config", str(bad)]) == 1


def test_check_supercritical(tmp_path, capsys):
    cfg = write_config(tmp_path, 12 * math.pi)
    out = tmp_path / "check.json"
    assert cli.main(["check", "--config", str(cfg), "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    v = {x["name"]: x for x in data["verdicts"]}
    assert v["mass_threshold"]["satisfied"]
    assert v["mass_threshold"]["margin"] == pytest.approx(4 * math.pi, rel=1e-12)
    assert data["config_digest"] == load(cfg).digest
    assert "mass_threshold" in capsys.readouterr().out


def test_simulate_is_deterministic(tmp_path):
    cfg = write_config(tmp_path, 4 * math.pi)
    runs = []
    for name in ("a", "b"):
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
        runs.append({p.name: p.read_bytes() for p in sorted((tmp_path / name).iterdir())})
    assert runs[0] == runs[1]
    files = runs[0]
    assert {"series.csv", "report.json", "final.raw", "final.json", "mass.svg", "w_gamma.svg", "log_linf.svg",
            "dt.svg"} <= set(files)
    dg = load(cfg).digest
    for name, payload in files.items():
        if not name.endswith(".raw"):
            assert dg.encode() in payload, name
    rows = files["series.csv"].decode().splitlines()
    masses = [float(r.split(",")[2]) for r in rows[2:]]
    assert max(abs(m - masses[0]) for m in masses) <= 1e-12 * masses[0]


def test_kernel_table_and_picard(tmp_path):
    out = tmp_path / "k.csv"
    assert cli.main(["kernel-table", "--alpha", "1.0", "--d", "1", "--count", "5", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()[2:]
    r, p = map(float, rows[0].split(","))
    assert p == pytest.approx(1 / (math.pi * (1 + r * r)), rel=1e-8)
    cfg = write_config(tmp_path, 0.5)
    pj = tmp_path / "p.json"
    assert cli.main(["picard", "--config", str(cfg), "--T-local", "0.05", "--nodes", "8", "--out", str(pj)]) == 0
    data = json.loads(pj.read_text())
    assert data["converged"] and data["expected_T_exponent"] == pytest.approx(0.5)


def test_virial_subcommand(tmp_path):
    out = tmp_path / "v.json"
    assert cli.main(["virial", "--alpha", "1.5", "--beta", "2", "--gamma", "1.3", "--samples", "5000",
                     "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["concentration_constant"] > 0 and "config_digest" in data


def test_acceptance_subcommand_subset(capsys):
    assert cli.main(["acceptance", "--only", "A6"]) == 0
    assert "A6   PASS" in capsys.readouterr().out
    assert cli.main(["acceptance", "--only", "A99"]) == 1
