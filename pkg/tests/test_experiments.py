import json

import numpy as np
import pytest

from boselab.errors import ConfigError, FormatError
from boselab.experiments import cli
from boselab.experiments.config import SCHEMA, ExperimentConfig, load_config, parse_config_text
from boselab.experiments.invariants import (
    check_quartic_form_bound,
    check_diagonal_trace_bound,
    check_number_bound,
    gamma_n,
    hermite_from_coherent,
    diagonal_trace_ratio,
)
from boselab.experiments.output import (
    MANIFEST_SCHEMA_VERSION,
    ExperimentResult,
    format_cell,
    read_manifest,
    write_csv,
    write_manifest,
)
from boselab.experiments.profiles import PROFILES, make_profile
from boselab.experiments.runners import run_ccr, run_chaos, run_hepp
from boselab.space import Field, Grid

TINY_CHAOS = """\
grid.m = 3
run.t_final = 0.2
run.sample_times = 0, 0.1, 0.2
sweep.n_list = 2, 4
"""

TINY_HEPP = """\
grid.m = 2
run.t_final = 0.2
run.sample_times = 0, 0.2
sweep.epsilon_list = 1/2, 1/4
hepp.u2_n_max = 12
hepp.cutoff_margin = 8
"""

TINY_CCR = """\
grid.m = 2
run.t_final = 0.2
run.sample_times = 0, 0.2
init.mass = 1/2
ccr.n_max = 12
ccr.n_steps_list = 4, 8
"""


def test_defaults_cover_every_schema_key():
    cfg = ExperimentConfig()
    for key, entry in SCHEMA.items():
        assert cfg[key] == entry.default


def test_parser_accepts_fractions_lists_and_comments():
    cfg = parse_config_text("# header\ngrid.m = 8   # trailing\nsweep.epsilon_list = 1/2, 0.25,1/8\n"
                            "init.profile = \"two-bump\"\ninit.params.width = 1/20\n\n")
    assert cfg["grid.m"] == 8
    assert cfg["sweep.epsilon_list"] == [0.5, 0.25, 0.125]
    assert cfg["init.profile"] == "two-bump"
    assert cfg.params("init.params.") == {"width": 0.05}
    assert cfg.copy_with(grid__m=5)["grid.m"] == 5 and cfg["grid.m"] == 8


@pytest.mark.parametrize("text, fragment", [
    ("grid.m = 4\ngrid.m = 5", "duplicate"),
    ("grid.nodes = 4", "unknown"),
    ("grid.m 4", "key = value"),
    ("grid.m = 1", "at least 2"),
    ("grid.m = four", "integer"),
    ("grid.length = 1/0", "number"),
    ("sweep.epsilon_list = 2", "(0, 1]"),
    ("sweep.n_list = ,", "empty"),
    ("init.profile = square", "one of"),
    ("init.params.width = wide", "number"),
])
def test_parser_rejects(text, fragment):
    with pytest.raises(ConfigError, match="line") as info:
        parse_config_text(text)
    assert fragment in str(info.value)


def test_load_config_reports_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.conf")


def test_shipped_configs_parse():
    from pathlib import Path
    for path in sorted(Path(__file__).resolve().parents[1].joinpath("configs").glob("*.conf")):
        load_config(path)


@pytest.mark.parametrize("name", PROFILES)
def test_profiles_have_requested_mass(name):
    grid = Grid(16, 2.0)
    f = make_profile(grid, name, mass=0.7, seed=3)
    assert f.norm() ** 2 == pytest.approx(0.7, rel=1e-12)
    assert make_profile(grid, name, mass=0.0).norm() == 0.0


def test_profile_details():
    grid = Grid(16, 1.0)
    plane = make_profile(grid, "plane", {"k": 2})
    assert np.allclose(np.abs(plane.values), 1.0)
    gauss = make_profile(grid, "gauss", {"center": 0.25})
    assert int(np.argmax(np.abs(gauss.values))) == 4
    a = make_profile(grid, "random", seed=5)
    b = make_profile(grid, "random", seed=5)
    np.testing.assert_array_equal(a.values, b.values)
    with pytest.raises(ConfigError):
        make_profile(grid, "gauss", {"sigma": 1.0})
    with pytest.raises(ConfigError):
        make_profile(grid, "square")


def test_csv_cells_and_line_endings(tmp_path):
    assert format_cell(0.1) == "1.000000000000e-01"
    assert format_cell(np.float64(-2.5)) == "-2.500000000000e+00"
    assert format_cell(3) == "3" and format_cell(np.int64(3)) == "3"
    assert format_cell(True) == "true" and format_cell("vacuum") == "vacuum"
    path = tmp_path / "t.csv"
    write_csv(path, ["a", "b"], [(1, 0.5), (2, "x")])
    assert path.read_bytes() == b"a,b\n1,5.000000000000e-01\n2,x\n"


def test_manifest_round_trip_and_version(tmp_path):
    path = tmp_path / "manifest.json"
    write_manifest(path, {"schema_version": MANIFEST_SCHEMA_VERSION, "status": "passed"})
    assert read_manifest(path)["status"] == "passed"
    path.write_text(json.dumps({"schema_version": 99}))
    with pytest.raises(FormatError):
        read_manifest(path)


def test_result_bookkeeping():
    res = ExperimentResult("x", ["a", "b"], rows=[(1, 2), (3, 4)])
    assert res.passed and res.column("b") == [2, 4]
    res.check("ok", True)
    res.check("bad", False, "why", value=1.5)
    assert not res.passed
    assert res.to_json()["checks"][1] == {"name": "bad", "passed": False, "detail": "why", "value": 1.5}


def test_small_chaos_run():
    res = run_chaos(parse_config_text(TINY_CHAOS))
    assert res.passed, [c for c in res.checks if not c.passed]
    assert res.columns == ["N", "t", "k", "distance", "truncation_loss"]
    assert len(res.rows) == 2 * 3 * 2
    assert all(r[3] <= 1e-12 for r in res.rows if r[1] == 0.0)


def test_small_hepp_run():
    res = run_hepp(parse_config_text(TINY_HEPP))
    assert res.passed, [c for c in res.checks if not c.passed]
    final = [r for r in res.rows if r[1] == 0.2 and r[2] == "vacuum"]
    assert final[0][3] > final[1][3] > 0


def test_small_ccr_run():
    res = run_ccr(parse_config_text(TINY_CCR))
    assert res.passed, [c for c in res.checks if not c.passed]
    by_steps = {r[3]: r[4] for r in res.rows if r[2] == "vacuum"}
    assert by_steps[4] / by_steps[8] >= 1.5


def test_ccr_free_and_trivial_cases():
    base = parse_config_text(TINY_CCR).copy_with(ccr__n_steps_list="4")
    # zero condensate: the generator is constant and the identity is exact up to Krylov error
    free = run_ccr(base.copy_with(init__mass=0.0))
    assert max(r[4] for r in free.rows) <= 1e-7
    trivial = run_ccr(base.copy_with(ccr__xi__mass=0.0))
    assert max(r[4] for r in trivial.rows) <= 1e-9


def test_invariant_helpers():
    rng = np.random.default_rng(0)
    assert check_diagonal_trace_bound(rng, 10, [0.1, 1.0, 10.0], 1.1).passed
    assert check_quartic_form_bound(rng, 10, 1.1).passed
    assert check_number_bound(rng, 10, 1.1).passed
    assert not check_diagonal_trace_bound(rng, 0, [1.0], 1.1).passed
    recon, target = hermite_from_coherent(Grid(2, 1.0), Field(Grid(2, 1.0), [1.0, 0.5j]), 1)
    assert (recon - target).norm() <= 1e-10
    # [DERIVED] mpmath, 20 digits
    assert gamma_n(4) == pytest.approx(2.2624271403975139755, rel=1e-13)
    assert gamma_n(20) == pytest.approx(3.3551131473141466083, rel=1e-13)


def test_plane_pair_sits_inside_the_bound():
    grid = Grid(32, 60.0)
    x = grid.x
    k1, k3 = 2 * np.pi / 60.0, 6 * np.pi / 60.0
    pair = np.exp(1j * (k1 * x[:, None] + k3 * x[None, :])) + np.exp(1j * (k3 * x[:, None] + k1 * x[None, :]))
    assert max(diagonal_trace_ratio(pair, grid, a) for a in (0.1, 1.0, 10.0)) < 1.0


def write(tmp_path, text, name="run.conf"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_cli_success_writes_csv_and_manifest(tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["chaos", "--config", str(write(tmp_path, TINY_CHAOS)), "--out", str(out)])
    assert code == cli.EXIT_OK
    assert "chaos: pass" in capsys.readouterr().out
    manifest = read_manifest(out / "manifest.json")
    assert manifest["status"] == "passed" and manifest["seed"] == 0
    assert manifest["config"]["grid.m"] == 3
    assert (out / "chaos.csv").read_text().startswith("N,t,k,distance,truncation_loss\n")


def test_cli_exit_codes(tmp_path):
    bad = write(tmp_path, "grid.m = 1\n", "bad.conf")
    assert cli.main(["chaos", "--config", str(bad), "--out", str(tmp_path / "a")]) == cli.EXIT_CONFIG
    assert read_manifest(tmp_path / "a" / "manifest.json")["status"] == "error"
    big = write(tmp_path, TINY_CHAOS + "fock.max_states = 3\n", "big.conf")
    assert cli.main(["chaos", "--config", str(big), "--out", str(tmp_path / "b")]) == cli.EXIT_CAPACITY
    tight = write(tmp_path, TINY_HEPP + "fock.truncation_budget = 1e-30\n", "tight.conf")
    assert cli.main(["hepp", "--config", str(tight), "--out", str(tmp_path / "c")]) == cli.EXIT_CHECK_FAILED
    manifest = read_manifest(tmp_path / "c" / "manifest.json")
    assert manifest["status"] == "failed" and "truncation_budget" in manifest["error"]
    ok = write(tmp_path, TINY_CHAOS, "ok.conf")
    assert cli.main(["chaos", "--config", str(ok), "--workers", "0", "--out", str(tmp_path / "d")]) \
        == cli.EXIT_CONFIG


def test_cli_output_is_deterministic(tmp_path):
    conf = write(tmp_path, TINY_CHAOS)
    outputs = []
    for i, workers in enumerate(["1", "1", "2"]):
        out = tmp_path / f"run{i}"
        assert cli.main(["chaos", "--config", str(conf), "--out", str(out), "--workers", workers]) == 0
        outputs.append((out / "chaos.csv").read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
