import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qmonopole import cli
from qmonopole.errors import UsageError
from qmonopole.results import SweepResult, read_csv, to_csv, to_json

GOLDEN = Path(__file__).parent / "golden"
UPDATE = os.environ.get("UPDATE_GOLDEN") == "1"

GOLDEN_RUNS = {
    "curvature": ["curvature", "--grid", "4x3"],
    "chern": ["chern", "--delta1-mhz", "30", "--omega-mhz", "10", "--delta2-mhz", "0", "--band", "ground", "--route", "plaquette"],
    "chern_two_patch": ["chern", "--route", "two_patch", "--g-charge", "1.5"],
    "transition": ["transition", "--delta2-over-delta1", "-2:2:9"],
    "quench": ["quench", "--t-ramp-us", "0.5", "--dt-us", "0.0025"],
    "fidelity": ["fidelity", "--t-ramp-us", "2", "--delta2-over-delta1", "0:2:3", "--theta-meas-over-pi", "0:1:3"],
    "geometry": ["geometry", "--delta1-mhz", "10", "--omega-mhz", "10", "--grid", "64x64"],
    "monopole": ["monopole", "--g-charge", "-0.5"],
}


def run_cli(argv, out):
    code = cli.main(list(argv) + ["--out", str(out)])
    assert code == 0
    return out.read_text()


def _close(a, b):
    if isinstance(a, float) and isinstance(b, float):
        return (math.isnan(a) and math.isnan(b)) or abs(a - b) <= 1e-9 * max(1.0, abs(b))
    return a == b


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden_output(name, tmp_path):
    text = run_cli(GOLDEN_RUNS[name], tmp_path / "out.csv")
    path = GOLDEN / f"{name}.csv"
    if UPDATE:
        path.write_text(text)
    got, want = read_csv(tmp_path / "out.csv"), read_csv(path)
    assert got.columns == want.columns
    assert sorted(got.metadata) == sorted(want.metadata)
    assert len(got.rows) == len(want.rows)
    for key, value in want.metadata.items():
        if isinstance(value, str):
            assert got.metadata[key] == value
    for row_got, row_want in zip(got.rows, want.rows):
        assert all(_close(a, b) for a, b in zip(row_got, row_want)), (row_got, row_want)


@pytest.mark.parametrize("name", ["transition", "quench", "fidelity", "curvature"])
def test_reruns_are_byte_identical(name, tmp_path):
    a = run_cli(GOLDEN_RUNS[name], tmp_path / "a.csv")
    b = run_cli(GOLDEN_RUNS[name], tmp_path / "b.csv")
    assert a == b


@pytest.mark.parametrize(
    "command, columns",
    [
        ("transition", "delta2_over_delta1,chern_ground"),
        ("fidelity", "theta_meas,delta2_over_delta1,fidelity,target"),
        ("quench", "t_us,theta,sigma_y,f_theta_phi"),
    ],
)
def test_declared_schemas(command, columns):
    assert ",".join(cli.schema(command)) == columns


def test_excited_band_transition_column(tmp_path):
    text = run_cli(["transition", "--band", "excited", "--delta2-over-delta1", "0"], tmp_path / "t.csv")
    assert "delta2_over_delta1,chern_excited\n" in text
    assert read_csv(tmp_path / "t.csv").rows[0][1] == pytest.approx(-1.0)


def test_parse_resolves_mhz_to_angular_units():
    cfg = cli.parse_config(["chern", "--delta1-mhz", "30", "--omega-mhz", "10", "--delta2-mhz", "0", "--band", "ground", "--route", "plaquette"])
    assert cfg.params.delta1 == pytest.approx(2 * math.pi * 30)
    meta = cli.resolved_metadata(cfg)
    assert meta["delta1_rad_per_us"] == pytest.approx(2 * math.pi * 30)
    assert meta["omega_n_rad_per_us"] == pytest.approx(2 * math.pi * 10)


def test_transition_nudges_boundary_ratios():
    cfg = cli.parse_config(["transition", "--delta2-over-delta1", "-2:2:41"])
    res = cli.run(cfg)
    ratios = res.column("delta2_over_delta1")
    assert len(ratios) == 41
    assert not np.any(np.abs(np.abs(ratios) - 1.0) < 1e-9)
    assert np.any(np.isclose(np.abs(ratios), 1 + 1e-6, rtol=0, atol=1e-12))
    assert "boundary_nudge" in res.notes
    chern = res.column("chern_ground")
    assert np.allclose(chern, np.where(np.abs(ratios) < 1, 1.0, 0.0), atol=1e-10)


def test_quench_requires_ramp_time():
    with pytest.raises(UsageError, match="--t-ramp-us"):
        cli.parse_config(["quench"])
    assert cli.main(["quench"]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["chern", "--grid", "8x8"],
        ["chern", "--grid", "banana"],
        ["chern", "--bogus", "1"],
        ["chern", "--route", "nowhere"],
        ["geometry", "--grid", "32x32"],
        ["transition", "--delta2-over-delta1", "0:1:0"],
        ["fidelity", "--target", "x"],
        [],
    ],
)
def test_usage_errors_exit_2(argv):
    assert cli.main(argv) == 2


def test_computation_failure_exits_3(tmp_path):
    assert cli.main(["chern", "--delta2-mhz", "30", "--out", str(tmp_path / "x.csv")]) == 3


def test_config_file_with_flag_override(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# run\ndelta1-mhz = 20\nomega_mhz = 5   # trailing\nroute = spectral\ngrid = 32x32\n")
    cfg = cli.parse_config(["chern", "--config", str(cfg_file), "--route", "plaquette", "--grid", "24x24"])
    assert cfg.delta1_mhz == 20.0 and cfg.omega_mhz == 5.0
    assert cfg.route == "plaquette" and cfg.grid == (24, 24)


def test_config_file_rejects_unknown_keys(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("warp = 9\n")
    with pytest.raises(UsageError, match="warp"):
        cli.parse_config(["chern", "--config", str(cfg_file)])


def test_json_output_and_nan_as_null(tmp_path):
    res = SweepResult(["a", "b"], [[1.0, math.nan]], {"k": math.inf})
    doc = json.loads(to_json(res))
    assert doc == {"metadata": {"k": None}, "columns": ["a", "b"], "rows": [[1.0, None]]}
    run_cli(["monopole", "--format", "json"], tmp_path / "m.json")
    doc = json.loads((tmp_path / "m.json").read_text())
    assert doc["columns"] == ["r", "flux", "chern_two_patch"]
    assert doc["rows"][1][1] == pytest.approx(2 * math.pi)


def test_csv_floats_round_trip_exactly(tmp_path):
    values = [0.1, 1 / 3, math.pi, 1e-300, -2.5e17]
    path = tmp_path / "r.csv"
    path.write_text(to_csv(SweepResult(["v"], [[v] for v in values])))
    assert [row[0] for row in read_csv(path).rows] == values


def test_sweep_result_rejects_ragged_rows():
    with pytest.raises(ValueError):
        SweepResult(["a", "b"], [[1.0]])


def test_module_entry_point_smoke(tmp_path):
    out = tmp_path / "chern.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "qmonopole.cli", "chern", "--out", str(out)],
        capture_output=True,
        text=True,
        env={**os.environ, "NO_COLOR": "1"},
    )
    assert proc.returncode == 0, proc.stderr
    assert "\033[" not in proc.stderr
    assert read_csv(out).rows[0][1] == 1.0
