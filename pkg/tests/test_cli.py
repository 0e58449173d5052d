import csv

import numpy as np
import pytest

from mixedpipe import cli, kinetic
from mixedpipe import solver as s

MINIMAL = """\
name: tiny
geometry:
  profile: [[0, 1, 1], [10, 1, 1]]
constants: {c: 20}
initial: {head: 1.0, regions: [{from: 3, to: 7, head: 1.6}]}
boundary:
  upstream: {kind: wall}
  downstream: {kind: wall}
n_cells: 10
cfl: 0.8
t_end: 0.5
friction: upwinded
gauges: [0.5, 5.0]
snapshots: [0, 0.25, 0.5]
output_interval: 0.1
"""


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "tiny.yaml"
    p.write_text(MINIMAL)
    return p


def read(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def summary(path):
    out = {}
    for line in open(path):
        k, v = line.rstrip("\n").split(" = ", 1)
        out[k] = v
    return out


def test_validate(tiny, tmp_path, capsys):
    assert cli.main(["validate", "--scenario", str(tiny)]) == cli.EXIT_OK
    assert cli.main(["validate", "--scenario", "expanding_pipe"]) == cli.EXIT_OK
    bad = tmp_path / "bad.yaml"
    bad.write_text(MINIMAL.replace("cfl: 0.8", "cfl: 3"))
    assert cli.main(["validate", "--scenario", str(bad)]) == cli.EXIT_INVALID
    assert "cfl" in capsys.readouterr().err


def test_run_writes_outputs(tiny, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", "--scenario", str(tiny), "--out", str(out)]) == cli.EXIT_OK
    for x in ("0.5", "5"):
        rows = read(out / "gauges" / f"{x}.csv")
        assert tuple(rows[0]) == cli.GAUGE_HEADER
        assert [float(r[0]) for r in rows[1:]] == pytest.approx([0, 0.1, 0.2, 0.3, 0.4, 0.5])
    for t in ("0", "0.25", "0.5"):
        rows = read(out / "snapshots" / f"{t}.csv")
        assert tuple(rows[0]) == cli.SNAPSHOT_HEADER
        assert len(rows) == 11
    info = summary(out / "run_summary")
    assert info["status"] == "ok"
    assert int(info["steps"]) > 0
    assert float(info["final_mass"]) == pytest.approx(float(info["initial_mass"]), rel=1e-13)
    assert "wall_time" in info
    assert not (out / "symmetry.csv").exists()


def test_run_zero_duration_echoes_initial_condition(tiny, tmp_path):
    tiny.write_text(MINIMAL.replace("t_end: 0.5", "t_end: 0"))
    out = tmp_path / "out"
    assert cli.main(["run", "--scenario", str(tiny), "--out", str(out)]) == cli.EXIT_OK
    assert [p.name for p in (out / "snapshots").iterdir()] == ["0.csv"]
    rows = read(out / "snapshots" / "0.csv")
    from mixedpipe.scenario import parse_scenario
    A0 = parse_scenario(tiny.read_text()).initial_state().A
    assert np.array_equal([float(r[1]) for r in rows[1:]], A0)
    assert summary(out / "run_summary")["steps"] == "0"


def test_run_symmetry_metric_and_overrides(tiny, tmp_path):
    out = tmp_path / "out"
    argv = ["run", "--scenario", str(tiny), "--out", str(out), "--metric", "symmetry",
            "--cells", "20", "--cfl", "0.5", "--friction", "centered"]
    assert cli.main(argv) == cli.EXIT_OK
    rows = read(out / "symmetry.csv")
    assert rows[0] == ["t", "dev_A", "dev_Q"]
    assert len(rows) == 7
    info = summary(out / "run_summary")
    assert info["n_cells"] == "20" and info["cfl"] == "0.5" and info["friction"] == "centered"
    assert float(info["max_symmetry_deviation"]) == max(float(r[1]) for r in rows[1:])
    assert len(read(out / "snapshots" / "0.csv")) == 21


def test_run_deterministic_bytes(tiny, tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert cli.main(["run", "--scenario", str(tiny), "--out", str(o)]) == cli.EXIT_OK
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*.csv"))
    assert files
    for f in files:
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()


def test_run_invalid_override(tiny, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", "--scenario", str(tiny), "--out", str(out),
                     "--cfl", "1.2"]) == cli.EXIT_INVALID
    assert cli.main(["run", "--scenario", str(tmp_path / "missing.yaml"),
                     "--out", str(out)]) == cli.EXIT_INVALID


def test_run_nan_abort(tiny, tmp_path, monkeypatch, capsys):
    real = s.step

    def poisoned(state, *a, **kw):
        out = real(state, *a, **kw)
        if out.n == 2:
            out.A[3] = np.inf
        return out

    monkeypatch.setattr(s, "step", poisoned)
    out = tmp_path / "out"
    assert cli.main(["run", "--scenario", str(tiny), "--out", str(out)]) == cli.EXIT_ABORT
    assert "non-finite" in capsys.readouterr().err
    assert summary(out / "run_summary")["status"] == "aborted"
    rows = read(out / "abort_state.csv")
    assert tuple(rows[0]) == cli.SNAPSHOT_HEADER and len(rows) == 11


def test_run_plots(tiny, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", "--scenario", str(tiny), "--out", str(out), "--metric",
                     "symmetry", "--plots"]) == cli.EXIT_OK
    pngs = sorted(p.name for p in (out / "figures").glob("*.png"))
    assert pngs
    for p in (out / "figures").glob("*.png"):
        assert p.read_bytes()[:4] == b"\x89PNG"


def test_check_flux_passes(capsys):
    assert cli.main(["check-flux", "--seed", "42", "--count", "200"]) == cli.EXIT_OK
    assert "PASS" in capsys.readouterr().out


def test_check_flux_vacuous():
    assert cli.main(["check-flux", "--count", "0"]) == cli.EXIT_OK
    assert cli.check_flux(1, 0) == 0.0


def test_check_flux_negative_controls(capsys):
    assert cli.main(["check-flux", "--count", "20", "--perturb", "1e-6"]) == cli.EXIT_FAIL
    assert "FAIL" in capsys.readouterr().out

    def broken(data, g):
        # drop the reflected part of the left momentum flux
        f = kinetic.interface_flux(data, g)
        return kinetic.FluxPair(f.F_minus * np.array([1.0, 0.999]), f.F_plus)

    args = cli.build_parser().parse_args(["check-flux", "--count", "20"])
    assert cli.cmd_check_flux(args, flux_fn=broken) == cli.EXIT_FAIL


def test_parser_flags():
    p = cli.build_parser()
    a = p.parse_args(["run", "--scenario", "x", "--friction", "off", "--metric", "symmetry"])
    assert a.friction == "off" and a.metric == "symmetry"
    with pytest.raises(SystemExit):
        p.parse_args(["run", "--scenario", "x", "--friction", "sticky"])
    with pytest.raises(SystemExit):
        p.parse_args([])
