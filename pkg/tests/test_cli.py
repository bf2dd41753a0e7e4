# tests/test_cli.py

import csv
import json
import math

import pytest

from locscale.cli import main as cli
from locscale.cli.main import COMMANDS, RunConfig, build_parser, main
from locscale.common.errors import ContractError, InputFormatError


def _rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def _summary(out):
    return json.loads((out / "summary.json").read_text())


def _synth(tmp_path, name, *flags):
    out = tmp_path / "data"
    assert main(["synth", "--out", str(out), "--name", name, *flags]) == 0
    return out / f"{name}.csv"


def test_synth_writes_data_and_truth(tmp_path):
    path = _synth(tmp_path, "sine", "--kind", "sine_signal", "--m", "2", "--h", str(1 / 64))
    assert _rows(path)[0].keys() == {"x", "value"}
    summary = _summary(path.parent)
    assert summary["command"] == "synth"
    assert summary["truth"]["t_star"] == pytest.approx(1 / (4 * math.pi))
    assert summary["fixture"]["kind"] == "sine_signal"


def test_synth_reads_a_spec_file(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"kind": "tent_graph", "slope": 2.0, "teeth": 2, "h": 0.125}))
    path = _synth(tmp_path, "tent", "--spec", str(spec), "--slope", "3")
    assert (path.parent / "tent.json").exists()
    assert _summary(path.parent)["fixture"]["slope"] == 3.0


def test_scales_fn_finds_the_sine_scale(tmp_path):
    data = _synth(tmp_path, "sine", "--kind", "sine_signal", "--h", str(1 / 128))
    out = tmp_path / "out"
    assert main(["scales-fn", str(data), "--out", str(out)]) == 0

    summary = _summary(out)
    dtau = summary["grid"]["dtau"]
    expected = math.log2(1 / math.pi)
    per_point = {}
    for row in _rows(out / "scales.csv"):
        per_point.setdefault(int(row["point_id"]), []).append(float(row["tau"]))
    assert set(per_point) == set(range(128)) - {0, 64}
    for taus in per_point.values():
        assert len(taus) == 1
        assert abs(taus[0] - expected) <= dtau
    assert summary["points"] == 128
    assert [r["N"] for r in _rows(out / "decay.csv")] == [str(n) for n in range(1, 9)]


def test_runs_are_deterministic(tmp_path):
    data = _synth(tmp_path, "two", "--kind", "two_tone_signal", "--h", str(1 / 128))
    out = tmp_path / "out"
    assert main(["scales-fn", str(data), "--out", str(out)]) == 0
    first = {name: (out / name).read_bytes() for name in ("scales.csv", "decay.csv", "summary.json")}
    assert main(["scales-fn", str(data), "--out", str(out)]) == 0
    assert first == {name: (out / name).read_bytes() for name in first}


def test_scales_curve_on_a_line_is_empty(tmp_path):
    data = _synth(tmp_path, "line", "--kind", "plane", "--d", "1", "--extent", "4", "--h", str(1 / 64),
                  "--tilt", "0.5")
    out = tmp_path / "out"
    assert main(["scales-curve", str(data), "--out", str(out), "--a", "2", "--tau-min=-8", "--tau-max=-5"]) == 0
    assert _rows(out / "scales.csv") == []
    assert all(float(r["measure"]) == 0.0 for r in _rows(out / "decay.csv"))
    summary = _summary(out)
    assert summary["fit"] is None
    assert summary["gamma_star"] == pytest.approx(math.sqrt(1.25))
    assert summary["square_function"]["bracket_holds"]


def test_function_dilation_consistency(tmp_path):
    base = _synth(tmp_path, "f", "--kind", "sine_signal", "--m", "1", "--h", str(1 / 128))
    dilated = _synth(tmp_path, "g", "--kind", "sine_signal", "--m", "2", "--h", str(1 / 128))
    out = tmp_path / "out"
    assert main(["check-consistency", str(base), str(dilated), "--kind", "function", "--dilation", "2",
                 "--out", str(out)]) == 0
    summary = _summary(out)
    assert summary["pass"] is True
    assert summary["checked"] == 128
    assert summary["shift_expected"] == pytest.approx(-2.0)


def test_set_dilation_consistency(tmp_path):
    base = _synth(tmp_path, "c1", "--kind", "circle", "--radius", "1", "--samples", "256")
    dilated = _synth(tmp_path, "c2", "--kind", "circle", "--radius", "2", "--samples", "256")
    out = tmp_path / "out"
    assert main(["check-consistency", str(base), str(dilated), "--eval-stride", "32", "--out", str(out)]) == 0
    summary = _summary(out)
    assert summary["pass"] is True
    assert summary["checked"] == 8
    assert summary["shift_expected"] == pytest.approx(2.0)
    assert {int(r["base_id"]) for r in _rows(out / "consistency.csv")} == set(range(0, 256, 32))


def test_nontangential_on_a_field(tmp_path):
    data = _synth(tmp_path, "sine", "--kind", "sine_signal", "--h", str(1 / 64))
    out = tmp_path / "out"
    assert main(["nontangential", str(data), "--out", str(out)]) == 0
    rows = _rows(out / "nontangential.csv")
    assert rows and set(rows[0]) == {"point_id", "tau", "t", "S_star", "visible"}


def test_dyadic_beta_command(tmp_path):
    data = _synth(tmp_path, "koch", "--kind", "koch", "--level", "2")
    out = tmp_path / "out"
    assert main(["beta", str(data), "--dyadic", "--level-min", "0", "--level-max", "3", "--out", str(out)]) == 0
    summary = _summary(out)
    assert summary["polyline_length"] == pytest.approx(16 / 9)
    assert summary["tsp_sum"] == pytest.approx(sum(summary["levels"].values()))
    assert summary["tsp_ratio"] == pytest.approx(summary["tsp_sum"] / summary["polyline_length"])


def test_beta_p_command_on_a_surface(tmp_path):
    data = _synth(tmp_path, "circle", "--kind", "circle", "--samples", "64")
    out = tmp_path / "out"
    assert main(["beta", str(data), "--t", "0.5", "--p", "1,2,inf", "--eval-stride", "16", "--out", str(out)]) == 0
    rows = _rows(out / "beta.csv")
    assert len(rows) == 4 * 3
    assert {r["p"] for r in rows} == {"1", "2", "inf"}
    assert all(float(r["beta"]) > 0 for r in rows)
    assert list(rows[0].keys())[:3] == ["point_id", "x1", "x2"]
    assert sorted({int(r["point_id"]) for r in rows}) == [0, 16, 32, 48]
    for r in rows:
        assert math.hypot(float(r["x1"]), float(r["x2"])) == pytest.approx(1.0)
    first = next(r for r in rows if r["point_id"] == "16")
    assert (float(first["x1"]), float(first["x2"])) == pytest.approx((0.0, 1.0), abs=1e-12)


def test_diffuse_command(tmp_path):
    data = _synth(tmp_path, "circle", "--kind", "circle", "--samples", "64")
    out = tmp_path / "out"
    assert main(["diffuse", str(data), "--t", "0.01,0.1", "--out", str(out)]) == 0
    rows = _rows(out / "curve.csv")
    assert len(rows) == 128
    radius = math.hypot(float(rows[70]["x1"]), float(rows[70]["x2"]))
    assert radius == pytest.approx(math.exp(-0.1 * math.pi), rel=1e-6)
    assert _summary(out)["scale_units"] == "t_param"


def test_probe_bounds_command(tmp_path):
    data = _synth(tmp_path, "tent", "--kind", "tent_graph", "--slope", "4")
    out = tmp_path / "out"
    assert main(["probe-bounds", str(data), "--k", "0,1", "--t", "0.002,0.004", "--eval-stride", "8",
                 "--out", str(out)]) == 0
    rows = _rows(out / "bounds.csv")
    assert len(rows) == 2 * 2 * 2
    summary = _summary(out)
    assert summary["gamma_star"] == pytest.approx(math.sqrt(17))
    assert summary["k"]["0"]["ratio"] == pytest.approx(math.sqrt(17), rel=1e-9)


def test_unknown_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 1


def test_missing_input_exits_2(tmp_path):
    assert main(["scales-fn", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "out")]) == 2


def test_bad_base_exits_3(tmp_path):
    data = _synth(tmp_path, "sine", "--kind", "sine_signal", "--h", str(1 / 64))
    assert main(["scales-fn", str(data), "--a", "0.5", "--out", str(tmp_path / "out")]) == 3


def test_explicit_mode_without_weights_exits_3(tmp_path):
    data = _synth(tmp_path, "circle", "--kind", "circle", "--samples", "64")
    assert main(["scales-curve", str(data), "--measure", "explicit", "--out", str(tmp_path / "out")]) == 3


def test_flags_override_the_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"delta": 0.2, "Nmax": 3, "output_dir": "elsewhere"}))
    cfg = RunConfig.layered(path, {"delta": 0.05, "Nmax": None})
    assert cfg.delta == 0.05
    assert cfg.Nmax == 3
    assert str(cfg.output_dir) == "elsewhere"


def test_config_file_errors(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"delta": 0.2, "colour": "blue"}))
    with pytest.raises(InputFormatError):
        RunConfig.layered(path)
    path.write_text("[1, 2]")
    with pytest.raises(InputFormatError):
        RunConfig.layered(path)
    with pytest.raises(ContractError):
        RunConfig.layered(None, {"tau_min": -3.0})
    assert main(["synth", "--kind", "circle", "--config", str(tmp_path / "nope.json")]) == 2


def test_parser_maps_flags_onto_config_fields():
    opts = build_parser().parse_args(["scales-curve", "s.csv", "--nmax", "4", "--measure", "hausdorff_param"])
    assert opts.Nmax == 4
    assert opts.measure_mode == "hausdorff_param"


def test_unexpected_errors_are_logged_as_critical(tmp_path, mocker):
    def boom(cfg, inputs, opts):
        raise RuntimeError("boom")

    mocker.patch.dict(COMMANDS, {"synth": boom})
    log = mocker.patch.object(cli, "log")
    assert main(["synth", "--kind", "circle", "--out", str(tmp_path)]) == 1
    log.critical.assert_called_once()
    assert log.critical.call_args.kwargs["exc_info"] is True
