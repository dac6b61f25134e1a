import csv
import io
import json
import math

import pytest

from eraser_sim.cli import main
from eraser_sim.config import ConfigError, parse_config
from eraser_sim.output import RECORD_KEYS, emit

SYM = {"R": 0.5}


def config(**blocks):
    cfg = {"setup": {"S1": SYM, "S2": SYM, "S3": SYM, "delta_phi": 3.14159265}}
    for k, v in blocks.items():
        if k == "setup":
            cfg["setup"].update(v)
        else:
            cfg[k] = v
    return cfg


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


# ---------------------------------------------------------------- parse_config


def test_minimal_eval_config():
    cfg = parse_config(json.dumps(config()), mode="eval")
    setup = cfg.build_setup()
    assert setup.delta_phi == 3.14159265
    assert setup.is_setup1
    assert cfg.output.format == "csv"


def test_both_delta_phi_and_geometry_rejected():
    bad = config(setup={"geometry": {"H_tesla": 1.0, "delta_area_m2": 1e-15}})
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(bad))
    assert "delta_phi" in str(info.value) and "geometry" in str(info.value)


def test_neither_delta_phi_nor_geometry_rejected():
    cfg = config()
    del cfg["setup"]["delta_phi"]
    with pytest.raises(ConfigError, match="delta_phi"):
        parse_config(json.dumps(cfg))


def test_reflectance_range_error_path():
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(config(setup={"S3": {"R": 1.2}})))
    assert info.value.path == "setup.S3.R"


def test_syntax_error_position():
    with pytest.raises(ConfigError, match="line 2, column"):
        parse_config('{"setup":\n  {,}')


@pytest.mark.parametrize("patch,path", [
    ({"setup": {"S1": {"R": "half"}}}, "setup.S1.R"),
    ({"setup": {"S2": {"R": 0.5, "phase_x": 1}}}, "setup.S2"),
    ({"setup": {"input_mzi": "gamma_bar"}}, "setup.input_mzi"),
    ({"sweep": {"parameter": "omega", "start": 0, "stop": 1, "points": 3}}, "sweep.parameter"),
    ({"sweep": {"parameter": "phi", "start": 0, "stop": 1, "points": 0}}, "sweep.points"),
    ({"sample": {"shots": -3}}, "sample.shots"),
    ({"bias": {"voltage_volts": -1}}, "bias.voltage_volts"),
    ({"bias": {"dimensionless": "yes"}}, "bias.dimensionless"),
    ({"output": {"format": "xml"}}, "output.format"),
    ({"duality": {"leads": ["gamma", "alpha"]}}, "duality.leads"),
])
def test_schema_violations_name_the_field(patch, path):
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(config(**patch)))
    assert info.value.path == path


def test_mode_blocks_required():
    with pytest.raises(ConfigError, match="sweep"):
        parse_config(json.dumps(config()), mode="sweep")
    with pytest.raises(ConfigError, match="sample"):
        parse_config(json.dumps(config()), mode="sample")


def test_mode_mismatch():
    with pytest.raises(ConfigError):
        parse_config(json.dumps(config(mode="eval")), mode="sweep")


def test_geometry_config():
    cfg = parse_config(json.dumps({"setup": {"S1": SYM, "S2": SYM, "S3": SYM,
                                             "geometry": {"H_tesla": 0.5, "delta_area_m2": 4.135667696e-15}}}))
    assert cfg.build_setup().delta_phi == pytest.approx(math.pi, rel=1e-15)


def test_sweep_grid_endpoints():
    cfg = parse_config(json.dumps(config(sweep={"parameter": "phi", "start": 0, "stop": 2, "points": 5})))
    assert cfg.sweep.grid == [0.0, 0.5, 1.0, 1.5, 2.0]


# ---------------------------------------------------------------- emit


def _record(**kw):
    rec = dict.fromkeys(RECORD_KEYS)
    rec.update(kw)
    return rec


def test_emit_csv_one_record():
    out = emit([_record(p_alpha=0.1, shots=3)], "csv").decode()
    lines = out.split("\n")
    assert out.endswith("\n") and len(lines) == 3 and lines[2] == ""
    assert lines[0].split(",") == list(RECORD_KEYS)
    row = dict(zip(RECORD_KEYS, lines[1].split(",")))
    assert row["p_alpha"] == "0.10000000000000001"  # 17 significant digits
    assert row["shots"] == "3" and row["visibility"] == ""


def test_emit_json_single_element():
    data = json.loads(emit([_record(p_alpha=0.1)], "json"))
    assert isinstance(data, list) and len(data) == 1
    assert list(data[0]) == list(RECORD_KEYS)
    assert data[0]["visibility"] is None


def test_emit_json_round_trip_bit_exact():
    vals = [math.pi / 7, 1e-300, 0.1 + 0.2, -2.5e-17]
    rec = _record(p_alpha=vals[0], p_beta=vals[1], p_gamma=vals[2], s_alpha_gamma=vals[3])
    back = json.loads(emit([rec], "json"))[0]
    assert [back["p_alpha"], back["p_beta"], back["p_gamma"], back["s_alpha_gamma"]] == vals


def test_emit_csv_round_trip_bit_exact():
    vals = [math.pi / 7, 1e-300, 0.1 + 0.2]
    out = emit([_record(p_alpha=vals[0], p_beta=vals[1], p_gamma=vals[2])], "csv").decode()
    row = next(csv.DictReader(io.StringIO(out)))
    assert [float(row["p_alpha"]), float(row["p_beta"]), float(row["p_gamma"])] == vals


def test_emit_empty_rejected():
    with pytest.raises(ValueError):
        emit([], "csv")


# ---------------------------------------------------------------- CLI


def test_cli_eval(tmp_path, capsys):
    path = write(tmp_path, config())
    assert main(["eval", path]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 1
    assert float(rows[0]["p_alpha"]) == pytest.approx(0.5, abs=1e-8)


def test_cli_eval_json_to_file(tmp_path):
    path = write(tmp_path, config())
    out = tmp_path / "out.json"
    assert main(["eval", path, "--format", "json", "--out", str(out), "--delta-phi", "0"]) == 0
    rec = json.loads(out.read_text())[0]
    assert rec["p_alpha"] == pytest.approx(0.0, abs=1e-12)  # canonical phases give phi = pi


def test_cli_sweep(tmp_path):
    cfg = config(sweep={"parameter": "phi", "start": 0, "stop": math.pi, "points": 3, "shots": 1000},
                 sample={"shots": 0, "seed": 5})
    out = tmp_path / "sweep.csv"
    assert main(["sweep", write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [float(r["p_alpha_gamma"]) for r in rows] == pytest.approx([0.5, 0.25, 0.0], abs=1e-8)
    assert all(r["parameter"] == "phi" and r["shots"] == "1000" for r in rows)
    assert all(r["est_s_alpha_gamma"] != "" for r in rows)


def test_cli_sweep_analytic_leaves_sampled_columns_empty(tmp_path, capsys):
    cfg = config(sweep={"parameter": "delta_phi", "start": 0, "stop": 1, "points": 2})
    assert main(["sweep", write(tmp_path, cfg)]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows[0]["est_p_alpha_gamma"] == "" and rows[0]["shots"] == ""


def test_cli_sample_with_overrides(tmp_path, capsys):
    path = write(tmp_path, config(sample={"shots": 10, "seed": 1}))
    assert main(["sample", path, "--shots", "5000", "--seed", "3"]) == 0
    row = next(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert sum(int(row[f"n_{k}"]) for k in ("alpha_gamma", "alpha_delta", "beta_gamma", "beta_delta")) == 5000


def test_cli_duality(tmp_path, capsys):
    cfg = config(setup={"S4": {"R": 0.5}})
    assert main(["duality", write(tmp_path, cfg), "--format", "json"]) == 0
    recs = json.loads(capsys.readouterr().out)
    assert len(recs) == 4
    for r in recs:
        assert r["sum_of_squares"] == pytest.approx(1.0, abs=1e-12)


def test_cli_duality_dephased(tmp_path, capsys):
    cfg = config(setup={"S4": {"R": 0.5}, "delta_phi": 1.5707963267948966},
                 duality={"leads": ["alpha", "gamma"], "dephasing": {"sigma": 1.0, "ensemble": 2000}})
    assert main(["duality", write(tmp_path, cfg), "--format", "json"]) == 0
    recs = json.loads(capsys.readouterr().out)
    assert all(r["source"] == "dephased" for r in recs)


def test_cli_verify_oracle(capsys):
    assert main(["verify-oracle", "--setups", "50", "--seed", "2"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows and all(r["passed"] == "true" for r in rows)


def test_cli_verify_oracle_fails_on_impossible_tolerance(capsys):
    assert main(["verify-oracle", "--setups", "20", "--tol", "1e-30"]) == 3


def test_cli_config_error_exit_code(tmp_path, capsys):
    path = write(tmp_path, config(setup={"S3": {"R": 1.2}}))
    assert main(["eval", path]) == 2
    assert "setup.S3.R" in capsys.readouterr().err


def test_cli_numeric_error_exit_code(tmp_path, capsys):
    cfg = config(sweep={"parameter": "phi_d", "start": 0, "stop": 1, "points": 2})
    assert main(["sweep", write(tmp_path, cfg)]) == 3


def test_cli_io_error_exit_code(tmp_path, capsys):
    assert main(["eval", str(tmp_path / "missing.json")]) == 4
    path = write(tmp_path, config())
    assert main(["eval", path, "--out", str(tmp_path / "no" / "dir" / "x.csv")]) == 4


def test_cli_help_mentions_units(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert "radians" in capsys.readouterr().out


def test_cli_reproducible_bytes(tmp_path):
    cfg = config(sweep={"parameter": "phi", "start": 0, "stop": 6, "points": 8, "shots": 20000},
                 sample={"shots": 0, "seed": 99})
    path = write(tmp_path, cfg)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", path, "--out", str(a)]) == 0
    assert main(["sweep", path, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
