import csv
import io
import math

import numpy as np
import pytest

from hapnet import analytic as an
from hapnet.cli import main, parse_grid
from hapnet.config import (
    NetworkConfig, config_from_mapping, dump_config, parse_config, parse_overrides, parse_value,
)
from hapnet.errors import ConfigError


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.yaml"
    p.write_text("")
    cfg = parse_config(p)
    assert cfg == NetworkConfig()
    assert (cfg.P_h, cfg.P_g, cfg.P_n, cfg.lambda_g, cfg.epsilon, cfg.m) == (50.0, 20.0, 1e-9, 3e-5, 0.1, 2)
    assert cfg.theta_3db == pytest.approx(math.radians(40))


def test_override_recomputes_t():
    cfg = parse_config(None, ["h=30km"])
    assert cfg.h == 30e3
    assert cfg.t == pytest.approx(math.acos(cfg.a / (cfg.a + 30e3)))


@pytest.mark.parametrize("pair,key", [("m=2.5", "m"), ("bogus=1", "bogus"), ("h=5parsec", "h"),
                                      ("lambda_h=-1", "lambda_h"), ("delta_h=30km", "delta_h"),
                                      ("theta_3db=200deg", "theta_3db"), ("antenna=pencil", "antenna")])
def test_bad_values_name_the_key(pair, key):
    with pytest.raises(ConfigError) as info:
        parse_config(None, [pair])
    assert info.value.key == key


def test_units():
    assert parse_value("h", "20 km") == 20e3
    assert parse_value("P_h", "47dBm") == pytest.approx(10 ** 1.7)
    assert parse_value("P_g", "13dBW") == pytest.approx(10 ** 1.3)
    assert parse_value("lambda_g", "30/km2") == pytest.approx(3e-5)
    assert parse_value("theta_3db", 40) == pytest.approx(math.radians(40))
    assert parse_value("theta_3db", "0.5rad") == 0.5
    assert parse_value("epsilon", "-10dB") == pytest.approx(0.1)
    assert parse_value("x0", "null") is None
    assert parse_overrides(["m=3", "r_b=5km"]) == {"m": 3, "r_b": 5000.0}


def test_schema_version():
    with pytest.raises(ConfigError):
        config_from_mapping({"schema": 2})
    assert config_from_mapping({"schema": 1, "h": "40km"}).h == 40e3


def test_yaml_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("schema: 1\nh: 30km\nlambda_h: 2e-10\ntheta_3db: 30deg\nantenna: directional\n")
    cfg = parse_config(p, ["m=1"])
    assert (cfg.h, cfg.lambda_h, cfg.antenna, cfg.m) == (30e3, 2e-10, "directional", 1)
    assert cfg.theta_3db == pytest.approx(math.radians(30))


@pytest.mark.parametrize("overrides", [[], ["h=35km", "theta_3db=33.3", "x0=21km", "delta_h=2km"]])
def test_dump_round_trip(tmp_path, overrides):
    cfg = parse_config(None, overrides)
    p = tmp_path / "dump.yaml"
    p.write_text(dump_config(cfg))
    again = parse_config(p)
    assert again == cfg and again.config_hash() == cfg.config_hash()


def test_dump_annotates_origins():
    text = dump_config(NetworkConfig())
    assert "P_h: 50.0W  # reference default: 50 W" in text
    assert text.startswith("schema: 1\n")


def test_hash_changes_with_values():
    assert NetworkConfig().config_hash() != NetworkConfig(h=30e3).config_hash()
    assert len(NetworkConfig().config_hash()) == 16


# -- command line ------------------------------------------------------------

def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_grid():
    assert parse_grid("height", "20e3:5e3:50e3") == [20e3 + 5e3 * i for i in range(7)]
    assert parse_grid("height", "20km:10km:40km") == [20e3, 30e3, 40e3]
    assert parse_grid("density", "1e-11,1e-10") == [1e-11, 1e-10]
    with pytest.raises(ConfigError):
        parse_grid("height", "1:2")


def test_print_config_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "coverage", "--set", "h=45km", "--print-config")
    assert code == 0
    p = tmp_path / "c.yaml"
    p.write_text(out)
    assert parse_config(p).config_hash() == NetworkConfig(h=45e3).config_hash()


def test_sweep_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "height", "--grid", "20e3:5e3:50e3",
                       "--methods", "approx,mc", "--trials", "100", "--seed", "4")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["sweep_axis", "value", "method", "coverage", "ci95", "seed", "config_hash"]
    assert len(table) == 14
    assert [r["method"] for r in table[:2]] == ["approximate", "mc"]
    assert {r["seed"] for r in table} == {"4"}
    assert table[0]["config_hash"] == NetworkConfig().config_hash()
    assert float(table[0]["coverage"]) == pytest.approx(an.coverage_hap_approx(NetworkConfig()).value, abs=1e-12)


def test_rows_reproducible(capsys, tmp_path):
    args = ["coverage", "--methods", "mc", "--trials", "150", "--seed", "11", "--scenario", "bs_dir"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["-o", str(out1)]) == 0
    assert main(args + ["-o", str(out2), "--threads", "2"]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_capacity_sweep(capsys):
    code, out, err = run(capsys, "capacity", "--sweep", "density")
    assert code == 0
    table = rows(out)
    assert len(table) == 200
    cap = np.array([float(r["capacity"]) for r in table])
    lam = np.array([float(r["value"]) for r in table])
    assert np.count_nonzero(np.diff(np.sign(np.diff(cap)))) == 1
    lo, hi = an.optimal_density_bounds(NetworkConfig())
    assert lo <= lam[np.argmax(cap)] <= hi
    assert "argmax" in err


def test_exit_codes(capsys):
    assert run(capsys, "coverage", "--set", "m=2.5")[0] == 2
    assert run(capsys, "coverage", "--config", "/nonexistent/file.yaml")[0] == 2
    assert run(capsys, "coverage", "--scenario", "hap_plane_baseline")[0] == 2
    assert run(capsys, "coverage", "--set", "m=3", "--methods", "exact")[0] == 2
    assert run(capsys, "optimal-density", "--constraint", "--set", "kappa=0.9")[0] == 4
    code, out, _ = run(capsys, "optimal-density", "--constraint", "--set", "kappa=0.885")
    assert code == 0 and rows(out)[0]["constraint_active"] == "true"


def test_validate_passes(capsys):
    code, out, _ = run(capsys, "validate", "--scenario", "bs_omni", "--trials", "300")
    assert code == 0 and rows(out)[0]["passed"] == "pass"


def test_validate_detects_breach(monkeypatch, capsys):
    from hapnet import validation
    monkeypatch.setitem(validation.ANALYTIC_REFERENCE, "bs_omni",
                        lambda cfg: an.CoverageResult(0.1, an.EXACT))
    code, out, err = run(capsys, "validate", "--scenario", "bs_omni", "--trials", "300")
    assert code == 3 and rows(out)[0]["passed"] == "fail" and "bs_omni" in err


def test_sample_points(capsys):
    code, out, _ = run(capsys, "sample-points", "--seed", "3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "tier,param1,param2,param3,x,y,z"
    tiers = {l.split(",")[0] for l in lines[1:]}
    assert tiers == {"HAP", "BS"}
    assert main(["sample-points", "--seed", "3", "--tiers", "hap"]) == 0
