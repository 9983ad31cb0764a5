import json

import pytest
from reference import TABLE_COMPATIBLE, vec

from pilotreuse import ConfigurationError, FadingParams, build_curve, build_lattice, estimate_depth_rates
from pilotreuse.assignment import net_argmax_grid
from pilotreuse.cli import EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, main
from pilotreuse.config import OUT_ENV, RunConfig, build_config, read_config_file
from pilotreuse.csvio import (
    read_assignment_table,
    read_curve,
    read_rate_table,
    sweep_rows,
    write_assignment_table,
    write_curve,
    write_rate_table,
)


@pytest.fixture(scope="module")
def small_table():
    return estimate_depth_rates(build_lattice(4, 1600.0), FadingParams(), trials=500, seed=1)


def test_rate_table_roundtrip(small_table, tmp_path):
    path = write_rate_table(small_table, tmp_path / "r.csv")
    text = path.read_text()
    assert text.startswith("# params: gamma=3.8 shadow_sigma_db=8.0")
    assert "depth,rate_bits,stderr,trials,seed" in text
    assert read_rate_table(path) == small_table
    again = write_rate_table(read_rate_table(path), tmp_path / "r2.csv")
    assert again.read_bytes() == path.read_bytes()


def test_sweep_rows():
    grid = list(range(1, 201))
    rows = sweep_rows(grid, net_argmax_grid(grid, [float(c) for c in TABLE_COMPATIBLE], 81, 1))
    assert [str(r[2]) for r in rows][:2] == ["(1,0,0,0)", "(0,3,0,0)"]
    assert rows[0][:2] == (1, 6) and rows[-1][1] is None and rows[-1][3] == 27
    assert len(rows) == 14


def test_assignment_table_roundtrip(tmp_path):
    rows = [(1, 6, vec((1, 0, 0, 0)), 1), (7, None, vec((0, 3, 0, 0)), 3)]
    path = write_assignment_table(rows, tmp_path / "t.csv", ["# note"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# note"
    assert "ncoh_range_start,ncoh_range_end,p_vector,npil" in lines
    assert lines[-1] == '7,,"(0,3,0,0)",3'
    assert read_assignment_table(path) == rows


def test_curve_roundtrip(tmp_path):
    curve = build_curve("optimal", "c_net_per_user", [2, 4, 6], 2, [float(c) for c in TABLE_COMPATIBLE])
    path = write_curve(curve, tmp_path / "c.csv")
    rows = read_curve(path)
    assert list(rows[0]) == ["scheme", "K", "x_semantics", "x", "value", "npil"]
    assert [float(r["value"]) for r in rows] == list(curve.values)
    assert {r["x_semantics"] for r in rows} == {"ncoh_per_user"}


def test_config_layers(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ngamma = 4.0\nk=2  # users\nschemes = optimal, full_reuse\nsigma_db = 6\n")
    values = read_config_file(cfg)
    config = build_config(values, {"k": 3, "trials": None})
    assert config.k == 3 and config.params.gamma == 4.0 and config.params.shadow_sigma_db == 6.0
    assert config.schemes == ("optimal", "full_reuse")
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env-out"))
    assert str(RunConfig().out) == str(tmp_path / "env-out")


def test_config_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        build_config({"colour": "red"})
    with pytest.raises(ConfigurationError):
        build_config({}, {"m": 3})
    with pytest.raises(ConfigurationError):
        build_config({}, {"schemes": "optimal,greedy"})
    with pytest.raises(ConfigurationError):
        build_config({"k": "two"})
    bad = tmp_path / "bad.cfg"
    bad.write_text("gamma 3.8\n")
    with pytest.raises(ConfigurationError):
        read_config_file(bad)


def test_cache_key_tracks_inputs():
    a = RunConfig()
    assert a.rate_cache_key() == RunConfig().rate_cache_key()
    assert a.rate_cache_key() != build_config({}, {"seed": 1}).rate_cache_key()
    assert a.rate_cache_key() != build_config({}, {"gamma": 4.0}).rate_cache_key()


def _run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path), "--trials", "2000", "--seed", "3"])


def test_cli_pipeline(tmp_path, capsys):
    assert _run(tmp_path, "table") == EXIT_CONFIG  # no rate table yet
    assert "run `pilotreuse rates`" in capsys.readouterr().err
    assert _run(tmp_path, "rates") == EXIT_OK
    rates = list(tmp_path.glob("rates_*.csv"))
    assert len(rates) == 1
    assert _run(tmp_path, "table", "--k", "2") == EXIT_OK
    rows = read_assignment_table(tmp_path / "table_K2.csv", 2)
    assert rows[0][2] == vec((2, 0, 0, 0), 2) and rows[-1][2] == vec((0, 0, 0, 54), 2)
    capsys.readouterr()
    assert _run(tmp_path, "optimal", "--ncoh", "40") == EXIT_OK
    answer = json.loads(capsys.readouterr().out)
    assert answer["closed_form_matches"] and answer["npil"] >= 1
    assert _run(tmp_path, "curves", "--schemes", "optimal,random", "--curve-trials", "200",
                "--ncoh-max", "30", "--semantics", "c_net,c_net_per_ncoh") == EXIT_OK
    assert len(list(tmp_path.glob("curve_*_K1.csv"))) == 4


def test_cli_outputs_are_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert _run(out, "rates") == EXIT_OK
        assert _run(out, "table") == EXIT_OK
        assert _run(out, "curves", "--curve-trials", "100", "--ncoh-max", "20") == EXIT_OK
    assert _run(b, "rates", "--workers", "4") == EXIT_OK
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_cli_errors(tmp_path, capsys):
    assert main(["table", "--m", "3", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["optimal", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["rates", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG
    with pytest.raises(SystemExit):
        main(["bogus"])


def test_cli_verify(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["passed"] and report["runtime_seconds"] < 60
    # a non-increasing table must be caught
    (tmp_path / "bad.csv").write_text(
        "depth,rate_bits,stderr,trials,seed\n0,5.0,0,1,0\n1,4.0,0,1,0\n2,6.0,0,1,0\n3,7.0,0,1,0\n")
    assert main(["verify", "--out", str(tmp_path), "--rates", str(tmp_path / "bad.csv")]) == EXIT_VERIFY
