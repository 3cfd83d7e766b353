"""Command-line interface: parsing, emission, determinism, exit codes."""
import json
import math
import os

import numpy as np
import pytest

from taperspec.cli import (CSV_COLUMNS, dump_json, format_float, main,
                           parse_config, parse_config_dict, report)
from taperspec.montecarlo import config_to_dict, run_suite


def write_config(tmp_path, payload, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


# --- serialization -----------------------------------------------------------


def test_format_float_17_digits():
    x = 1.0 / 3.0
    assert format_float(x) == "0.33333333333333331"
    assert float(format_float(x)) == x          # round-trips exactly
    assert format_float(2.0) == "2"
    assert format_float(float("nan")) == "null"
    assert format_float(float("inf")) == "null"


def test_dump_json_scalars_and_nesting():
    out = dump_json({"a": [1, 2.5, True, None], "b": {"c": "x"}})
    parsed = json.loads(out)
    assert parsed == {"a": [1, 2.5, True, None], "b": {"c": "x"}}


def test_dump_json_handles_numpy_types():
    out = dump_json({"f": np.float64(0.1), "i": np.int64(3),
                     "b": np.bool_(True)})
    assert json.loads(out) == {"f": 0.1, "i": 3, "b": True}


def test_dump_json_rejects_unknown():
    with pytest.raises(TypeError):
        dump_json({"x": object()})


# --- config parsing ----------------------------------------------------------


def test_parse_config_minimal_defaults(tmp_path):
    cfg = parse_config(write_config(tmp_path, {}))
    assert cfg.suite == "convergence"
    assert cfg.model.family == "gaussian_white"
    assert cfg.taper.kind == "rectangular"
    assert [p.label for p in cfg.phis] == ["one"]
    assert cfg.ks == (1,)
    assert cfg.T_sweep == (64,)
    assert cfg.R == 1000
    assert cfg.base_seed == 0
    assert cfg.grid_N is None                    # default 2(2T+1) downstream


def test_parse_config_unknown_top_level_key(tmp_path):
    path = write_config(tmp_path, {"taperr": "cosine"})
    with pytest.raises(ValueError, match="taperr"):
        parse_config(path)


def test_parse_config_unknown_model_key(tmp_path):
    path = write_config(tmp_path, {"model": {"family": "ar1", "rh": 0.5}})
    with pytest.raises(ValueError, match="rh"):
        parse_config(path)


def test_parse_config_small_R_names_the_constraint(tmp_path):
    path = write_config(tmp_path, {"R": 50})
    with pytest.raises(ValueError, match="R ≥ 100"):
        parse_config(path)


def test_parse_config_bad_innovations(tmp_path):
    path = write_config(tmp_path, {
        "model": {"family": "linear", "innovations": "cauchy"}})
    with pytest.raises(ValueError, match="cauchy"):
        parse_config(path)


def test_parse_config_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ValueError, match="not valid JSON"):
        parse_config(str(p))


def test_parse_config_thresholds_shape():
    with pytest.raises(ValueError, match="normality_thresholds"):
        parse_config_dict({"normality_thresholds": [0.1]})


def test_config_round_trip():
    raw = {"suite": "normality", "model": {"family": "ar1", "rho": 0.3},
           "taper": "cosine", "phis": ["one", "cos:1"], "ks": [1, 2],
           "T_sweep": [16, 32], "R": 250, "base_seed": 9}
    cfg = parse_config_dict(raw)
    echoed = config_to_dict(cfg)
    again = parse_config_dict(echoed)
    assert config_to_dict(again) == echoed


# --- report emission ---------------------------------------------------------


@pytest.fixture()
def small_report():
    cfg = parse_config_dict({"T_sweep": [8, 16], "R": 120, "base_seed": 2})
    return run_suite(cfg)


def test_report_writes_all_files(tmp_path, small_report):
    manifest = report([small_report], str(tmp_path))
    for name in ("report.csv", "summary.json", "report_raw.json",
                 "manifest.json"):
        assert (tmp_path / name).exists()
    header = (tmp_path / "report.csv").read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)
    assert manifest.pass_flags
    assert manifest.to_dict()["outputs"] == [
        "report.csv", "summary.json", "report_raw.json", "manifest.json"]


def test_report_requires_nonempty_list(tmp_path):
    with pytest.raises(ValueError):
        report([], str(tmp_path))


def test_report_rerun_is_byte_identical(tmp_path, small_report, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    report([small_report], str(tmp_path / "a"))
    report([small_report], str(tmp_path / "b"))
    for name in ("report.csv", "summary.json", "report_raw.json",
                 "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


# --- subcommands -------------------------------------------------------------


def test_periodogram_subcommand(tmp_path):
    rc = main(["periodogram", "--T", "8", "--seed", "3",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "periodogram.csv").read_text().splitlines()
    assert lines[0] == "lambda,re_d,im_d,I"
    assert len(lines) == 1 + 2 * (2 * 8 + 1)    # default grid 2(2T+1)


def test_periodogram_fourier_flag(tmp_path):
    rc = main(["periodogram", "--T", "6", "--fourier",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "periodogram.csv").read_text().splitlines()
    assert len(lines) == 1 + (2 * 6 + 1)


def test_estimate_subcommand(tmp_path):
    rc = main(["estimate", "--T", "8", "--k", "1", "2", "--phi", "one",
               "--replicates", "3", "--out-dir", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "estimate.csv").read_text().splitlines()
    assert lines[0] == "replicate,k,phi,value"
    assert len(lines) == 1 + 3 * 2


def test_asymptotics_subcommand(tmp_path):
    rc = main(["asymptotics", "--model", "ar1", "--rho", "0.5",
               "--taper", "cosine", "--k", "1", "2",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    data = json.loads((tmp_path / "asymptotics.json").read_text())
    assert data["e_h"] == pytest.approx(0.75, abs=1e-8)
    assert data["mean_limit"][0] == pytest.approx(4 / 3, rel=1e-6)
    W = np.array(data["cov_matrix_re"])
    assert W.shape == (2, 2)
    assert W[0, 1] == pytest.approx(W[1, 0], rel=1e-12)
    assert any(c["which"] == "thm6_clt" for c in data["exponent_checks"])


def test_oracle_subcommand(tmp_path):
    rc = main(["oracle", "--T", "6", "--k", "1", "--l", "1",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    data = json.loads((tmp_path / "oracle.json").read_text())
    assert data["exact_mean"]["k"] == pytest.approx(1.0, rel=1e-10)
    # white + rectangular: var J_1(1) = 2/(2T+1)
    assert data["exact_cov_re"] == pytest.approx(2.0 / 13.0, rel=1e-10)
    assert data["pairing_counts"]["indecomposable_table"] == 2


def test_mc_subcommand_and_exit_codes(tmp_path):
    cfg = write_config(tmp_path, {"T_sweep": [8, 16], "R": 120,
                                  "base_seed": 4})
    out = tmp_path / "run"
    rc = main(["mc", "--config", cfg, "--out-dir", str(out)])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["all_passed"] is True


def test_mc_failing_suite_exits_nonzero(tmp_path):
    # normality thresholds of zero cannot be met by a finite sample
    cfg = write_config(tmp_path, {
        "suite": "normality", "T_sweep": [8], "R": 120,
        "normality_thresholds": [0.0, 0.0]})
    rc = main(["mc", "--config", cfg, "--out-dir", str(tmp_path / "run")])
    assert rc == 1


def test_mc_requires_config(tmp_path):
    assert main(["mc", "--out-dir", str(tmp_path)]) == 2


def test_mc_byte_identical_across_worker_counts(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, {"T_sweep": [8, 16], "R": 150,
                                  "base_seed": 6})
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1690000000")
    monkeypatch.setenv("TAPERSPEC_THREADS", "1")
    main(["mc", "--config", cfg, "--out-dir", str(tmp_path / "w1")])
    monkeypatch.setenv("TAPERSPEC_THREADS", "5")
    main(["mc", "--config", cfg, "--out-dir", str(tmp_path / "w5")])
    for name in ("report.csv", "summary.json", "report_raw.json",
                 "manifest.json"):
        assert (tmp_path / "w1" / name).read_bytes() == \
            (tmp_path / "w5" / name).read_bytes()


def test_report_subcommand_reloads(tmp_path):
    cfg = write_config(tmp_path, {"T_sweep": [8], "R": 120})
    main(["mc", "--config", cfg, "--out-dir", str(tmp_path / "orig")])
    rc = main(["report", str(tmp_path / "orig" / "report_raw.json"),
               "--out-dir", str(tmp_path / "again")])
    assert rc == 0
    assert (tmp_path / "orig" / "report.csv").read_bytes() == \
        (tmp_path / "again" / "report.csv").read_bytes()


def test_report_subcommand_missing_file(tmp_path):
    rc = main(["report", str(tmp_path / "nope.json"),
               "--out-dir", str(tmp_path)])
    assert rc == 2


def test_unknown_weight_spec_fails_cleanly(tmp_path):
    rc = main(["estimate", "--T", "4", "--phi", "gauss",
               "--out-dir", str(tmp_path)])
    assert rc == 2
