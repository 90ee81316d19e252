import csv
import json
import math

import numpy as np
import pytest

from qoptml import __version__, bounds
from qoptml.cli import main
from qoptml.core_model import DetectorEfficiency, GaussianState
from qoptml.experiments import (
    DEFAULTS,
    ConfigError,
    ScenarioConfig,
    run,
    run_fig1,
    run_fig2_fig4,
    run_fig3,
    run_fig5,
    run_onoff,
)
from qoptml.measurement_sim import RngSeed, sample_homodyne


def _rows(report):
    return list(csv.DictReader(report.csv_text().splitlines()))


# --- configuration ----------------------------------------------------------

def test_config_text_round_trip():
    cfg = ScenarioConfig("fig2", 42, "out", {"eta": "0.8", "sq_fractions": "0,0.25,0.5"})
    again = ScenarioConfig.from_text(cfg.to_text())
    assert again.params == cfg.params and again.seed == 42 and again.scenario == "fig2"
    assert again.config_hash() == cfg.config_hash()


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# demo\nscenario = fig1\nn_samples = 1000\neta = 0.9  # detector\n")
    cfg = ScenarioConfig.load(path, ["eta=0.7"], seed=5)
    assert cfg["n_samples"] == 1000 and cfg["eta"] == 0.7 and cfg.seed == 5


def test_hash_ignores_output_directory():
    a = ScenarioConfig("fig3", 1, "a")
    b = ScenarioConfig("fig3", 1, "b")
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != ScenarioConfig("fig3", 2, "a").config_hash()


@pytest.mark.parametrize(
    "scenario,params",
    [
        ("figX", {}),
        ("fig1", {"bogus": "1"}),
        ("fig1", {"eta": "1.5"}),
        ("fig1", {"eta": "abc"}),
        ("fig1", {"convention": "weird"}),
        ("fig5", {"sq_fraction": "1.0"}),
        ("onoff", {"replicas": "0"}),
    ],
)
def test_config_errors(scenario, params):
    with pytest.raises(ConfigError):
        ScenarioConfig(scenario, 0, "o", params)


def test_config_rejects_bad_line():
    with pytest.raises(ConfigError):
        ScenarioConfig.from_text("scenario = fig1\nthis line has no equals\n")


def test_fig5_default_grid_spans_range():
    grid = DEFAULTS["fig5"]["eta_values"]
    assert len(grid) >= 10 and min(grid) == 0.05 and max(grid) == 1.0


# --- scenarios at reduced size ---------------------------------------------

def test_fig1_csv_layout(tmp_path):
    rep = run_fig1(ScenarioConfig("fig1", 3, str(tmp_path), {"n_samples": 20000, "n_starts": 2}))
    rows = _rows(rep)
    assert list(rows[0]) == ["n", "p_theory", "p_reconstructed", "abs_error"]
    assert [int(r["n"]) for r in rows] == list(range(31))
    path = rep.write()
    report = json.loads((tmp_path / "fig1_report.json").read_text())
    assert report["seed"] == 3 and report["version"] == __version__
    assert report["config_hash"] == rep.config.config_hash()
    assert path.read_text() == rep.csv_text()


def test_fig1_more_data_smaller_errors():
    base = run_fig1(ScenarioConfig("fig1", 7))
    more = run_fig1(ScenarioConfig("fig1", 7, params={"eta": 1.0, "n_samples": 200000}))
    assert more.summary["max_abs_error"] < base.summary["max_abs_error"]


def test_fig1_theory_column_normalizes_with_enough_terms():
    rep = run_fig1(ScenarioConfig("fig1", 3, params={"n_samples": 5000, "n_starts": 1, "n_max": 1500}))
    assert rep.summary["p_theory_sum"] == pytest.approx(1.0, abs=1e-6)


def test_csv_uses_17_significant_digits():
    rep = run_onoff(ScenarioConfig("onoff", 1, params={"replicas": 5, "alpha_sq_values": "1"}))
    for row in _rows(rep):
        for key in ("eta_hat_mean", "crlb_std_general"):
            v = row[key]
            assert float(format(float(v), ".17g")) == float(v)
            assert v == format(float(v), ".17g")


def test_fig2_zero_squeezing_point():
    cfg = ScenarioConfig("fig2", 9, params={"sq_fractions": "0", "replicas": 300})
    row = _rows(run_fig2_fig4(cfg))[0]
    coherent = bounds.phase_crlb_coherent(50, 5000)
    # fixed-phase readout of the full amplitude: a factor sqrt(2) below the random-phase bound
    assert float(row["sigma_psi_crlb"]) == pytest.approx(coherent / math.sqrt(2), rel=1e-12)
    assert float(row["sigma_psi_mc"]) == pytest.approx(coherent / math.sqrt(2), rel=0.15)


def test_fig3_theory_large_n_and_sample_scaling():
    cfg = ScenarioConfig("fig3", 4, params={"n_values": "100,1000", "replicas": 20})
    rows = _rows(run_fig3(cfg))
    for r in rows:
        n = float(r["n"])
        assert float(r["sigma_psi_theory"]) == pytest.approx(1 / (2 * math.sqrt(5000) * n), rel=2 / n)
    doubled = _rows(run_fig3(ScenarioConfig("fig3", 4, params={"n_values": "100,1000", "replicas": 20,
                                                                "n_samples": 10000})))
    for a, b in zip(rows, doubled):
        assert float(a["sigma_psi_theory"]) / float(b["sigma_psi_theory"]) == pytest.approx(math.sqrt(2))


def test_fig5_unit_efficiency_huge_sample():
    cfg = ScenarioConfig("fig5", 5, params={"eta_values": "1", "blocks": 2, "block_size": 500000})
    rows = {r["method"]: r for r in _rows(run_fig5(cfg))}
    assert float(rows["ml"]["block_mean_ratio"]) == pytest.approx(1.0, abs=2e-3)
    assert float(rows["naive"]["block_mean_ratio"]) == pytest.approx(1.0, abs=2e-2)


def test_onoff_saturation_is_counted():
    cfg = ScenarioConfig("onoff", 2, params={"alpha_sq_values": "12", "n_samples": 1000, "replicas": 50,
                                             "eta_true": 0.7})
    row = _rows(run_onoff(cfg))[0]
    assert 0 < float(row["saturated_rate"]) < 1


def test_onoff_bias_decreases_with_sample_size():
    bias = []
    for n in (1000, 100000):
        cfg = ScenarioConfig("onoff", 3, params={"alpha_sq_values": "3", "n_samples": n, "replicas": 2000})
        bias.append(abs(float(_rows(run_onoff(cfg))[0]["eta_hat_mean"]) - 0.7))
    assert bias[1] < bias[0]


@pytest.mark.parametrize(
    "scenario,params",
    [
        ("fig1", {"n_samples": 3000, "n_starts": 2}),
        ("fig2", {"replicas": 3, "sq_fractions": "0,0.5"}),
        ("fig3", {"replicas": 3, "n_values": "1,10"}),
        ("fig4", {"replicas": 3, "sq_fractions": "0,0.5"}),
        ("fig5", {"blocks": 3, "block_size": 20, "eta_values": "0.2,0.9"}),
        ("onoff", {"replicas": 5}),
        ("hamiltonian-id", {"n_samples": 3000, "blocks": 2}),
    ],
)
def test_scenarios_are_byte_identical(scenario, params):
    a = run(ScenarioConfig(scenario, 11, params=dict(params))).csv_text()
    b = run(ScenarioConfig(scenario, 11, params=dict(params))).csv_text()
    assert a == b
    c = run(ScenarioConfig(scenario, 12, params=dict(params))).csv_text()
    assert c.splitlines()[0] == a.splitlines()[0]


# --- command line -----------------------------------------------------------

def test_cli_reproduce(tmp_path, capsys):
    rc = main(["reproduce", "--figure", "2", "--set", "replicas=5", "--set", "sq_fractions=0,0.5",
               "--seed", "3", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "fig2.csv").exists() and (tmp_path / "fig2_report.json").exists()
    assert "wrote" in capsys.readouterr().out


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "onoff.cfg"
    cfg.write_text("replicas = 4\nalpha_sq_values = 0.5,1\n")
    assert main(["onoff", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert len((tmp_path / "onoff.csv").read_text().splitlines()) == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["reproduce", "--figure", "1", "--set", "eta=0"],
        ["reproduce", "--figure", "1", "--set", "nonsense=1"],
        ["reproduce", "--figure", "1", "--config", "/nonexistent/file.cfg"],
        ["fit-gaussian", "--input", "/nonexistent.csv"],
    ],
)
def test_cli_config_errors(argv, tmp_path):
    assert main(argv + (["--out", str(tmp_path)] if argv[0] == "reproduce" else [])) == 3


def test_cli_fit_gaussian(tmp_path, capsys):
    path = tmp_path / "rec.csv"
    assert main(["simulate", "--output", str(path), "--n", "20000", "--eta", "0.8", "--seed", "4"]) == 0
    capsys.readouterr()
    assert main(["fit-gaussian", "--input", str(path), "--eta", "0.8"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["converged"] and out["estimate"]["r"] == pytest.approx(math.asinh(math.sqrt(3)), abs=0.1)


def test_cli_estimation_failure(tmp_path):
    # one probe cannot identify a Hamiltonian: exit code 2
    assert main(["hamiltonian-id", "--set", "n_probes=1", "--set", "n_samples=500", "--out", str(tmp_path)]) == 2


def test_cli_fit_degenerate_data_fails(tmp_path):
    path = tmp_path / "flat.csv"
    sample_homodyne(GaussianState(), DetectorEfficiency(), 400, RngSeed(1, 0), phase=0.0).to_csv(path)
    assert main(["fit-gaussian", "--input", str(path)]) == 2
