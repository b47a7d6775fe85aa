import json
import math
from pathlib import Path

import numpy as np
import pytest

from dissipative_rmt import cli, runner
from dissipative_rmt.analytic import p2d
from dissipative_rmt.eigensolver import ConvergenceError
from dissipative_rmt.ensembles import EnsembleSpec, sample_crossover, sample_symmetric
from dissipative_rmt.numcore import RngStream
from dissipative_rmt.runner import ConfigError, ExperimentConfig

SMALL_TABLE = {"seed": 3, "rmt_n": 40, "rmt_samples": 6, "dqkr_n": 61, "dqkr_samples": 2,
               "alpha_d": 0.004}


def _write(path: Path, obj) -> str:
    path.write_text(json.dumps(obj))
    return str(path)


def _read_all(prefix_dir: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(prefix_dir.iterdir())}


# --------------------------------------------------------------------------
# config validation


def test_seed_is_mandatory():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({"kind": "analytic-curve", "parameters": {"beta": 2}})
    assert info.value.field == "parameters.seed"


@pytest.mark.parametrize("params, field", [
    ({"beta": 3, "n": 10, "samples": 2}, "parameters.beta"),
    ({"beta": 1, "n": 2, "samples": 2}, "parameters.n"),
    ({"beta": 1, "n": 10, "samples": 0}, "parameters.samples"),
    ({"beta": 1, "n": 10, "samples": 2, "bulk": 1.5}, "parameters.bulk"),
    ({"beta": 1, "n": 10, "samples": 2, "colour": 1}, "parameters.colour"),
])
def test_field_level_errors(params, field):
    params = dict(params, seed=1)
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({"kind": "ensemble-largeN", "parameters": params})
    assert info.value.field == field


def test_unknown_kind_and_rotor_parity():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"kind": "nope", "parameters": {"seed": 1}})
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({"kind": "dqkr", "parameters": {"seed": 1, "n": 100}})
    assert info.value.field == "parameters.n"


def test_table_rows_restricted():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"kind": "table1", "parameters": {"seed": 1, "rows": ["rmt-0.9"]}})


def test_row_parameters():
    assert runner.row_parameter("rmt-0.9", 300) == pytest.approx(0.9 / math.sqrt(300))
    assert runner.row_parameter("rmt-1", 300) == 1.0
    assert runner.row_parameter("dqkr-8", 501) == pytest.approx(8 / 501**1.5)
    assert runner.row_parameter("dqkr-0.7", 501) == 0.7


def test_reference_rows():
    assert runner.TABLE2_REFERENCE["rmt-0"] == (1.0, 0.1103, 1.3986, 0.0869)
    assert runner.TABLE2_REFERENCE["rmt-1.5"] == (1.0, 0.0929, 1.3727, 0.0713)
    assert runner.TABLE1_REFERENCE["rmt-1"] == (0.7371, 3.5415e-2, 0.9086, 2.6857e-2)


def test_crossover_zero_replays_symmetric_sampler():
    # same stream, same matrix: crossover rows at alpha = 0 are the beta = 1 ensemble
    for i in range(3):
        a = sample_crossover(EnsembleSpec(1, 9, alpha=0.0), RngStream(7, i))
        b = sample_symmetric(EnsembleSpec(1, 9), RngStream(7, i))
        assert np.array_equal(a, b)


# --------------------------------------------------------------------------
# runs


def test_analytic_curve_csv(tmp_path):
    cfg = ExperimentConfig.from_dict({"kind": "analytic-curve",
                                      "parameters": {"beta": 2, "seed": 0},
                                      "outputs": str(tmp_path / "c")})
    payload = runner.run(cfg)
    assert set(payload) >= {"config", "results", "reference", "deviation", "runtime_seconds"}
    data = np.loadtxt(tmp_path / "c_curve.csv", delimiter=",", skiprows=1)
    assert np.max(np.abs(data[:, 1] - p2d(data[:, 0], 2))) < 1e-12
    header = (tmp_path / "c_curve.csv").read_text().splitlines()[0]
    assert header == "s,density"


def test_csv_floats_round_trip(tmp_path):
    runner.write_csv(tmp_path / "x.csv", ["s", "density"], [(0.1, 1 / 3)])
    line = (tmp_path / "x.csv").read_text().splitlines()[1]
    assert line == "0.1,0.3333333333333333"


def test_ensemble_largeN_run(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "kind": "ensemble-largeN",
        "parameters": {"beta": 1, "n": 60, "samples": 8, "seed": 7},
        "outputs": str(tmp_path / "sym")})
    payload = runner.run(cfg)
    res = payload["results"]
    assert res["m0"] == pytest.approx(1.0)
    assert 0 < res["sigma0"] < 0.3
    assert res["row"] == "rmt-0"
    assert payload["reference"]["sigma0"] == 0.1103
    assert payload["deviation"]["sigma0"] == pytest.approx(abs(res["sigma0"] - 0.1103))
    assert res["ratios"]["retained_fraction"] == pytest.approx(0.87, abs=0.01)
    spec = np.loadtxt(tmp_path / "sym_spectrum_0000.csv", delimiter=",", skiprows=1)
    assert spec.shape == (60, 2)
    hist = (tmp_path / "sym_nn.csv").read_text().splitlines()
    assert hist[0] == "s,density"


def test_quaternion_run_collapses_pairs(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "kind": "ensemble-largeN",
        "parameters": {"beta": 4, "n": 30, "samples": 3, "seed": 1},
        "outputs": str(tmp_path / "q")})
    res = runner.run(cfg)["results"]
    assert res["pairing_fraction"] == 1.0
    assert res["support_radius"] == pytest.approx(2 * math.sqrt(30))
    spec = np.loadtxt(tmp_path / "q_spectrum_0000.csv", delimiter=",", skiprows=1)
    assert spec.shape == (30, 2)


def test_two_by_two_run(tmp_path):
    for beta, route in ((1, "matrix"), (4, "matrix"), (4, "mc")):
        cfg = ExperimentConfig.from_dict({
            "kind": "ensemble-2x2",
            "parameters": {"beta": beta, "samples": 2000, "seed": 2, "route": route},
            "outputs": str(tmp_path / f"b{beta}{route}")})
        res = runner.run(cfg)["results"]
        assert res["mean"] == pytest.approx(1.0)
    assert res["count"] == 2000


def test_dqkr_and_ratio_runs(tmp_path):
    params = {"n": 61, "samples": 2, "alpha_d": 0.004, "seed": 0, "gamma": 0.7}
    cfg = ExperimentConfig.from_dict({"kind": "dqkr", "parameters": params,
                                      "outputs": str(tmp_path / "d")})
    res = runner.run(cfg)["results"]
    assert res["alpha_d"] == 0.004 and res["row"] == "dqkr-0.7"
    assert 0 < res["retained_fraction"] < 1
    cfg = ExperimentConfig.from_dict({"kind": "ratio-test",
                                      "parameters": dict(params, system="dqkr"),
                                      "outputs": str(tmp_path / "r")})
    out = runner.run(cfg)
    assert 0 < out["results"]["ratios"]["type1_mean"] < 1
    assert out["reference"]["ratios"]["type1_mean"] == 0.7397


def test_tables_share_spectra(tmp_path):
    cfg = ExperimentConfig("table2", dict(SMALL_TABLE, rows=["rmt-0", "rmt-1", "dqkr-0"]),
                           str(tmp_path / "t2"))
    shared = runner.TableRunner(cfg.validated().parameters)
    t2 = runner.table2(cfg, runner=shared)
    assert set(t2["results"]) == {"rmt-0", "rmt-1", "dqkr-0"}
    assert t2["reference"]["rmt-1"]["sigma0"] == 0.0881
    cfg1 = ExperimentConfig("table1", dict(SMALL_TABLE, rows=["rmt-0"]), str(tmp_path / "t1"))
    t1 = runner.table1(cfg1, runner=shared)
    assert t1["results"]["rmt-0"]["type1_mean"] == \
        shared.table1_row("rmt-0")["type1_mean"]
    rows = (tmp_path / "t2_table2.csv").read_text().splitlines()
    assert rows[0].startswith("row,m0,sigma0,m1,sigma1,ref_m0")
    assert len(rows) == 4


# --------------------------------------------------------------------------
# CLI


def test_cli_exit_code_config(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"kind": "ensemble-largeN", "parameters": {"beta": 7}})
    assert cli.main(["spacings", "--config", cfg, "--seed", "1"]) == cli.EXIT_CONFIG
    assert "parameters.beta" in capsys.readouterr().err
    assert cli.main(["spacings", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    (tmp_path / "bad.json").write_text("{not json")
    assert cli.main(["gen", "--config", str(tmp_path / "bad.json")]) == cli.EXIT_CONFIG
    curve = _write(tmp_path / "k.json", {"kind": "analytic-curve", "parameters": {"beta": 1}})
    assert cli.main(["spacings", "--config", curve, "--seed", "1"]) == cli.EXIT_CONFIG


def test_cli_exit_code_convergence(tmp_path, monkeypatch, capsys):
    def stalled(m, opts=None, meta=None):
        raise ConvergenceError(0, 3, 30)

    monkeypatch.setattr(runner, "eigenvalues", stalled)
    cfg = _write(tmp_path / "c.json", {"kind": "ensemble-largeN",
                                       "parameters": {"beta": 2, "n": 4, "samples": 2}})
    code = cli.main(["gen", "--config", cfg, "--seed", "1", "--workers", "1",
                     "--out", str(tmp_path / "g")])
    assert code == cli.EXIT_CONVERGENCE
    assert "matrix 0" in capsys.readouterr().err


def test_cli_exit_code_io(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = _write(tmp_path / "c.json", {"kind": "analytic-curve", "parameters": {"beta": 0}})
    code = cli.main(["curve", "--config", cfg, "--seed", "1", "--out", str(blocker / "x")])
    assert code == cli.EXIT_IO


def test_cli_commands(tmp_path, capsys):
    base = {"beta": 2, "n": 40, "samples": 3}
    cfg = _write(tmp_path / "c.json", {"kind": "ensemble-largeN", "parameters": base})
    assert cli.main(["gen", "--config", cfg, "--seed", "5", "--workers", "1",
                     "--out", str(tmp_path / "g")]) == 0
    assert len(list(tmp_path.glob("g_spectrum_*.csv"))) == 3
    assert cli.main(["ratios", "--config", cfg, "--seed", "5", "--workers", "1",
                     "--out", str(tmp_path / "r")]) == 0
    summary = json.loads((tmp_path / "r_summary.json").read_text())
    assert "ratios" in summary["results"] and "sigma0" not in summary["results"]
    assert summary["config"]["parameters"]["seed"] == 5
    assert summary["runtime_seconds"] is None
    t = _write(tmp_path / "t.json", {"kind": "table1", "parameters": dict(SMALL_TABLE, rows=["rmt-1"])})
    assert cli.main(["table1", "--config", t, "--workers", "1", "--out", str(tmp_path / "t")]) == 0
    assert (tmp_path / "t_table1.csv").exists()
    assert cli.main(["curve", "--config", _write(tmp_path / "k.json", {
        "kind": "analytic-curve", "parameters": {"beta": "ginibre"}}), "--seed", "0",
        "--out", str(tmp_path / "k"), "--timing"]) == 0
    timed = json.loads((tmp_path / "k_summary.json").read_text())
    assert timed["runtime_seconds"] >= 0


def _fresh_run(out: Path, argv) -> dict:
    # identical output prefix each time: the summary echoes it
    if out.exists():
        for p in out.iterdir():
            p.unlink()
    assert cli.main(argv) == 0
    return _read_all(out)


def test_worker_count_does_not_change_outputs(tmp_path):
    cfg = _write(tmp_path / "c.json", {"kind": "crossover",
                                       "parameters": {"alpha_cross": 0.3, "n": 30, "samples": 6}})
    out = tmp_path / "w"
    runs = [_fresh_run(out, ["spacings", "--config", cfg, "--seed", "9", "--workers", k,
                             "--out", str(out / "run")]) for k in ("1", "3")]
    assert runs[0] == runs[1]


def test_reproduce_is_byte_identical(tmp_path):
    over = _write(tmp_path / "o.json", {"samples": 3000})
    out = tmp_path / "fig"
    runs = [_fresh_run(out, ["reproduce", "fig1", "--config", over, "--seed", "11",
                             "--workers", k, "--out", str(out)]) for k in ("1", "1", "2")]
    assert runs[0] == runs[1] == runs[2]
    assert len(runs[0]) == 4 * 2 + 3  # hist + summary per beta, curves for beta 0, 1, 2


def test_reproduce_plan_targets():
    for target in runner.REPRODUCE_TARGETS:
        plan = runner.reproduce_plan(target, 1, "out")
        assert plan and all(c.validated() for c in plan)
    fig4 = runner.reproduce_plan("fig4", 1, "out")
    assert len(fig4) == 10
    with pytest.raises(ConfigError):
        runner.reproduce_plan("fig9", 1, "out")
