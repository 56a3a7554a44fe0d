"""Config parsing, task orchestration, emission formats, and the CLI."""

import json
import os

import numpy as np
import pytest

from nonlocal_sis import (
    ConfigError,
    KernelSpec,
    RateSpec,
    ScenarioConfig,
    build_mesh,
    emit_config,
    parse_config,
    run,
)
from nonlocal_sis.cli import main
from nonlocal_sis.runner import WORKERS_ENV, _fmt


def _base_config(task="spectrum", n=60, options=None, beta=None, gamma=None):
    return {
        "mesh": {"a": -1.0, "b": 1.0, "n": n},
        "kernel": {"family": "triangle", "delta": 0.5},
        "rates": {
            "beta": beta or {"family": "constant", "value": 2.0},
            "gamma": gamma or {"family": "constant", "value": 1.0},
        },
        "d_S": 1.0, "d_I": 1.0, "N": 2.0,
        "task": task,
        "options": options or {},
    }


def test_float_cells_round_trip():
    rng = np.random.default_rng(1)
    for x in rng.uniform(-1e6, 1e6, 50):
        assert float(_fmt(float(x))) == float(x)
    assert _fmt(True) == "true" and _fmt(False) == "false"
    assert _fmt(None) == ""
    assert _fmt(3) == "3"


@pytest.mark.parametrize("beta", [
    {"family": "constant", "value": 2.0},
    {"family": "cosine", "base": 1.0, "amplitude": 0.5, "frequency": 2.0},
    {"family": "gaussian_bump", "base": 1.0, "height": 1.5, "width": 0.3, "center": 0.1},
    {"family": "table", "values": [1.0, 2.0, 1.5]},
    {"family": "table", "x": [-1.0, 0.0, 1.0], "values": [1.0, 2.0, 1.5]},
])
def test_config_round_trip(beta):
    cfg = parse_config(_base_config(beta=beta))
    assert parse_config(emit_config(cfg)) == cfg


def test_rate_spec_evaluation_formulas():
    mesh = build_mesh(-1.0, 1.0, 80)
    x = mesh.nodes
    cos_spec = RateSpec(family="cosine", base=1.0, amplitude=0.8, frequency=1.0)
    np.testing.assert_allclose(cos_spec.evaluate(mesh), 1.0 + 0.8 * np.cos(np.pi * x))
    bump = RateSpec(family="gaussian_bump", base=1.0, height=1.5, width=0.5, center=0.2)
    np.testing.assert_allclose(bump.evaluate(mesh),
                               1.0 + 1.5 * np.exp(-(((x - 0.2) / 0.5) ** 2)))


def test_table_rate_interpolation():
    mesh = build_mesh(-1.0, 1.0, 80)
    values = [1.0, 3.0, 2.0, 5.0]
    spec = RateSpec(family="table", values=tuple(values))
    expected = np.interp(mesh.nodes, np.linspace(-1.0, 1.0, 4), values)
    np.testing.assert_allclose(spec.evaluate(mesh), expected)
    # an explicit grid that does not cover the mesh is a config error
    short = RateSpec(family="table", x=(-0.5, 0.5), values=(1.0, 2.0))
    with pytest.raises(ConfigError):
        short.evaluate(mesh)


@pytest.mark.parametrize("mutate", [
    lambda raw: raw.pop("task"),
    lambda raw: raw.update(task="fit"),
    lambda raw: raw.update(extra=1),
    lambda raw: raw["mesh"].pop("n"),
    lambda raw: raw["kernel"].pop("family"),
    lambda raw: raw["kernel"].update(radius=1.0),
    lambda raw: raw["rates"].pop("gamma"),
    lambda raw: raw["rates"].update(beta={"family": "constant"}),
    lambda raw: raw["rates"].update(beta={"family": "cosine", "base": 1.0,
                                          "amplitude": 0.1, "frequency": 1.0,
                                          "value": 2.0}),
    lambda raw: raw.update(N=0.0),
])
def test_config_validation_errors(mutate):
    raw = _base_config()
    mutate(raw)
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_nonpositive_rate_field_rejected(tmp_path):
    raw = _base_config(beta={"family": "cosine", "base": 0.5, "amplitude": 1.0,
                             "frequency": 1.0})
    with pytest.raises(ConfigError, match="rates.beta"):
        run(parse_config(raw), str(tmp_path))


def test_spectrum_task_artifacts(tmp_path):
    record = run(parse_config(_base_config()), str(tmp_path))
    assert record.ok
    assert all(os.path.exists(p) for p in record.outputs)
    lines = (tmp_path / "spectrum.csv").read_text().splitlines()
    header = lines[0].split(",")
    row = dict(zip(header, lines[1].split(",")))
    assert float(row["r0_weighted"]) == pytest.approx(2.0, abs=1e-9)
    assert float(row["lambda_p"]) == pytest.approx(-1.0, abs=1e-10)
    assert row["principal_exists"] == "true"
    rec = json.loads((tmp_path / "run_record.json").read_text())
    assert rec["ok"] is True and rec["checks"]["route_agreement"] is True


def test_equilibrium_task_artifacts(tmp_path):
    record = run(parse_config(_base_config(task="equilibrium")), str(tmp_path))
    assert record.ok
    header = json.loads((tmp_path / "endemic.json").read_text())
    assert header["kind"] == "endemic" and header["residual"] <= 1e-8
    lines = (tmp_path / "endemic.csv").read_text().splitlines()
    assert lines[0] == "node,S_tilde,I_tilde"
    assert len(lines) == 61
    values = np.array([line.split(",") for line in lines[1:]], dtype=float)
    np.testing.assert_allclose(values[:, 1], 0.5, atol=1e-8)


def test_equilibrium_subcritical_emits_dfe_only(tmp_path):
    raw = _base_config(task="equilibrium", beta={"family": "constant", "value": 1.0},
                       gamma={"family": "constant", "value": 2.0})
    record = run(parse_config(raw), str(tmp_path))
    assert record.ok
    assert (tmp_path / "dfe.csv").exists()
    assert not (tmp_path / "endemic.csv").exists()


def test_simulate_task_artifacts_and_blank_columns(tmp_path):
    options = {"t_end": 2.0, "initial": {"kind": "random_uniform", "seed": 5}}
    record = run(parse_config(_base_config(task="simulate", options=options)), str(tmp_path))
    assert record.ok
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,mass,dist_dfe,dist_endemic,lyapunov"
    # without an endemic reference the last two columns stay empty
    assert lines[1].endswith(",,")
    for name in ("final_S.csv", "final_I.csv"):
        assert (tmp_path / name).read_text().splitlines()[0] == "node,value"


def test_simulate_with_endemic_reference(tmp_path):
    options = {"t_end": 2.0, "compare_endemic": True,
               "initial": {"kind": "constant", "S": 0.8, "I": 0.2}}
    record = run(parse_config(_base_config(task="simulate", options=options)), str(tmp_path))
    assert record.ok
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    first = lines[1].split(",")
    assert first[3] != "" and float(first[4]) > 0.0


def test_simulate_initial_spec_errors(tmp_path):
    for options in ({"t_end": 2.0},
                    {"t_end": 2.0, "initial": {"kind": "random_uniform"}},
                    {"t_end": 2.0, "initial": {"kind": "bogus"}},
                    {"initial": {"kind": "constant", "S": 1.0, "I": 0.0}}):
        with pytest.raises(ConfigError):
            run(parse_config(_base_config(task="simulate", options=options)), str(tmp_path))


def test_simulate_deterministic_bytes(tmp_path):
    options = {"t_end": 2.0, "initial": {"kind": "random_uniform", "seed": 42}}
    cfg = parse_config(_base_config(task="simulate", options=options))
    run(cfg, str(tmp_path / "one"))
    run(cfg, str(tmp_path / "two"))
    for name in ("trajectory.csv", "final_S.csv", "final_I.csv"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def _sweep_config(n=100, **options):
    base = {"log10_from": -2.0, "log10_to": 2.0, "count": 7}
    base.update(options)
    return parse_config(_base_config(
        task="sweep", n=n, options=base,
        beta={"family": "gaussian_bump", "base": 1.0, "height": 1.5,
              "width": 0.2236067977499790, "center": 0.0},
        gamma={"family": "constant", "value": 1.4},
    ))


def test_sweep_detects_single_threshold(tmp_path):
    record = run(_sweep_config(), str(tmp_path))
    assert record.ok
    summary = json.loads((tmp_path / "sweep_summary.json").read_text())
    assert summary["sign_changes"] == 1
    lo, hi = summary["bracket"]
    assert lo < summary["d_star"] < hi
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert len(lines) == 8


def test_sweep_workers_do_not_change_bytes(tmp_path, monkeypatch):
    run(_sweep_config(workers=1), str(tmp_path / "serial"))
    monkeypatch.setenv(WORKERS_ENV, "3")
    run(_sweep_config(workers=1), str(tmp_path / "threaded"))
    assert (tmp_path / "serial" / "sweep.csv").read_bytes() == \
        (tmp_path / "threaded" / "sweep.csv").read_bytes()


def test_invalid_worker_env(tmp_path, monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        run(_sweep_config(), str(tmp_path))


def test_sweep_grid_validation(tmp_path):
    with pytest.raises(ConfigError):
        run(parse_config(_base_config(task="sweep", options={"d_grid": [1.0, 1.0]})),
            str(tmp_path))
    with pytest.raises(ConfigError):
        run(parse_config(_base_config(task="sweep", options={"count": 5})), str(tmp_path))


def test_limits_task_artifacts(tmp_path):
    raw = _base_config(
        task="limits", n=100, options={"d_values": [5.0, 50.0]},
        beta={"family": "cosine", "base": 1.0, "amplitude": 0.8, "frequency": 1.0},
        gamma={"family": "constant", "value": 0.8},
    )
    record = run(parse_config(raw), str(tmp_path))
    assert record.ok
    both = json.loads((tmp_path / "limit_both.json").read_text())
    assert both["S"] + both["I"] == pytest.approx(1.0, rel=1e-9)
    assert (tmp_path / "limit_ds_profile.csv").exists()
    di = json.loads((tmp_path / "limit_di.json").read_text())
    assert di["residual"] <= 1e-8
    for axis in ("ds", "di", "both"):
        for idx in range(2):
            assert (tmp_path / f"endemic_{axis}_{idx}.csv").exists()


def test_scenario_config_rejects_bad_axis():
    with pytest.raises(ConfigError):
        ScenarioConfig(a=-1.0, b=1.0, n=60,
                       kernel=KernelSpec(family="triangle", delta=0.5),
                       beta=RateSpec(family="constant", value=1.0),
                       gamma=RateSpec(family="constant", value=1.0),
                       d_S=1.0, d_I=1.0, N=2.0, task="render")


def test_cli_run_and_error_paths(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(_base_config()))
    assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "out")]) == 0
    out = capsys.readouterr().out
    assert "check route_agreement: pass" in out

    assert main(["run", "--config", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "out2")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "out3")]) == 2
    raw = _base_config()
    raw["task"] = "draw"
    bad_task = tmp_path / "bad_task.json"
    bad_task.write_text(json.dumps(raw))
    assert main(["run", "--config", str(bad_task), "--out", str(tmp_path / "out4")]) == 2


def test_cli_suite_emits_table(tmp_path):
    code = main(["suite", "--out", str(tmp_path)])
    assert code in (0, 1)
    table = json.loads((tmp_path / "suite.json").read_text())
    assert len(table["criteria"]) == 12
    lines = (tmp_path / "suite.csv").read_text().splitlines()
    assert lines[0] == "number,name,passed,seconds,details"
    assert len(lines) == 13
