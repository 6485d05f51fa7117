import subprocess
import sys

import numpy as np
import pytest
import yaml

import extvar as ev
from extvar.cli import run

BASE_CONFIG = {
    "lattice": {"dims": [2]},
    "kernel": {"kind": "table", "values": {"0": 1.0, "1": 0.5, "-1": 0.5}},
    "data": {"d": 1, "n": 200},
    "delta": 0.0,
    "fit": {"restarts": 3, "seed": 0},
    "experiment": {
        "n_schedule": [30, 60],
        "seeds": 2,
        "m_ref": 500,
        "net_size": 3,
        "alpha": 0.05,
        "m": 400,
        "configs": 2,
    },
}


def write_config(tmp_path, name="run.yaml", replace=(), **overrides):
    raw = yaml.safe_load(yaml.safe_dump(BASE_CONFIG))
    for key, value in overrides.items():
        if key not in replace and isinstance(value, dict) and isinstance(raw.get(key), dict):
            raw[key].update(value)
        else:
            raw[key] = value
    path = tmp_path / name
    path.write_text(yaml.safe_dump(raw))
    return str(path)


def stdout_value(out: str, key: str) -> str:
    for line in out.splitlines():
        if line.startswith(f"{key} = "):
            return line.split(" = ", 1)[1]
    raise AssertionError(f"{key!r} not found in output:\n{out}")


# ---- configuration parsing ------------------------------------------------


def test_parse_minimal_config_defaults():
    cfg = ev.parse_run_config(
        {"lattice": {"dims": [2]}, "kernel": {"kind": "kronecker"}, "data": {"d": 1}}
    )
    assert cfg.lattice.dims == (2,)
    assert cfg.d == 1 and cfg.n == 1000
    assert cfg.delta == 0.0
    assert cfg.fit.restarts == 20 and cfg.fit.seed == 0
    assert cfg.quasi.kind == "sqrt"
    assert cfg.experiment.n_schedule == (100, 1000, 10000, 100000)
    assert cfg.sampler_spec == {"kind": "uniform"}


def test_parse_config_rejects_unknown_keys():
    base = {"lattice": {"dims": [2]}, "kernel": {"kind": "kronecker"}, "data": {"d": 1}}
    with pytest.raises(ev.ValidationError, match="frobnicate"):
        ev.parse_run_config({**base, "frobnicate": 1})
    with pytest.raises(ev.ValidationError, match="bogus"):
        ev.parse_run_config({**base, "fit": {"bogus": 1}})
    with pytest.raises(ev.ValidationError, match="delta"):
        ev.parse_run_config({**base, "fit": {"delta": 0.1}})  # delta lives at top level
    with pytest.raises(ev.ValidationError, match="missing the kernel"):
        ev.parse_run_config({"lattice": {"dims": [2]}, "data": {"d": 1}})
    with pytest.raises(ev.ValidationError, match="missing the data"):
        ev.parse_run_config({"lattice": {"dims": [2]}, "kernel": {"kind": "kronecker"}})


def test_parse_config_rejects_wide_lattice():
    with pytest.raises(ev.ValidationError, match="exceeds data dimension"):
        ev.parse_run_config(
            {"lattice": {"dims": [2, 2]}, "kernel": {"kind": "kronecker"}, "data": {"d": 1}}
        )


def test_parse_config_validates_values():
    base = {"lattice": {"dims": [2]}, "kernel": {"kind": "kronecker"}, "data": {"d": 1}}
    with pytest.raises(ev.ValidationError):
        ev.parse_run_config({**base, "delta": -0.5})
    with pytest.raises(ev.ValidationError):
        ev.parse_run_config({**base, "data": {"d": 1, "n": 0}})
    with pytest.raises(ev.ValidationError):
        ev.parse_run_config({**base, "experiment": {"n_schedule": [50, 50]}})
    with pytest.raises(ev.SamplerConfigError):
        ev.parse_run_config({**base, "data": {"d": 1, "sampler": {"kind": "cauchy"}}})


def test_config_digest_ignores_key_order_but_not_values():
    a = {"lattice": {"dims": [2]}, "kernel": {"kind": "kronecker"}, "data": {"d": 1}}
    b = {"data": {"d": 1}, "kernel": {"kind": "kronecker"}, "lattice": {"dims": [2]}}
    assert ev.parse_run_config(a).digest == ev.parse_run_config(b).digest
    c = {"lattice": {"dims": [2]}, "kernel": {"kind": "kronecker"}, "data": {"d": 1, "n": 7}}
    assert ev.parse_run_config(a).digest != ev.parse_run_config(c).digest


def test_require_cell_change_hypothesis():
    base = {"lattice": {"dims": [2]}, "kernel": {"kind": "kronecker"}, "data": {"d": 1}}
    with pytest.raises(ev.HypothesisError, match="positive separation"):
        ev.parse_run_config(base).require_cell_change_hypothesis()
    bad_alpha = ev.parse_run_config({**base, "delta": 0.08})  # default alpha 0.01 >= 0.04? no
    bad_alpha.require_cell_change_hypothesis()  # 0.01 < 0.04 holds
    tight = ev.parse_run_config({**base, "delta": 0.02})
    with pytest.raises(ev.HypothesisError, match="alpha"):
        tight.require_cell_change_hypothesis()  # 0.01 >= 0.01


def test_load_run_config_errors(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("lattice: [unclosed\n")
    with pytest.raises(ev.ValidationError, match="not parseable"):
        ev.load_run_config(str(path))
    path.write_text("")
    with pytest.raises(ev.ValidationError, match="empty"):
        ev.load_run_config(str(path))
    path.write_text("- a\n- b\n")
    with pytest.raises(ev.ValidationError, match="mapping"):
        ev.load_run_config(str(path))


# ---- subcommand flows -----------------------------------------------------


def test_gen_data_flow(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "data.csv"
    assert run(["gen-data", "--config", cfg, "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert stdout_value(text, "seed") == "0"
    assert len(stdout_value(text, "config digest")) == 64
    samples = ev.read_samples(str(out))
    assert samples.n == 200 and samples.d == 1


def test_gen_data_seed_override_and_determinism(tmp_path, capsys):
    cfg = write_config(tmp_path)
    a, b, c = (tmp_path / name for name in ("a.csv", "b.csv", "c.csv"))
    assert run(["gen-data", "--config", cfg, "--out", str(a), "--seed", "7"]) == 0
    assert run(["gen-data", "--config", cfg, "--out", str(b), "--seed", "7"]) == 0
    assert run(["gen-data", "--config", cfg, "--out", str(c)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_fit_eval_round_trip_is_exact(tmp_path, capsys):
    cfg = write_config(tmp_path)
    data = tmp_path / "data.csv"
    fit_dir = tmp_path / "fit"
    run(["gen-data", "--config", cfg, "--out", str(data)])
    assert run(["fit", "--config", cfg, "--data", str(data), "--out", str(fit_dir)]) == 0
    fit_out = capsys.readouterr().out
    best_vn = float(stdout_value(fit_out, "best_vn"))

    summary = (fit_dir / "summary.txt").read_text()
    assert f"best_vn = {best_vn!r}" in summary
    assert "quasi_radius = " in summary and "n = 200" in summary

    restarts = (fit_dir / "restarts.csv").read_text().splitlines()
    assert restarts[0] == "restart,final_vn,iterations,separation,repairs"
    assert len(restarts) == 4  # header + 3 restarts

    assert (
        run(
            ["eval", "--config", cfg, "--data", str(data),
             "--centroids", str(fit_dir / "centroids.csv")]
        )
        == 0
    )
    vn = float(stdout_value(capsys.readouterr().out, "vn"))
    assert vn == best_vn  # CSV round trip preserves every bit


def test_eval_hand_value(tmp_path, capsys):
    cfg = write_config(tmp_path)
    data = tmp_path / "hand.csv"
    cents = tmp_path / "cents.csv"
    ev.write_samples(str(data), ev.SampleSet(np.array([[0.0], [0.4], [1.0]])))
    lat = ev.build_lattice((2,))
    ev.write_centroids(str(cents), ev.CentroidConfiguration(lat, np.array([[0.2], [0.8]])))
    assert run(["eval", "--config", cfg, "--data", str(data), "--centroids", str(cents)]) == 0
    vn = float(stdout_value(capsys.readouterr().out, "vn"))
    assert abs(vn - 0.14) <= 1e-12


def test_fit_seed_override_recorded(tmp_path, capsys):
    cfg = write_config(tmp_path)
    data = tmp_path / "data.csv"
    run(["gen-data", "--config", cfg, "--out", str(data)])
    out_dir = tmp_path / "fit9"
    run(["fit", "--config", cfg, "--data", str(data), "--out", str(out_dir), "--seed", "9"])
    capsys.readouterr()
    assert "seed = 9" in (out_dir / "summary.txt").read_text()


def test_fit_threads_do_not_change_results(tmp_path, capsys):
    cfg = write_config(tmp_path)
    data = tmp_path / "data.csv"
    run(["gen-data", "--config", cfg, "--out", str(data)])
    one = tmp_path / "one"
    many = tmp_path / "many"
    run(["fit", "--config", cfg, "--data", str(data), "--out", str(one), "--threads", "1"])
    run(["fit", "--config", cfg, "--data", str(data), "--out", str(many), "--threads", "8"])
    capsys.readouterr()
    for name in ("centroids.csv", "restarts.csv", "summary.txt"):
        assert (one / name).read_bytes() == (many / name).read_bytes()


def test_mc_eval_deterministic(tmp_path, capsys):
    cfg = write_config(tmp_path)
    cents = tmp_path / "cents.csv"
    lat = ev.build_lattice((2,))
    ev.write_centroids(str(cents), ev.CentroidConfiguration(lat, np.array([[0.25], [0.75]])))
    assert run(["mc-eval", "--config", cfg, "--centroids", str(cents)]) == 0
    first = capsys.readouterr().out
    assert run(["mc-eval", "--config", cfg, "--centroids", str(cents), "--threads", "4"]) == 0
    second = capsys.readouterr().out
    assert stdout_value(first, "estimate") == stdout_value(second, "estimate")
    assert stdout_value(first, "stderr") == stdout_value(second, "stderr")
    assert float(stdout_value(first, "estimate")) == pytest.approx(0.078125, abs=0.01)


def test_experiment_lemma1_flow(tmp_path, capsys):
    cfg = write_config(tmp_path, delta=0.2)
    out = tmp_path / "exp"
    assert run(["experiment", "lemma1", "--config", cfg, "--out", str(out), "--svg"]) == 0
    capsys.readouterr()
    rows = (out / "lemma1.csv").read_text().splitlines()
    assert rows[0] == "config_id,cell,alpha,delta,estimate,stderr,bound,pass"
    assert len(rows) == 1 + 2 * 2  # 2 configs x 2 cells
    assert all(line.split(",")[-1] in {"0", "1"} for line in rows[1:])
    summary = (out / "summary.txt").read_text()
    assert "records = 4" in summary and "all_passed = " in summary
    svg = (out / "lemma1.svg").read_bytes()
    assert b"<svg" in svg[:1000]


def test_experiment_lemma1_rerun_identical(tmp_path, capsys):
    cfg = write_config(tmp_path, delta=0.2)
    a, b = tmp_path / "a", tmp_path / "b"
    run(["experiment", "lemma1", "--config", cfg, "--out", str(a)])
    run(["experiment", "lemma1", "--config", cfg, "--out", str(b), "--threads", "8"])
    capsys.readouterr()
    assert (a / "lemma1.csv").read_bytes() == (b / "lemma1.csv").read_bytes()
    assert (a / "summary.txt").read_bytes() == (b / "summary.txt").read_bytes()


def test_experiment_lemma1_needs_hypothesis(tmp_path, capsys):
    cfg = write_config(tmp_path)  # delta = 0
    out = tmp_path / "exp"
    assert run(["experiment", "lemma1", "--config", cfg, "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "error:" in err and "delta" in err


def test_experiment_ulln_flow(tmp_path, capsys):
    cfg = write_config(tmp_path, delta=0.2)
    out = tmp_path / "exp"
    assert run(["experiment", "ulln", "--config", cfg, "--out", str(out), "--svg"]) == 0
    capsys.readouterr()
    rows = (out / "ulln.csv").read_text().splitlines()
    assert rows[0] == "n,seed,sup_discrepancy"
    assert len(rows) == 1 + 2 * 2  # schedule x seeds
    assert [line.split(",")[0] for line in rows[1:]] == ["30", "30", "60", "60"]
    summary = (out / "summary.txt").read_text()
    assert "median_disc_n30 = " in summary and "median_disc_n60 = " in summary
    assert (out / "ulln.svg").exists()


def test_experiment_consistency_flow(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "exp"
    assert run(["experiment", "consistency", "--config", cfg, "--out", str(out), "--svg"]) == 0
    capsys.readouterr()
    rows = (out / "consistency.csv").read_text().splitlines()
    assert rows[0] == "n,seed,vn_best,v_of_fit,v_ref,gap"
    assert len(rows) == 1 + 2 * 2
    refs = {line.split(",")[4] for line in rows[1:]}
    assert len(refs) == 1  # one shared reference value
    summary = (out / "summary.txt").read_text()
    assert "v_ref = " in summary and "quasi_all_ok = " in summary
    assert "median_gap_n30 = " in summary
    assert (out / "consistency.svg").exists()


def test_experiment_consistency_rerun_identical(tmp_path, capsys):
    cfg = write_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    run(["experiment", "consistency", "--config", cfg, "--out", str(a), "--threads", "1"])
    run(["experiment", "consistency", "--config", cfg, "--out", str(b), "--threads", "8"])
    capsys.readouterr()
    assert (a / "consistency.csv").read_bytes() == (b / "consistency.csv").read_bytes()


# ---- exit codes -----------------------------------------------------------


def test_exit_code_missing_config(tmp_path, capsys):
    assert run(["gen-data", "--config", str(tmp_path / "nope.yaml"), "--out", "x.csv"]) == 1
    assert "error:" in capsys.readouterr().err


def test_exit_code_missing_data(tmp_path, capsys):
    cfg = write_config(tmp_path)
    code = run(["fit", "--config", cfg, "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_exit_code_bad_config(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("lattice: {dims: [2]}\nkernel: {kind: kronecker}\ndata: {d: 1}\nwhat: 1\n")
    assert run(["gen-data", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == 2
    assert "what" in capsys.readouterr().err


def test_exit_code_infeasible_fit(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        replace=("kernel",),
        lattice={"dims": [5]},
        kernel={"kind": "kronecker"},
        delta=0.45,
        fit={"restarts": 2, "seed": 0},
    )
    data = tmp_path / "data.csv"
    run(["gen-data", "--config", cfg, "--out", str(data)])
    capsys.readouterr()
    code = run(["fit", "--config", cfg, "--data", str(data), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "repair failed" in capsys.readouterr().err


def test_exit_code_bad_threads(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert run(["gen-data", "--config", cfg, "--out", "x.csv", "--threads", "0"]) == 2
    assert "--threads" in capsys.readouterr().err


def test_exit_code_unknown_subcommand(capsys):
    assert run(["transmogrify"]) == 2
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert "gen-data" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "extvar", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "usage" in proc.stdout
