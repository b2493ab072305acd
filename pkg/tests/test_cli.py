import json

import numpy as np
import pytest

from impactlearn.cli import main
from impactlearn.growth import logistic_closed_form


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def data_args(files):
    data, schema = files
    return ["--data", data, "--schema", schema]


def test_simulate_logistic(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code, _, _ = run(["simulate", "--r", 1, "--k", 100, "--y0", 1, "--dt", 0.01, "--steps", 2000, "--out", out],
                     capsys)
    assert code == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    assert rows.shape == (2001, 3)
    assert rows[-1, 1] == pytest.approx(float(logistic_closed_form(20.0, 1, 100, 1)), abs=1e-6)


def test_simulate_competition_with_exogenous_csv(tmp_path, capsys):
    xs = tmp_path / "x.csv"
    xs.write_text("x\n" + "\n".join(["0.5"] * 11) + "\n")
    out = tmp_path / "t.csv"
    code, _, _ = run(["simulate", "--kind", "competition", "--r", 1, "--y0", 1, "--w", 0.1, "--w-y", 0.2,
                      "--dt", 0.1, "--steps", 10, "--x-csv", xs, "--out", out], capsys)
    assert code == 0
    assert out.read_text().splitlines()[0] == "time,y,x,dydt"


def test_train_evaluate_impact(tmp_path, separable_files, capsys):
    model, hist, rep, roc = (tmp_path / n for n in ("m.json", "h.csv", "r.json", "roc.csv"))
    code, _, err = run(["train", *data_args(separable_files), "--learning-rate", 0.05, "--epochs", 300,
                        "--model-out", model, "--history-out", hist], capsys)
    assert code == 0, err
    saved = json.loads(model.read_text())
    assert saved["kind"] == "impact" and {"w", "w_y", "b", "r", "k", "j", "scaler"} <= set(saved)
    assert len(hist.read_text().splitlines()) == 301
    code, _, err = run(["evaluate", *data_args(separable_files), "--model", model, "--report-out", rep,
                        "--roc-out", roc], capsys)
    assert code == 0, err
    report = json.loads(rep.read_text())
    assert report["classification"]["accuracy"] >= 0.95
    assert report["metadata"]["test_rows"] == 150
    # 0/1 labels include a non-positive target, so r is learned from 1
    assert report["metadata"]["training"]["r_source"] == "learned-fallback"
    assert report["metadata"]["training"]["learned_r"] is True
    assert roc.read_text().startswith("fpr,tpr,threshold")


@pytest.mark.parametrize("algorithm", ["knn", "gaussian_nb", "bernoulli_nb", "logistic", "linear"])
def test_train_baselines(tmp_path, separable_files, capsys, algorithm):
    model = tmp_path / "m.json"
    code, _, err = run(["train", *data_args(separable_files), "--algorithm", algorithm, "--model-out", model],
                       capsys)
    assert code == 0, err
    code, _, err = run(["evaluate", *data_args(separable_files), "--model", model,
                        "--report-out", tmp_path / "r.json"], capsys)
    assert code == 0, err


def test_compare_prints_table(tmp_path, separable_files, capsys):
    rep, table = tmp_path / "c.json", tmp_path / "c.txt"
    code, out, err = run(["compare", *data_args(separable_files), "--learning-rate", 0.05,
                          "--report-out", rep, "--table-out", table], capsys)
    assert code == 0, err
    assert out == table.read_text()
    ranking = json.loads(rep.read_text())["ranking"]
    assert len(ranking) == 6
    assert "knn_selection" in json.loads(rep.read_text())["metadata"]
    assert [r["rank"] for r in ranking] == [1, 2, 3, 4, 5, 6]


def test_learning_curve(tmp_path, separable_files, capsys):
    out = tmp_path / "lc.csv"
    code, _, err = run(["learning-curve", *data_args(separable_files), "--algorithm", "gaussian_nb",
                        "--fractions", "0.5,1.0", "--out", out], capsys)
    assert code == 0, err
    lines = out.read_text().splitlines()
    assert lines[0] == "train_size,train_score,cv_score"
    assert [int(l.split(",")[0]) for l in lines[1:]] == [175, 350]


def test_impact_scores(tmp_path, separable_files, capsys):
    model, out = tmp_path / "m.json", tmp_path / "i.json"
    run(["train", *data_args(separable_files), "--epochs", 50, "--model-out", model], capsys)
    code, _, err = run(["impact", *data_args(separable_files), "--model", model, "--out", out], capsys)
    assert code == 0, err
    feats = json.loads(out.read_text())["features"]
    assert [f["name"] for f in feats] == ["f0", "f1", "f2", "f3"]


def test_impact_rejects_baseline_model(tmp_path, separable_files, capsys):
    model = tmp_path / "m.json"
    run(["train", *data_args(separable_files), "--algorithm", "gaussian_nb", "--model-out", model], capsys)
    code, _, err = run(["impact", *data_args(separable_files), "--model", model, "--out", tmp_path / "i.json"],
                       capsys)
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error"] == "cli.UsageError"


def test_missing_file_error_is_json(tmp_path, capsys):
    schema = tmp_path / "s.ini"
    schema.write_text("[schema]\ntarget = y\n[columns]\ny = numeric\n")
    code, _, err = run(["train", "--data", tmp_path / "none.csv", "--schema", schema,
                        "--model-out", tmp_path / "m.json"], capsys)
    assert code == 1
    payload = json.loads(err.strip())
    assert payload["error"] == "dataset.MissingFile"
    assert not (tmp_path / "m.json").exists()


def test_divergence_error_is_json(tmp_path, separable_files, capsys):
    code, _, err = run(["train", *data_args(separable_files), "--learning-rate", 1e6, "--epochs", 50,
                        "--model-out", tmp_path / "m.json"], capsys)
    assert code == 1
    assert json.loads(err.strip())["error"] == "trainer.DivergenceDetected"


def test_bad_config_value_is_json(tmp_path, separable_files, capsys):
    code, _, err = run(["train", *data_args(separable_files), "--epochs", 0, "--model-out", tmp_path / "m"],
                       capsys)
    assert code == 1
    assert json.loads(err.strip())["error"] == "trainer.ConfigError"


def test_usage_error(capsys):
    code, _, err = run(["train"], capsys)
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error"] == "cli.UsageError"


def test_config_file_supplies_options(tmp_path, separable_files, capsys):
    data, schema = separable_files
    cfg = tmp_path / "run.ini"
    cfg.write_text(f"[run]\ndata = {data}\nschema = {schema}\nepochs = 7\nlearning_rate = 0.02\n")
    model, hist = tmp_path / "m.json", tmp_path / "h.csv"
    code, _, err = run(["train", "--config", cfg, "--model-out", model, "--history-out", hist], capsys)
    assert code == 0, err
    assert len(hist.read_text().splitlines()) == 8
    assert json.loads(model.read_text())["config"]["learning_rate"] == 0.02
    # flags override the file
    run(["train", "--config", cfg, "--epochs", 3, "--model-out", model, "--history-out", hist], capsys)
    assert len(hist.read_text().splitlines()) == 4


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nbogus = 1\n")
    code, _, err = run(["train", "--config", cfg, "--model-out", tmp_path / "m"], capsys)
    assert code == 2


def test_outputs_byte_identical_across_runs(tmp_path, separable_files, capsys):
    texts = []
    for name in ("a", "b"):
        d = tmp_path / name
        run(["train", *data_args(separable_files), "--epochs", 100, "--model-out", d / "m.json",
             "--history-out", d / "h.csv"], capsys)
        run(["evaluate", *data_args(separable_files), "--model", d / "m.json", "--report-out", d / "r.json"],
            capsys)
        texts.append([(d / f).read_bytes() for f in ("m.json", "h.csv", "r.json")])
    assert texts[0] == texts[1]
