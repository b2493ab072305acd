import json

import numpy as np
import pytest

from impactlearn import errors, pipeline
from impactlearn.dataset import Schema, write_csv
from impactlearn.trainer import TrainConfig

from conftest import separable_dataset


def test_prepare_fits_statistics_on_train_only(tmp_path):
    text = "[schema]\ntarget = y\n[columns]\na = numeric\ny = boolean\n"
    rows = "\n".join(f"{v},{int(v > 5)}" for v in range(10))
    (tmp_path / "d.csv").write_text("a,y\n" + rows.replace("3,0", "NA,0") + "\n")
    prep = pipeline.prepare(tmp_path / "d.csv", Schema.from_string(text), seed=1)
    _, train, _ = pipeline.split_raw(tmp_path / "d.csv", Schema.from_string(text), 0.7, 1)
    seen = np.ones(train.n, bool) if train.missing is None else ~train.missing[:, 0]
    observed = train.features[seen, 0]
    assert prep.fill_values[0] == pytest.approx(observed.mean())
    np.testing.assert_allclose(prep.train.features.mean(axis=0), 0, atol=1e-12)


def test_compare_on_separable_data(separable_files):
    data, schema = separable_files
    prep = pipeline.prepare(data, Schema.load(schema))
    rows = pipeline.compare(prep, pipeline.ALGORITHMS, cfg=TrainConfig(learning_rate=0.05))
    assert [r["rank"] for r in rows] == list(range(1, len(rows) + 1))
    accs = [r["accuracy"] for r in rows]
    assert accs == sorted(accs, reverse=True)
    assert min(accs) >= 0.95
    table = pipeline.format_table(rows)
    assert table.splitlines()[0].split() == ["Method", "AC", "PR", "RC", "F1", "AUC", "Rank"]


def test_knn_sweep_prefers_smaller_k_on_tie():
    ds = separable_dataset(n=100, margin=1.0)
    best, cv = pipeline.knn_sweep(ds)
    assert set(cv) == {3, 5, 7}
    assert best == min(k for k in cv if cv[k] == max(cv.values()))


@pytest.mark.parametrize("algorithm", pipeline.ALGORITHMS)
def test_bundle_round_trip(algorithm, separable_files):
    data, schema = separable_files
    prep = pipeline.prepare(data, Schema.load(schema))
    model, _, _ = pipeline.fit_algorithm(algorithm, prep.train, cfg=TrainConfig(epochs=50))
    b = pipeline.ModelBundle(algorithm, model, "classification", prep.scaler, "mean", prep.fill_values,
                             prep.train.feature_names, "label")
    back = pipeline.ModelBundle.from_dict(json.loads(json.dumps(b.to_dict())))
    np.testing.assert_array_equal(back.scores(prep.test.features), b.scores(prep.test.features))
    assert b.to_dict()["format"] == "impactlearn-model/1"


def test_evaluate_label_vs_score_regression(separable_files):
    data, schema = separable_files
    prep = pipeline.prepare(data, Schema.load(schema))
    model, _, _ = pipeline.fit_algorithm("impact", prep.train, cfg=TrainConfig(learning_rate=0.05))
    b = pipeline.ModelBundle("impact", model, "classification", prep.scaler, "mean", prep.fill_values,
                             prep.train.feature_names, "label")
    on_label = pipeline.evaluate(b, prep.test, "label").regression
    # thresholded labels are 0/1, so squared and absolute errors coincide
    assert on_label.mse == pytest.approx(on_label.mae)
    with pytest.raises(errors.UsageError):
        pipeline.evaluate(b, prep.test, "rank")


def test_preprocess_rejects_other_layout(tmp_path, separable_files):
    data, schema = separable_files
    prep = pipeline.prepare(data, Schema.load(schema))
    b = pipeline.ModelBundle("impact", None, "classification", prep.scaler, "mean", prep.fill_values,
                             ["a", "b"], "label")
    with pytest.raises(errors.ColumnLayoutMismatch):
        b.preprocess(prep.test)


def test_unknown_algorithm():
    with pytest.raises(errors.UsageError):
        pipeline.fit_algorithm("svm", separable_dataset(n=20))


def test_lstsq_method(tmp_path):
    ds = separable_dataset(n=60)
    model, hist, info = pipeline.fit_algorithm("impact", ds, method="lstsq")
    assert hist is None and info == {"method": "lstsq"}
    write_csv(ds, tmp_path / "x.csv")
