import math

import pytest

import quantboost as qb


def test_loss_and_derivatives():
    assert qb.pinball_loss(2.0, 0.9) == pytest.approx(1.8)
    assert qb.huber_norm(0.5, 1.0) == pytest.approx(0.125)
    g, h = qb.quantile_huber_grad_hess(3.0, 0.0, 0.95, 2.0)
    assert g == pytest.approx(-0.95)
    assert h == 0.0


def test_train_predict_round_trip(tmp_path):
    data = qb.simulate(n=300, seed=1)
    train, test = qb.train_test_split(data, 0.75, 3)
    assert (train.n_rows, test.n_rows) == (225, 75)

    cfg = qb.TrainConfig()
    cfg.n_estimators = 40
    model = qb.train(train, qb.ObjectiveSpec.quantile_huber(0.95, 2.0), cfg)
    assert model.n_trees == 40
    assert model.objective.tau == 0.95
    preds = model.predict(test)
    assert len(preds) == 75

    path = tmp_path / "m.json"
    model.save(path)
    assert qb.Ensemble.load(path).predict(test) == preds
    assert qb.Ensemble.from_json(model.to_json()).predict_row(test.row(0)) == preds[0]


def test_errors_map_to_python_exceptions():
    data = qb.Dataset(["x"], [[0.0, 1.0]], [0.0, 1.0])
    cfg = qb.TrainConfig()
    cfg.lambda_ = 0.0
    with pytest.raises(qb.ParameterError):
        qb.train(data, qb.ObjectiveSpec.quantile_huber(0.5, 1.0), cfg)
    with pytest.raises(qb.DataError):
        qb.Dataset(["x"], [[0.0, math.nan]], [0.0, 1.0])
    model = qb.train(data, qb.ObjectiveSpec.squared_error())
    with pytest.raises(qb.SchemaError):
        model.predict_row([1.0, 2.0])
    assert issubclass(qb.SchemaError, qb.Error)


def test_metrics():
    assert qb.cwc(0.892, 0.777, 0.9) == pytest.approx(1.937, abs=0.002)
    assert qb.picp([1, 2, 3], [0, 0, 0], [5, 5, 5]) == 1.0
    lo, hi = qb.pad_intervals([0.0], [10.0], 0.03)
    assert (lo[0], hi[0]) == pytest.approx((-0.15, 10.15))
    rep = qb.evaluate_intervals([0.0, 10.0], [-1.0, 8.0], [1.0, 9.0])
    assert rep.picp == 0.5


def test_experiment_table(tmp_path):
    table = qb.run_experiment(
        '{"data": {"n": 200}, "lower_model": {"n_estimators": 10},'
        ' "upper_model": {"n_estimators": 10}, "point_model": {"n_estimators": 10}}',
        tmp_path / "out",
    )
    assert "test_picp" in table
    assert (tmp_path / "out" / "metrics.txt").read_text() == table
