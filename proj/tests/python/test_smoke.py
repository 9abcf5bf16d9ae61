import math

import pytest

import qevo


def test_parse_and_aggregate():
    samples = qevo.parse_trace("t,v\n300,4\n0,2\n", timestamp_col="t", value_col="v")
    assert samples == [(0.0, 2.0), (300.0, 4.0)]
    assert qevo.aggregate(samples, 10) == [3.0]
    assert qevo.aggregate([(0.0, 1.0), (120.0, 5.0)], 1) == [1.0, 3.0, 5.0]


def test_errors_carry_a_code():
    with pytest.raises(qevo.QevoError) as info:
        qevo.parse_trace("t,v\nabc,4\n", timestamp_col="t", value_col="v")
    assert info.value.code == "malformed-row"
    with pytest.raises(qevo.QevoError):
        qevo.fit_normalizer([5.0, 5.0, 5.0])


def test_normalization_and_windows():
    assert qevo.fit_normalizer([2.0, 4.0, 6.0]) == (2.0, 6.0)
    assert qevo.normalize(7.0, 2.0, 6.0) == 1.0
    assert qevo.denormalize(0.5, 2.0, 6.0) == 4.0
    rows, targets = qevo.build_windows([0.1, 0.2, 0.3, 0.4, 0.5], 2)
    assert rows == [[0.1, 0.2], [0.2, 0.3], [0.3, 0.4]]
    assert targets == [0.3, 0.4, 0.5]


def test_genome_layout_and_forward():
    arch = qevo.Architecture(2, [2])
    assert arch.genome_length() == 11
    minimal = qevo.Genome(qevo.Architecture(1, [1]), [0.0] * 5)
    assert abs(minimal.predict([0.0])) < 1e-15
    g = qevo.Genome.random(qevo.Architecture(3, [4, 2]), seed=9)
    assert g == qevo.Genome.random(qevo.Architecture(3, [4, 2]), seed=9)
    ys = g.predict_many([[0.1, 0.5, 0.9], [0.0, 0.0, 1.0]])
    assert all(0.0 <= y <= 1.0 for y in ys)


def test_metrics_and_strategy_update():
    assert math.isclose(qevo.rmse([0.2, 0.4], [0.3, 0.5]), 0.1, rel_tol=1e-12)
    assert math.isclose(qevo.mae([0.2, 0.4], [0.3, 0.6]), 0.15, rel_tol=1e-12)
    assert math.isclose(qevo.mape([1.0, 1.0], [0.9, 1.1]), 0.1, rel_tol=1e-12)
    p = qevo.update_probabilities([1, 0, 0], [0, 0, 0])
    assert [round(x, 12) for x in p] == [0.4, 0.3, 0.3]
    assert qevo.select_strategy(0.5, [0.33, 0.33, 0.34]) == "QACO"


def test_train_in_memory_is_deterministic():
    series = qevo.synthetic_series(300, seed=3)
    settings = {"window": 5, "population": 10, "generations": 4, "seed": 2, "max_depth": 2}
    a = qevo.train(series, settings)
    b = qevo.train(series, settings)
    assert a["genome"] == b["genome"]
    traj = a["report"]["best_fitness"]
    assert len(traj) == 5
    assert all(later <= earlier for earlier, later in zip(traj, traj[1:]))
    assert a["test"]["rmse"] >= a["test"]["mae"]


def test_train_and_predict_files(tmp_path):
    series = qevo.synthetic_series(200, seed=1)
    trace = tmp_path / "trace.csv"
    trace.write_text("timestamp,value\n" + "".join(f"{i * 300},{max(v, 0.0)!r}\n" for i, v in enumerate(series)))
    out = tmp_path / "out"
    qevo.train_files({"input": str(trace), "out_dir": str(out), "window": 4, "population": 8,
                      "generations": 3, "seed": 5})
    assert (out / "report.json").exists()
    rows = qevo.predict_files(out / "genome.bin", trace, report=out / "report.json", output=tmp_path / "f.csv")
    assert rows[0][0] == 4
    assert len(rows) == len(series) - 4 + 1
