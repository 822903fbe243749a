import json
import math
import os

import pytest

import mmsleep

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def test_path_loss():
    assert mmsleep.path_loss_db(100.0, True) == pytest.approx(100.9432, abs=1e-4)
    assert mmsleep.path_loss_db(100.0, False) == pytest.approx(121.3432, abs=1e-4)
    assert mmsleep.path_loss_db(1.0, True, carrier_ghz=1.0) == 28.0


def test_radio_helpers():
    assert mmsleep.received_power_dbm(20, 20, 100.9432) == pytest.approx(-60.9432)
    assert mmsleep.gnb_power_w() == pytest.approx(467.836, rel=1e-6)
    assert mmsleep.percentile_10([10, 20, 30, 40, 50, 60, 70, 80, 90, 100]) == pytest.approx(19.0)
    assert mmsleep.moving_average([1, 2, 3], 2) == [1, 1.5, 2.5]


def test_action_space():
    assert len(mmsleep.ActionSpace(15, 0.3)) == 1365
    space = mmsleep.ActionSpace(6, 0.5)
    assert space.k_off == 3
    assert len(space) == 20
    for a in range(len(space)):
        assert space.index_of(space.sleeping(a)) == a
    with pytest.raises(mmsleep.ActionSpaceTooLarge):
        mmsleep.ActionSpace(30, 0.5)


def test_scene_and_los():
    scene = mmsleep.generate_scene(129, 206, 45, 12, 7)
    assert scene.nx == 129 and scene.ny == 206
    a = mmsleep.GridPoint3D(0.5, 0.5, 44.0)
    b = mmsleep.GridPoint3D(128.5, 205.5, 44.5)
    assert scene.line_of_sight(a, b)
    assert scene.line_of_sight(a, b) == scene.line_of_sight(b, a)
    back = mmsleep._core.scene_from_json(scene.to_json())
    assert back.service_area_size == scene.service_area_size
    assert len(mmsleep.enumerate_candidates(scene)) > 0


def test_kmeans_and_context():
    centers, assignment = mmsleep.kmeans([(0, 0), (1, 0), (50, 50), (51, 50)], 2, 1)
    assert assignment[0] == assignment[1] != assignment[2] == assignment[3]
    ues = [mmsleep.GridPoint3D(10.5 + i, 20.5, 1.5) for i in range(12)]
    ctx = mmsleep.build_context(ues, 3, 100.0, 100.0, 5)
    assert len(ctx) == 9
    assert math.isclose(sum(ctx[6:]), 1.0)


def test_model_round_trip():
    model = mmsleep.init_weights([4, 8, 3], 2)
    x = [0.1, 0.2, 0.3, 0.4]
    before = model.forward(x)
    loss = model.train_step([(x, 1, 0.5)])
    assert loss >= 0.0
    assert model.step == 1
    clone = mmsleep.model_from_json(model.to_json())
    assert clone.forward(x) == model.forward(x)
    assert model.forward(x) != before
    with pytest.raises(mmsleep.DimensionError):
        model.forward([1.0])


def test_config_and_run():
    cfg = mmsleep.load_config(os.path.join(ROOT, "configs", "toy.cfg"))
    assert cfg["network"]["n_bs"] == 6
    cfg["run"]["iterations"] = 5
    cfg["run"]["regret"] = False
    result = mmsleep.run_experiment(cfg)
    assert result["n_actions"] == 20
    assert set(result["runs"]) == {"cmab", "random", "greedy", "ucb", "load"}
    for records in result["runs"].values():
        assert len(records) == 5
        assert all(r["sleeping"] == 3 for r in records)
    again = mmsleep.run_experiment(cfg)
    assert json.dumps(again["summary"]) == json.dumps(result["summary"])


def test_bad_config():
    with pytest.raises(mmsleep.ConfigError):
        mmsleep.run_experiment({"network": {"n_bs": "many"}})
    with pytest.raises(mmsleep.ConfigError):
        mmsleep.run_experiment({"netwrk": {}})
