# Copyright 2026 The gdssm Authors. Apache 2.0 License.

import json
import os

import numpy as np
import pytest

import gdssm


def loop_gd(task, eta, steps):
    xs, ys = task.xs[:-1], task.ys[:-1]
    w = np.zeros((task.f_out, task.f_in))
    for _ in range(steps):
        w -= eta * (w @ xs.T - ys.T) @ xs / len(xs)
    return w @ task.xs[-1]


def test_task_shapes_and_targets():
    (t,) = gdssm.sample_tasks(1, f_in=4, f_out=3, n_context=6, seed=2)
    assert t.xs.shape == (7, 4)
    assert t.ys.shape == (7, 3)
    assert np.allclose(t.ys, t.xs @ t.w_true.T, rtol=0, atol=1e-14)
    assert np.all(np.abs(t.xs) < 1.0)


def test_gd_predict_matches_numpy():
    for t in gdssm.sample_tasks(10, f_in=5, f_out=2, n_context=8, seed=3):
        for steps in (1, 3):
            assert np.allclose(gdssm.gd_predict(t, eta=0.4, steps=steps), loop_gd(t, 0.4, steps), atol=1e-12)


def test_constructed_models_match_gd():
    tasks = gdssm.sample_tasks(20, f_in=4, f_out=4, n_context=5, seed=4)
    nd = gdssm.constructed_model(0.7, {"model.f": "4", "model.n_context": "5"})
    ml = gdssm.constructed_model(0.7, {"model.f": "4", "model.n_context": "5", "model.variant": "multilayer", "model.layers": "3"})
    for t in tasks:
        assert np.max(np.abs(nd.predict(t) - loop_gd(t, 0.7, 1))) < 1e-10
        assert np.max(np.abs(ml.predict(t) - loop_gd(t, 0.7, 3))) < 1e-9
        assert np.max(np.abs(gdssm.lsa_predict(t, 0.7) - loop_gd(t, 0.7, 1))) < 1e-10


def test_hand_built_task():
    t = gdssm.Task(np.array([[1.0], [1.0]]), np.array([[1.0], [0.0]]))
    assert t.n_context == 1
    assert gdssm.gd_predict(t, eta=1.0)[0] == 1.0
    assert gdssm.newton_predict(gdssm.Task(np.array([[1.0], [2.0]]), np.array([[3.0], [0.0]])), ridge=0.0)[0] == pytest.approx(6.0)


def test_weighted_outer_sum():
    rng = np.random.default_rng(0)
    c, q = rng.standard_normal((5, 3)), rng.standard_normal((3, 3))
    want = sum(q[i, j] * np.outer(c[:, i], c[:, j]) for i in range(3) for j in range(3))
    assert np.max(np.abs(gdssm.weighted_outer_sum(c, q) - want)) < 1e-13


def test_task_csv_round_trip():
    tasks = gdssm.sample_tasks(3, f_in=2, f_out=2, n_context=3, kind="sine", seed=5)
    back = gdssm.tasks_from_csv(gdssm.tasks_to_csv(tasks))
    for a, b in zip(tasks, back):
        assert np.array_equal(a.xs, b.xs) and np.array_equal(a.ys, b.ys) and b.kind == "sine"


def test_short_training_and_checkpoint(tmp_path):
    cfg = {"model.f": "3", "model.n_context": "4", "train.total_steps": "300", "train.eval_every": "100",
           "train.eval_tasks": "100", "train.lr_ssm": "1e-2", "train.lr_global": "2e-2", "train.batch_size": "16"}
    model, history, aborted = gdssm.train(cfg)
    assert aborted is None
    assert [r["step"] for r in history] == [0, 100, 200, 300]
    assert history[-1]["eval_loss"] < history[0]["eval_loss"]
    err, _ = model.grad_check(gdssm.sample_tasks(3, f_in=3, f_out=3, n_context=4))
    assert err < 1e-4
    prefix = str(tmp_path / "m")
    model.save(prefix)
    back = gdssm.load_model(prefix)
    for name, value in model.params().items():
        assert np.array_equal(value, back.params()[name])


def test_eval_ordering():
    tasks = gdssm.sample_tasks(500, seed=6)
    eta = gdssm.tune_gd_eta(gdssm.sample_tasks(200, seed=7))
    newton, _ = gdssm.eval_loss("newton", tasks)
    gd, _ = gdssm.eval_loss("gd", tasks, eta=eta)
    zero, _ = gdssm.eval_loss("zero", tasks)
    assert newton < gd < zero


def test_run_verify_and_bad_key(tmp_path):
    out = gdssm.run("verify", {"model.f": "3", "model.n_context": "4", "verify.seeds": "2", "run.out_dir": str(tmp_path)})
    assert out["exit_code"] == 0
    manifest = json.loads(open(out["manifest"]).read())
    assert manifest["status"] == "ok"
    assert any(p.endswith("_verify.csv") and os.path.exists(p) for p in out["artifacts"])
    with pytest.raises(gdssm.ConfigError):
        gdssm.run("verify", {"model.colour": "red"})
