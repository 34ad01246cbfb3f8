import math

import numpy as np
import pytest

import alpaca


def test_scalar_posterior_example():
    state = alpaca.batch_posterior(np.zeros((1, 1)), np.eye(1), np.ones((1, 1)), np.ones((1, 1)))
    assert state.kbar[0, 0] == pytest.approx(0.5)
    pred = alpaca.predict(state, np.ones(1), alpaca.NoiseModel.isotropic(1, 0.2))
    assert pred.mean[0] == pytest.approx(0.5)
    assert pred.cov[0, 0] == pytest.approx(1.5 * 0.2)


def test_batch_matches_recursive():
    rng = np.random.default_rng(0)
    kbar0 = rng.uniform(-1, 1, (5, 2))
    l0 = np.eye(5) * 1.3
    phi = rng.uniform(-1, 1, (12, 5))
    y = rng.uniform(-1, 1, (12, 2))
    state = alpaca.init_posterior(kbar0, l0)
    for t in range(12):
        state = alpaca.recursive_update(state, phi[t], y[t])
    batch = alpaca.batch_posterior(kbar0, l0, phi, y)
    assert np.max(np.abs(batch.kbar - state.kbar)) < 1e-10
    assert state.t == 12


def test_nll_and_errors():
    pred = alpaca.predict(alpaca.init_posterior(np.zeros((2, 1)), np.eye(2)), np.zeros(2),
                          alpaca.NoiseModel.isotropic(1, 1.0))
    assert alpaca.gaussian_nll(pred, np.zeros(1)) == pytest.approx(0.5 * math.log(2 * math.pi))
    with pytest.raises(alpaca.NotPositiveDefinite):
        alpaca.init_posterior(np.zeros((2, 1)), np.zeros((2, 2)))
    with pytest.raises(alpaca.ShapeError):
        alpaca.batch_posterior(np.zeros((2, 1)), np.eye(2), np.ones((3, 2)), np.ones((2, 1)))


def test_gp_one_point():
    pred = alpaca.gp_predict(np.zeros((1, 1)), np.ones((1, 1)), np.zeros(1), 1.0, 1.0, [0.1])
    assert pred.mean[0] == pytest.approx(1 / 1.1)
    assert pred.cov[0, 0] == pytest.approx(1.1 - 1 / 1.1)


def test_train_evaluate_and_round_trip(tmp_path):
    corpus = alpaca.generate_corpus("sinusoid", 20, 20, seed=1)
    test = alpaca.generate_corpus("sinusoid", 5, 30, seed=2)
    assert len(corpus) == 20 and len(corpus[0]) == 20
    cfg = alpaca.MetaTrainConfig()
    cfg.iterations = 30
    cfg.batch_size = 4
    cfg.horizon = 20
    net = alpaca.NetConfig(1, [16], 6)
    noise = alpaca.NoiseModel.isotropic(1, alpaca.family_noise_var("sinusoid"))
    prior, losses = alpaca.train(corpus, net, noise, cfg)
    assert len(losses) == 30 and all(math.isfinite(v) for v in losses)
    assert prior.features(np.linspace(-5, 5, 7).reshape(-1, 1)).shape == (7, 6)

    rows = alpaca.evaluate(prior, test, max_context=5)
    assert [r["context_size"] for r in rows] == list(range(6))
    frozen = alpaca.evaluate(prior, test, max_context=5, online_updates=False)
    assert len({r["nll_mean"] for r in frozen}) == 1
    assert 0.0 <= alpaca.calibration_coverage(prior, test, 5) <= 1.0

    path = tmp_path / "model.json"
    alpaca.save_model(path, prior, "sinusoid")
    back = alpaca.load_model(path)
    assert np.array_equal(back.kbar0, prior.kbar0)
    assert np.array_equal(back.l0, prior.l0)

    alpaca.save_corpus(tmp_path / "c.bin", test, "task=sinusoid")
    tasks, meta = alpaca.load_corpus(tmp_path / "c.bin")
    assert meta == "task=sinusoid"
    assert np.array_equal(tasks[3].ys, test[3].ys)
    with pytest.raises(alpaca.ParseError):
        (tmp_path / "bad.bin").write_bytes(b"garbage")
        alpaca.load_corpus(tmp_path / "bad.bin")
