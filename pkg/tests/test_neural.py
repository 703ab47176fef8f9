import numpy as np
import pytest

from floatnorm import neural
from floatnorm.neural import (AdamState, MlpNetwork, NeuralError, TrainConfig,
                              TrainingError, adam_step, backward_pass,
                              forward_pass, gradient_check, init_network,
                              load_model, save_model, train)


class TestInit:
    def test_architecture(self):
        net = init_network((18, 300, 300, 300, 15), seed=0)
        assert net.dims == (18, 300, 300, 300, 15)
        shapes = [w.shape for w in net.weights]
        assert shapes == [(18, 300), (300, 300), (300, 300), (300, 15)]

    def test_deterministic(self):
        a = init_network((4, 8, 2), seed=7)
        b = init_network((4, 8, 2), seed=7)
        assert all(np.array_equal(x, y)
                   for x, y in zip(a.weights, b.weights))

    def test_zero_biases(self):
        net = init_network((4, 8, 2), seed=0)
        assert all(np.all(b == 0) for b in net.biases)

    def test_he_variance(self):
        net = init_network((200, 400, 10), seed=1)
        assert np.var(net.weights[0]) == pytest.approx(2 / 200, rel=0.1)

    def test_short_dims_rejected(self):
        with pytest.raises(NeuralError):
            init_network((4,), seed=0)


class TestForward:
    def test_zero_weights_linear(self):
        net = init_network((3, 4, 2), seed=0)
        for w in net.weights:
            w[:] = 0
        out, _ = forward_pass(net, np.ones(3))
        assert np.all(out == 0)

    def test_zero_weights_sigmoid(self):
        net = init_network((3, 4, 2), output_activation="sigmoid", seed=0)
        for w in net.weights:
            w[:] = 0
        out, _ = forward_pass(net, np.ones(3))
        assert np.allclose(out, 0.5)

    def test_single_weight(self):
        net = init_network((1, 1), seed=0)
        net.weights[0][0, 0] = 2.5
        out, _ = forward_pass(net, np.array([3.0]))
        assert out[0] == pytest.approx(7.5)

    def test_input_size_mismatch(self):
        net = init_network((3, 2), seed=0)
        with pytest.raises(NeuralError):
            forward_pass(net, np.ones(4))

    def test_sigmoid_open_interval(self):
        net = init_network((4, 10, 3), output_activation="sigmoid", seed=2)
        x = np.random.default_rng(0).normal(0, 100, (50, 4))
        out, _ = forward_pass(net, x)
        assert np.all(out > 0) and np.all(out < 1)


class TestBackward:
    @pytest.mark.parametrize("act", ["linear", "sigmoid"])
    def test_gradcheck_many_nets(self, act):
        rng = np.random.default_rng(3)
        worst = 0.0
        for i in range(50):
            dims = [int(rng.integers(2, 7)) for _ in range(
                int(rng.integers(2, 5)))]
            net = init_network(dims, output_activation=act, seed=i)
            worst = max(worst, gradient_check(net, n_probes=30, seed=i))
        assert worst < 1e-4

    def test_zero_output_gradient(self):
        net = init_network((3, 5, 2), seed=4)
        out, cache = forward_pass(net, np.ones(3))
        (wg, bg), xg = backward_pass(net, cache, np.zeros(2))
        assert all(np.all(g == 0) for g in wg + bg)
        assert np.all(xg == 0)

    def test_freezing_does_not_change_math(self):
        net = init_network((3, 5, 2), seed=5)
        out, cache = forward_pass(net, np.ones(3))
        _, xg = backward_pass(net, cache, np.ones(2))
        net.frozen = True
        out2, cache2 = forward_pass(net, np.ones(3))
        _, xg2 = backward_pass(net, cache2, np.ones(2))
        assert np.array_equal(xg, xg2)

    def test_foreign_cache_rejected(self):
        a = init_network((3, 2), seed=0)
        b = init_network((3, 2), seed=1)
        _, cache = forward_pass(a, np.ones(3))
        with pytest.raises(NeuralError):
            backward_pass(b, cache, np.ones(2))


class TestAdam:
    def test_zero_gradient_no_change(self):
        net = init_network((2, 3), seed=6)
        state = AdamState.for_network(net)
        before = net.copy_weights()
        adam_step(net, state, [np.zeros((2, 3))], [np.zeros(3)], 1e-2)
        assert np.array_equal(net.weights[0], before[0][0])

    def test_constant_gradient_step_size(self):
        # with a persistent gradient Adam's step magnitude approaches lr
        net = init_network((1, 1), seed=7)
        state = AdamState.for_network(net)
        g = [np.full((1, 1), 3.7)]
        gb = [np.zeros(1)]
        prev = net.weights[0][0, 0]
        for _ in range(200):
            prev = net.weights[0][0, 0]
            adam_step(net, state, g, gb, 1e-3)
        assert abs(prev - net.weights[0][0, 0]) == pytest.approx(1e-3,
                                                                 rel=1e-3)

    def test_frozen_untouched(self):
        net = init_network((2, 3), seed=8)
        net.frozen = True
        state = AdamState.for_network(net)
        before = net.copy_weights()
        adam_step(net, state, [np.ones((2, 3))], [np.ones(3)], 1e-2)
        assert np.array_equal(net.weights[0], before[0][0])

    def test_nan_gradient_aborts(self):
        net = init_network((2, 3), seed=9)
        state = AdamState.for_network(net)
        with pytest.raises(TrainingError):
            adam_step(net, state, [np.full((2, 3), np.nan)], [np.ones(3)],
                      1e-2)


class TestTrain:
    def test_toy_identity(self):
        rng = np.random.default_rng(10)
        x = rng.uniform(-1, 1, (2000, 1))
        net = init_network((1, 32, 32, 1), seed=0)
        cfg = TrainConfig(max_epochs=150, initial_lr=3e-3, seed=0,
                          batch_size=64)
        report = train(net, x, x, cfg)
        assert report.best_val_mse < 1e-4

    def test_lr_sequence(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(-1, 1, (200, 2))
        y = x.sum(axis=1, keepdims=True)
        net = init_network((2, 8, 1), seed=1)
        cfg = TrainConfig(max_epochs=80, initial_lr=1e-3, seed=1,
                          plateau_patience=3, early_stop_patience=200)
        report = train(net, x, y, cfg)
        lrs = np.array(report.lr)
        assert np.all(np.diff(lrs) <= 0)
        ratios = lrs / lrs[0]
        ks = np.log2(1 / ratios)
        assert np.allclose(ks, np.round(ks))

    def test_deterministic(self):
        rng = np.random.default_rng(12)
        x = rng.uniform(-1, 1, (300, 2))
        y = x[:, :1] * x[:, 1:]
        outs = []
        for _ in range(2):
            net = init_network((2, 8, 1), seed=3)
            cfg = TrainConfig(max_epochs=10, seed=3)
            train(net, x, y, cfg)
            outs.append(forward_pass(net, x)[0])
        assert np.array_equal(outs[0], outs[1])

    def test_empty_dataset(self):
        net = init_network((2, 1), seed=0)
        with pytest.raises(TrainingError):
            train(net, np.empty((0, 2)), np.empty((0, 1)), TrainConfig())

    def test_frozen_net_rejected(self):
        net = init_network((2, 1), seed=0)
        net.frozen = True
        with pytest.raises(TrainingError):
            train(net, np.ones((10, 2)), np.ones((10, 1)), TrainConfig())

    def test_config_validation(self):
        with pytest.raises(NeuralError):
            TrainConfig(plateau_factor=1.5)
        with pytest.raises(NeuralError):
            TrainConfig(plateau_patience=0)


class TestGradientCheckHarness:
    def test_identity_net_near_exact(self):
        net = init_network((2, 2), seed=0)
        net.weights[0][:] = np.eye(2)
        assert gradient_check(net, n_probes=20) < 1e-8


class TestSerialization:
    def test_round_trip_exact(self, tmp_path):
        net = init_network((5, 7, 3), output_activation="sigmoid", seed=13,
                           metadata={"stage": "cgg", "scheme": "custom",
                                     "parameter_order": ["a", "b", "c"],
                                     "scaling_constants": {"C_ref": 1e-16}})
        path = tmp_path / "m.json"
        save_model(net, path)
        back = load_model(path)
        x = np.random.default_rng(0).normal(0, 1, 5)
        assert np.array_equal(forward_pass(net, x)[0],
                              forward_pass(back, x)[0])
        assert back.metadata["stage"] == "cgg"

    def test_tampered_dims(self, tmp_path):
        import json
        net = init_network((5, 7, 3), seed=14)
        path = tmp_path / "m.json"
        save_model(net, path)
        doc = json.loads(path.read_text())
        doc["dims"] = [5, 8, 3]
        path.write_text(json.dumps(doc))
        with pytest.raises(NeuralError, match="layer 0"):
            load_model(path)

    def test_wrong_version(self, tmp_path):
        import json
        net = init_network((2, 2), seed=15)
        path = tmp_path / "m.json"
        save_model(net, path)
        doc = json.loads(path.read_text())
        doc["schema_version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(NeuralError, match="schema_version"):
            load_model(path)

    def test_corrupt_json(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{not json")
        with pytest.raises(NeuralError, match="corrupt"):
            load_model(path)

    def test_parameter_order_warning(self, tmp_path):
        net = init_network((2, 2), seed=16,
                           metadata={"parameter_order": ["x", "y"]})
        path = tmp_path / "m.json"
        save_model(net, path)
        with pytest.warns(UserWarning, match="parameter order"):
            load_model(path, expected_parameter_order=["y", "x"])
