import numpy as np
import pytest

from ttnets.networks import make_score_network, network_gradients
from ttnets.training import (
    AdamState,
    Dataset,
    TrainConfig,
    accuracy,
    adam_step,
    cross_entropy,
    cross_entropy_batch,
    decision_grid,
    make_circles,
    make_moons,
    predict,
    train,
    train_lr_sweep,
    write_grid_csv,
    write_history_csv,
)


class TestMoons:
    def test_four_noiseless_points(self):
        data = make_moons(4, 0.0)
        np.testing.assert_allclose(
            data.inputs[:, :, 0],
            [[1, 0], [-1, 0], [0, 0.5], [2, 0.5]], atol=1e-12)
        np.testing.assert_array_equal(data.labels, [0, 0, 1, 1])

    def test_noiseless_is_seed_independent(self):
        a, b = make_moons(10, 0.0, seed=1), make_moons(10, 0.0, seed=999)
        np.testing.assert_array_equal(a.inputs, b.inputs)

    def test_balanced_labels(self):
        for n in (5, 8, 101):
            labels = make_moons(n, 0.1, seed=0).labels
            assert abs(int((labels == 0).sum()) - int((labels == 1).sum())) <= 1

    def test_noise_applied(self):
        assert not np.array_equal(make_moons(10, 0.5, seed=3).inputs,
                                  make_moons(10, 0.0).inputs)


class TestCircles:
    def test_four_noiseless_points(self):
        data = make_circles(4, 0.0, factor=0.5)
        np.testing.assert_allclose(
            data.inputs[:, :, 0],
            [[1, 0], [-1, 0], [0.5, 0], [-0.5, 0]], atol=1e-12)
        np.testing.assert_array_equal(data.labels, [0, 0, 1, 1])

    def test_inner_radius_is_factor(self):
        data = make_circles(40, 0.0, factor=0.3)
        inner = data.inputs[data.labels == 1, :, 0]
        np.testing.assert_allclose(np.hypot(inner[:, 0], inner[:, 1]), 0.3, atol=1e-12)

    def test_factor_range_checked(self):
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError, match="factor"):
                make_circles(4, 0.0, factor=bad)

    def test_determinism_without_noise(self):
        np.testing.assert_array_equal(make_circles(6, 0.0, 0.5, seed=0).inputs,
                                      make_circles(6, 0.0, 0.5, seed=42).inputs)


class TestCrossEntropy:
    def test_symmetric_two_way(self):
        loss, grad = cross_entropy(np.array([0.0, 0.0]), 0)
        assert abs(loss - np.log(2)) <= 1e-15
        np.testing.assert_allclose(grad, [-0.5, 0.5])

    def test_confident_correct_is_near_zero(self):
        loss, _ = cross_entropy(np.array([1000.0, 0.0]), 0)
        assert 0.0 <= loss <= 1e-10

    def test_gradient_sums_to_zero(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            scores = rng.normal(size=5) * 10
            _, grad = cross_entropy(scores, int(rng.integers(5)))
            assert abs(grad.sum()) <= 1e-12

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        scores = rng.normal(size=4)
        label = 2
        _, grad = cross_entropy(scores, label)
        h = 1e-6
        for i in range(4):
            bumped = scores.copy()
            bumped[i] += h
            up, _ = cross_entropy(bumped, label)
            bumped[i] -= 2 * h
            dn, _ = cross_entropy(bumped, label)
            fd = (up - dn) / (2 * h)
            assert abs(fd - grad[i]) <= 1e-6 * max(abs(fd), abs(grad[i]), 1e-3)

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            cross_entropy(np.zeros(3), 3)


class TestAdam:
    def test_zero_gradient_keeps_params(self):
        params = [np.array([1.0, -2.0]), np.ones((2, 2))]
        state = AdamState.for_params(params)
        adam_step(params, [np.zeros(2), np.zeros((2, 2))], state, TrainConfig())
        np.testing.assert_array_equal(params[0], [1.0, -2.0])
        np.testing.assert_array_equal(params[1], np.ones((2, 2)))

    def test_first_step_closed_form(self):
        # bias corrections cancel at t=1: update = -lr * g / (|g| + eps)
        cfg = TrainConfig(learning_rate=0.05)
        g = np.array([0.5, -3.0, 1e-12])
        params = [np.zeros(3)]
        adam_step(params, [g], AdamState.for_params(params), cfg)
        want = -cfg.learning_rate * g / (np.abs(g) + cfg.eps)
        np.testing.assert_allclose(params[0], want, rtol=1e-12)

    def test_deterministic_trajectories(self):
        def run():
            rng = np.random.default_rng(0)
            params = [rng.normal(size=(3, 2))]
            state = AdamState.for_params(params)
            cfg = TrainConfig(learning_rate=1e-2)
            for _ in range(5):
                adam_step(params, [rng.normal(size=(3, 2))], state, cfg)
            return params[0]

        np.testing.assert_array_equal(run(), run())

    def test_shape_mismatch(self):
        params = [np.zeros(2)]
        with pytest.raises(ValueError, match="shape"):
            adam_step(params, [np.zeros(3)], AdamState.for_params(params), TrainConfig())


class TestTrainLoop:
    def test_zero_epochs_noop(self):
        data = make_moons(20, 0.1, seed=0)
        net = make_score_network("tt", 2, 1, 4, 2, 2, seed=1)
        before = [p.copy() for p in net.weights.parameters()]
        history = train(net, data, TrainConfig(epochs=0))
        assert history == []
        for old, new in zip(before, net.weights.parameters()):
            np.testing.assert_array_equal(old, new)

    def test_history_epochs_monotone(self):
        data = make_moons(40, 0.1, seed=0)
        net = make_score_network("tt", 2, 1, 4, 2, 2, seed=1)
        history = train(net, data, TrainConfig(epochs=4, learning_rate=1e-3, seed=2))
        assert [h.epoch for h in history] == [1, 2, 3, 4]

    def test_bit_deterministic(self):
        def run():
            data = make_moons(60, 0.1, seed=3)
            net = make_score_network("tt", 2, 1, 4, 3, 2, seed=4)
            history = train(net, data, TrainConfig(epochs=3, learning_rate=2e-3, seed=5))
            return history, net.weights.parameters()

        h1, p1 = run()
        h2, p2 = run()
        assert [(e.epoch, e.loss, e.accuracy) for e in h1] == \
               [(e.epoch, e.loss, e.accuracy) for e in h2]
        for a, b in zip(p1, p2):
            np.testing.assert_array_equal(a, b)

    def test_loss_decreases_over_first_ten_steps_for_most_seeds(self):
        # one fixed batch, full-batch steps, lr 1e-3
        data = make_moons(32, 0.1, seed=9)
        good = 0
        for seed in range(20):
            net = make_score_network("tt", 2, 1, 4, 4, 2, seed=seed)
            cfg = TrainConfig(learning_rate=1e-3, epochs=10, batch_size=32, seed=0)
            history = train(net, data, cfg)
            losses = [h.loss for h in history]
            if all(b < a for a, b in zip(losses, losses[1:])):
                good += 1
        assert good >= 18

    def test_full_pipeline_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(12)
        for kind in ("tt", "cp"):
            for trial in range(3):
                net = make_score_network(kind, 4, 3, 3, 2, 3, seed=trial,
                                         activation="sigmoid")
                x = rng.normal(size=(4, 3))
                label = int(rng.integers(3))

                def loss_value():
                    return cross_entropy(net.scores(x), label)[0]

                _, dscores = cross_entropy(net.scores(x), label)
                grads = network_gradients(net, x, dscores)
                params = net.weights.parameters() + [net.feature_map.A, net.feature_map.b]
                analytic = grads.weight_grads + [grads.dA, grads.db]
                h = 1e-5
                for p, a in zip(params, analytic):
                    flat, aflat = p.reshape(-1), np.asarray(a).reshape(-1)
                    for i in range(0, flat.size, 3):
                        keep = flat[i]
                        flat[i] = keep + h
                        up = loss_value()
                        flat[i] = keep - h
                        dn = loss_value()
                        flat[i] = keep
                        fd = (up - dn) / (2 * h)
                        assert abs(fd - aflat[i]) <= 1e-4 * max(abs(fd), abs(aflat[i]), 1e-6)


class TestSweep:
    def test_selection_reproducible(self):
        data = make_moons(50, 0.1, seed=2)
        cfg = TrainConfig(epochs=3, seed=11)

        def build(seed):
            return make_score_network("tt", 2, 1, 4, 2, 2, seed=seed)

        a = train_lr_sweep(build, data, cfg, (4e-3, 1e-3))
        b = train_lr_sweep(build, data, cfg, (4e-3, 1e-3))
        assert a.best_lr == b.best_lr
        assert [e.loss for e in a.history] == [e.loss for e in b.history]

    def test_picks_minimum_final_loss(self):
        data = make_moons(50, 0.1, seed=2)
        cfg = TrainConfig(epochs=2, seed=1)
        out = train_lr_sweep(lambda s: make_score_network("tt", 2, 1, 4, 2, 2, seed=s),
                             data, cfg, (2e-3, 1e-3, 5e-4))
        assert out.final_losses[out.best_lr] == min(out.final_losses.values())


class TestDecisionGrid:
    def test_all_equal_scores_break_ties_low(self):
        net = make_score_network("tt", 2, 1, 4, 2, 3, seed=0)
        net.weights.cores[-1][:] = 0.0  # all class scores identical (zero)
        labels, xs, ys = decision_grid(net, (-1, 1, -1, 1), 4)
        assert labels.shape == (4, 4)
        assert np.all(labels == 0)

    def test_single_cell(self):
        net = make_score_network("tt", 2, 1, 4, 2, 2, seed=0)
        labels, xs, ys = decision_grid(net, (0, 1, 0, 1), 1)
        assert labels.shape == (1, 1)
        assert xs.tolist() == [0.0] and ys.tolist() == [0.0]

    def test_rejects_long_sequences(self):
        net = make_score_network("tt", 3, 1, 4, 2, 2, seed=0)
        with pytest.raises(ValueError, match="2-D"):
            decision_grid(net, (0, 1, 0, 1), 4)

    def test_trained_net_recovers_noiseless_moons(self):
        from ttnets.training import DEFAULT_LR_SWEEP

        data = make_moons(500, 0.1, seed=1)
        cfg = TrainConfig(epochs=300, seed=7)
        out = train_lr_sweep(lambda s: make_score_network("tt", 2, 1, 4, 8, 2, seed=s),
                             data, cfg, DEFAULT_LR_SWEEP)
        clean = make_moons(500, 0.0)
        assert float(np.mean(predict(out.net, clean.inputs) == clean.labels)) >= 0.95


class TestCSVArtifacts:
    def test_history_csv(self, tmp_path):
        data = make_moons(30, 0.1, seed=0)
        net = make_score_network("tt", 2, 1, 4, 2, 2, seed=1)
        history = train(net, data, TrainConfig(epochs=2, seed=0))
        path = tmp_path / "history.csv"
        write_history_csv(path, history)
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,loss,accuracy"
        assert len(lines) == 3 and lines[1].startswith("1,")

    def test_grid_csv_row_count(self, tmp_path):
        net = make_score_network("tt", 2, 1, 4, 2, 2, seed=1)
        labels, xs, ys = decision_grid(net, (-1, 1, -1, 1), 5)
        path = tmp_path / "grid.csv"
        write_grid_csv(path, labels, xs, ys)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y,label"
        assert len(lines) == 1 + 25


class TestDataset:
    def test_label_range_checked(self):
        with pytest.raises(ValueError, match="labels"):
            Dataset(np.zeros((2, 2, 1)), np.array([0, 2]), 2)

    def test_label_count_checked(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((2, 2, 1)), np.array([0]), 2)

    def test_accuracy_helper(self):
        data = make_moons(10, 0.0)
        net = make_score_network("tt", 2, 1, 4, 2, 2, seed=0)
        acc = accuracy(net, data)
        assert 0.0 <= acc <= 1.0
